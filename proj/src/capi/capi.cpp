// Copyright 2026 The HetNAS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hetnas/hetnas.h"

#include <cstring>
#include <new>
#include <string>

#include "hetnas/architecture.hpp"
#include "hetnas/error.hpp"
#include "hetnas/model.hpp"
#include "hetnas/runner.hpp"
#include "hetnas/search.hpp"

struct hetnas_spec {
  hetnas::ArchitectureSpec spec;
};

struct hetnas_model {
  hetnas::Model<float> model;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
hetnas_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return HETNAS_OK;
  } catch (const hetnas::UsageError& e) {
    g_last_error = e.what();
    return HETNAS_ERR_USAGE;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return HETNAS_ERR_USAGE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HETNAS_ERR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HETNAS_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return HETNAS_ERR_RUNTIME;
  }
}

std::string str(const char* s) { return s ? s : ""; }

void require(const void* p, const char* what) {
  if (!p) throw hetnas::UsageError(std::string(what) + " must not be NULL");
}

std::vector<std::string> strings(const char* const* items, size_t n) {
  if (n && !items) throw hetnas::UsageError("overrides must not be NULL when num_overrides > 0");
  std::vector<std::string> out;
  for (size_t i = 0; i < n; ++i) out.push_back(str(items[i]));
  return out;
}

void copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf) {
    if (!needed) throw hetnas::UsageError("buffer and needed are both NULL");
    return;
  }
  if (cap < s.size() + 1) throw hetnas::UsageError("buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

}  // namespace

extern "C" {

const char* hetnas_version(void) { return hetnas::version_string(); }

const char* hetnas_last_error(void) { return g_last_error.c_str(); }

void hetnas_set_verbose(int verbose) { hetnas::set_verbose(verbose != 0); }

hetnas_status hetnas_cmd_search(const char* mode, const char* config_path, const char* out_dir,
                                const char* scores_csv, const char* const* overrides, size_t num_overrides,
                                int force) {
  return guarded([&] {
    require(mode, "mode");
    require(out_dir, "out_dir");
    hetnas::run_search({str(mode), str(config_path), str(out_dir), str(scores_csv),
                        strings(overrides, num_overrides), force != 0});
  });
}

hetnas_status hetnas_cmd_train(const char* spec_path, const char* config_path, const char* out_dir,
                               const char* const* overrides, size_t num_overrides, int force) {
  return guarded([&] {
    require(spec_path, "spec_path");
    require(out_dir, "out_dir");
    hetnas::run_train({str(spec_path), str(config_path), str(out_dir), strings(overrides, num_overrides),
                       force != 0});
  });
}

hetnas_status hetnas_cmd_report(const char* run_dir, int plots) {
  return guarded([&] {
    require(run_dir, "run_dir");
    hetnas::run_report({str(run_dir), plots != 0});
  });
}

hetnas_status hetnas_spec_load(const char* path, hetnas_spec** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new hetnas_spec{hetnas::ArchitectureSpec::load(path)};
  });
}

hetnas_status hetnas_spec_parse(const char* yaml_text, hetnas_spec** out) {
  return guarded([&] {
    require(yaml_text, "yaml_text");
    require(out, "out");
    *out = new hetnas_spec{hetnas::ArchitectureSpec::from_yaml(yaml_text)};
  });
}

hetnas_status hetnas_spec_oneshot(const char* scores_csv, size_t heads, size_t k, hetnas_spec** out) {
  return guarded([&] {
    require(scores_csv, "scores_csv");
    require(out, "out");
    const auto table = hetnas::ScoreTable::load_csv(scores_csv);
    *out = new hetnas_spec{hetnas::oneshot_top4(table, heads, k)};
  });
}

size_t hetnas_spec_num_layers(const hetnas_spec* spec) { return spec ? spec->spec.layers.size() : 0; }

hetnas_status hetnas_spec_describe(const hetnas_spec* spec, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(spec, "spec");
    copy_out(spec->spec.describe(), buf, cap, needed);
  });
}

hetnas_status hetnas_spec_to_yaml(const hetnas_spec* spec, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(spec, "spec");
    copy_out(spec->spec.to_yaml(), buf, cap, needed);
  });
}

hetnas_status hetnas_spec_save(const hetnas_spec* spec, const char* path) {
  return guarded([&] {
    require(spec, "spec");
    require(path, "path");
    spec->spec.save(path);
  });
}

void hetnas_spec_free(hetnas_spec* spec) { delete spec; }

hetnas_status hetnas_model_load(const char* checkpoint_path, hetnas_model** out) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(out, "out");
    *out = new hetnas_model{hetnas::load_checkpoint(checkpoint_path)};
  });
}

size_t hetnas_model_num_classes(const hetnas_model* model) {
  return model ? model->model.config().num_classes : 0;
}

size_t hetnas_model_max_seq_len(const hetnas_model* model) {
  return model ? model->model.config().max_seq_len : 0;
}

hetnas_status hetnas_model_predict(const hetnas_model* model, const int32_t* tokens, size_t num_tokens,
                                   float* logits, size_t capacity) {
  return guarded([&] {
    require(model, "model");
    require(tokens, "tokens");
    require(logits, "logits");
    const auto& cfg = model->model.config();
    if (capacity < cfg.num_classes) throw hetnas::UsageError("logits buffer smaller than num_classes");
    for (size_t i = 0; i < num_tokens; ++i) {
      if (tokens[i] < 0 || static_cast<size_t>(tokens[i]) >= cfg.vocab_size) {
        throw hetnas::UsageError("token id out of range at position " + std::to_string(i));
      }
    }
    const auto out = model->model.classify({tokens, num_tokens});
    std::memcpy(logits, out.data(), out.size() * sizeof(float));
  });
}

void hetnas_model_free(hetnas_model* model) { delete model; }

}  // extern "C"
