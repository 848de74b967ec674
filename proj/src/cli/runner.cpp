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

#include "hetnas/runner.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <sstream>

#include "hetnas/config.hpp"
#include "hetnas/error.hpp"
#include "hetnas/search.hpp"
#include "hetnas/train.hpp"
#include "plot.hpp"

#ifndef HETNAS_VERSION
#define HETNAS_VERSION "0.1.0-unknown"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace hetnas {

namespace {

bool g_verbose = false;

void progress(const std::string& msg) {
  if (g_verbose) std::cerr << "[hetnas] " << msg << std::endl;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << text;
  if (!out) throw RuntimeError("failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Creates `dir`, refusing to reuse a non-empty one unless forced (then its
// contents are removed).
void prepare_dir(const fs::path& dir, bool force) {
  if (dir.empty()) throw UsageError("an output directory is required");
  std::error_code ec;
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw UsageError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir)) {
      if (!force) {
        throw UsageError("output directory " + dir.string() + " is not empty; pass --force to overwrite");
      }
      for (const auto& entry : fs::directory_iterator(dir)) fs::remove_all(entry.path());
    }
  }
  fs::create_directories(dir, ec);
  if (ec) throw RuntimeError("cannot create " + dir.string() + ": " + ec.message());
}

void write_run_header(const fs::path& dir, const std::string& command, const std::string& mode,
                      const RunConfig& cfg) {
  write_file(dir / "config.yaml", cfg.to_yaml());
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "format" << YAML::Value << "hetnas-run";
  e << YAML::Key << "version" << YAML::Value << HETNAS_VERSION;
  e << YAML::Key << "command" << YAML::Value << command;
  if (!mode.empty()) e << YAML::Key << "mode" << YAML::Value << mode;
  e << YAML::Key << "seed" << YAML::Value << cfg.seed;
  e << YAML::Key << "config" << YAML::Value << "config.yaml";
  e << YAML::EndMap;
  write_file(dir / "run.yaml", std::string(e.c_str()) + "\n");
}

class JsonLog {
 public:
  explicit JsonLog(const fs::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw RuntimeError("cannot write " + path.string());
  }
  void write(const json& record) {
    out_ << record.dump() << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

json scores_json(const ScoreTable& t) {
  json rows = json::array();
  for (const auto& e : t.entries) {
    rows.push_back({{"block", e.block}, {"kind", std::string(kind_name(e.kind))}, {"score", e.score}});
  }
  return rows;
}

std::string pass_file(std::size_t pass) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scores_%03zu.csv", pass);
  return buf;
}

}  // namespace

void set_verbose(bool verbose) { g_verbose = verbose; }

const char* version_string() { return HETNAS_VERSION; }

// ---- search ----------------------------------------------------------------

void run_search(const SearchRequest& request) {
  const std::string& mode = request.mode;
  if (mode != "homo" && mode != "prune" && mode != "oneshot" && mode != "layerwise") {
    throw UsageError("unknown search mode '" + mode + "' (expected homo, prune, oneshot or layerwise)");
  }
  if (!request.scores_csv.empty() && mode != "oneshot") {
    throw UsageError("--scores is only meaningful with --mode oneshot");
  }
  const RunConfig cfg = request.config_path.empty() ? RunConfig::parse("", request.overrides)
                                                    : RunConfig::load(request.config_path, request.overrides);
  const fs::path dir(request.out_dir);
  // Validate replayed scores before touching the output directory.
  std::optional<ScoreTable> replay;
  if (!request.scores_csv.empty()) replay = ScoreTable::load_csv(request.scores_csv);

  prepare_dir(dir, request.force);
  write_run_header(dir, "search", mode, cfg);
  JsonLog log(dir / "search_log.jsonl");
  std::size_t passes = 0;
  auto save_pass = [&](const ScoreTable& t) { write_file(dir / pass_file(passes++), t.to_csv()); };

  auto observer = [&](const SearchEvent& ev) {
    if (ev.kind == "pretrain") {
      log.write({{"event", "pretrain"}, {"steps", ev.train_steps}, {"mean_loss", ev.loss}});
      progress("pretrained supernetwork for " + std::to_string(ev.train_steps) + " steps, mean loss " +
               fmt_short(ev.loss));
    } else if (ev.kind == "score") {
      save_pass(*ev.scores);
      log.write({{"event", "score"}, {"pass", passes - 1}, {"layer", ev.layer},
                 {"a_base", ev.scores->a_base}, {"scores", scores_json(*ev.scores)}});
    } else if (ev.kind == "prune") {
      save_pass(*ev.scores);
      log.write({{"event", "score"}, {"pass", passes - 1}, {"layer", ev.layer},
                 {"a_base", ev.scores->a_base}, {"scores", scores_json(*ev.scores)}});
      log.write({{"event", "prune"}, {"step", ev.step}, {"layer", ev.layer},
                 {"removed_block", ev.removed->block},
                 {"removed_kind", std::string(kind_name(ev.removed->kind))},
                 {"removed_score", ev.removed->score}, {"a_base", ev.scores->a_base},
                 {"scores", scores_json(*ev.scores)}});
      progress("prune step " + std::to_string(ev.step) + ": layer " + std::to_string(ev.layer) +
               " removed block " + std::to_string(ev.removed->block) + " (" +
               std::string(kind_name(ev.removed->kind)) + ", score " + fmt_short(ev.removed->score) + ")");
    } else if (ev.kind == "finetune") {
      log.write({{"event", "finetune"}, {"step", ev.step}, {"steps", ev.train_steps}, {"mean_loss", ev.loss}});
    }
  };

  std::optional<Dataset> data;
  auto task = [&] {
    if (!data) {
      progress("generating " + std::string(task_name(cfg.task.name)) + " data");
      data = generate(cfg.task);
    }
    return SearchTask{data->train, data->val, cfg.model};
  };

  ArchitectureSpec spec;
  if (mode == "homo") {
    const auto r = select_homogeneous(cfg.candidates, task(), cfg.search, observer);
    const auto best = r.passes.empty() ? 0.0 : r.passes.back().best().score;
    log.write({{"event", "select"}, {"kind", std::string(kind_name(*r.selected))}, {"score", best},
               {"low_confidence", r.low_confidence}});
    if (r.low_confidence) {
      std::cerr << "warning: best score " << fmt_short(best) << " is below the confidence threshold "
                << fmt_short(cfg.search.low_confidence_threshold) << "; the selection is unreliable\n";
    }
    spec = r.spec;
  } else if (mode == "prune") {
    spec = prune_search(cfg.candidates, task(), cfg.search, observer).spec;
  } else if (mode == "layerwise") {
    spec = layerwise_prune_search(cfg.candidates, task(), cfg.search, observer).spec;
  } else {
    ScoreTable table;
    if (replay) {
      table = *replay;
      save_pass(table);
      log.write({{"event", "score"}, {"pass", 0}, {"layer", 0}, {"a_base", table.a_base},
                 {"scores", scores_json(table)}, {"source", "replay"}});
    } else {
      // One homogeneous scoring pass, without the selection.
      SearchConfig sc = cfg.search;
      auto r = select_homogeneous(cfg.candidates, task(), sc, observer);
      if (r.passes.empty()) throw UsageError("oneshot search needs at least two candidate kinds");
      table = r.passes.back();
    }
    spec = oneshot_top4(table, cfg.search.heads, cfg.search.oneshot_k);
  }
  spec.save((dir / "spec.yaml").string());
  log.write({{"event", "result"}, {"spec", spec.describe()}});
  progress("result: " + spec.describe());
  std::cout << spec.describe() << "\n";
}

// ---- train -----------------------------------------------------------------

void run_train(const TrainRequest& request) {
  if (request.spec_path.empty()) throw UsageError("train needs --spec");
  const auto spec = ArchitectureSpec::load(request.spec_path);
  const RunConfig cfg = request.config_path.empty() ? RunConfig::parse("", request.overrides)
                                                    : RunConfig::load(request.config_path, request.overrides);
  // Fail on a mismatched spec before creating anything.
  (void)derive_model<float>(spec, cfg.model, cfg.seed);

  const fs::path dir(request.out_dir);
  prepare_dir(dir, request.force);
  write_run_header(dir, "train", "", cfg);
  spec.save((dir / "spec.yaml").string());
  fs::create_directories(dir / "checkpoints");
  JsonLog log(dir / "train_log.jsonl");

  progress("generating " + std::string(task_name(cfg.task.name)) + " data");
  const auto data = generate(cfg.task);
  const std::string run = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();

  std::string results = "run,seed,val_acc,test_acc\n";
  std::string curve = "run,seed,step,loss,val_acc\n";
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const std::uint64_t seed = cfg.seed + r;
    auto model = derive_model<float>(spec, cfg.model, seed);
    progress("training " + spec.describe() + " (seed " + std::to_string(seed) + ", " +
             std::to_string(cfg.train_steps) + " steps)");
    const auto tr = train_with_validation(model, data.train, data.val, cfg.train_steps, cfg.train, seed);
    const double test_acc = validation_accuracy(model, data.test);
    const std::string ckpt = "checkpoints/seed_" + std::to_string(seed) + ".ckpt";
    save_checkpoint((dir / ckpt).string(), model,
                    {{"seed", std::to_string(seed)}, {"best_step", std::to_string(tr.best_step)},
                     {"val_acc", fmt(tr.best_val_acc)}, {"spec", spec.describe()}});
    results += run + "," + std::to_string(seed) + "," + fmt(tr.best_val_acc) + "," + fmt(test_acc) + "\n";
    for (const auto& p : tr.curve) {
      curve += run + "," + std::to_string(seed) + "," + std::to_string(p.step) + "," + fmt(p.loss) + "," +
               fmt(p.val_acc) + "\n";
    }
    log.write({{"event", "trained"}, {"seed", seed}, {"steps", cfg.train_steps}, {"best_step", tr.best_step},
               {"val_acc", tr.best_val_acc}, {"test_acc", test_acc}, {"checkpoint", ckpt}});
    progress("seed " + std::to_string(seed) + ": best val " + fmt_short(tr.best_val_acc) + " at step " +
             std::to_string(tr.best_step) + ", test " + fmt_short(test_acc));
    std::cout << run << " seed " << seed << ": val_acc " << fmt_short(tr.best_val_acc) << " test_acc "
              << fmt_short(test_acc) << "\n";
  }
  write_file(dir / "results.csv", results);
  write_file(dir / "curve.csv", curve);
}

// ---- report ----------------------------------------------------------------

namespace {

struct RunSummary {
  std::string name, command, mode, final_spec;
  std::size_t score_passes = 0, prune_steps = 0;
  double val_sum = 0.0, test_sum = 0.0;
  std::size_t results = 0;
};

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(path));
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::vector<fs::path> find_runs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError(dir.string() + " is not a directory");
  if (fs::exists(dir / "run.yaml")) return {dir};
  std::vector<fs::path> runs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "run.yaml")) runs.push_back(entry.path());
  }
  std::sort(runs.begin(), runs.end());
  return runs;
}

}  // namespace

void run_report(const ReportRequest& request) {
  const fs::path root(request.run_dir);
  const auto runs = find_runs(root);
  if (runs.empty()) throw UsageError("no runs found in " + root.string());
  const fs::path out = root / "report";
  fs::create_directories(out);

  std::string scores = "run,pass,layer,block,kind,score,a_base\n";
  std::string prunes = "run,step,layer,block,kind,score\n";
  std::string curves = "run,seed,step,loss,val_acc\n";
  std::string results = "run,seed,val_acc,test_acc\n";
  std::vector<RunSummary> summaries;

  for (const auto& dir : runs) {
    RunSummary s;
    s.name = dir.filename().string();
    const auto meta = YAML::LoadFile((dir / "run.yaml").string());
    s.command = meta["command"] ? meta["command"].as<std::string>() : "";
    s.mode = meta["mode"] ? meta["mode"].as<std::string>() : "";
    if (fs::exists(dir / "spec.yaml")) s.final_spec = ArchitectureSpec::load((dir / "spec.yaml").string()).describe();

    std::vector<std::pair<std::string, double>> first_pass;
    if (fs::exists(dir / "search_log.jsonl")) {
      std::istringstream in(read_file(dir / "search_log.jsonl"));
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto rec = json::parse(line);
        const auto event = rec.at("event").get<std::string>();
        if (event == "score") {
          const auto pass = rec.at("pass").get<std::size_t>();
          for (const auto& row : rec.at("scores")) {
            scores += s.name + "," + std::to_string(pass) + "," + std::to_string(rec.at("layer").get<std::size_t>()) +
                      "," + std::to_string(row.at("block").get<std::size_t>()) + "," +
                      row.at("kind").get<std::string>() + "," + fmt(row.at("score").get<double>()) + "," +
                      fmt(rec.at("a_base").get<double>()) + "\n";
            if (pass == 0) first_pass.emplace_back(row.at("kind").get<std::string>() + "#" +
                                                       std::to_string(row.at("block").get<std::size_t>()),
                                                   row.at("score").get<double>());
          }
          ++s.score_passes;
        } else if (event == "prune") {
          prunes += s.name + "," + std::to_string(rec.at("step").get<std::size_t>()) + "," +
                    std::to_string(rec.at("layer").get<std::size_t>()) + "," +
                    std::to_string(rec.at("removed_block").get<std::size_t>()) + "," +
                    rec.at("removed_kind").get<std::string>() + "," + fmt(rec.at("removed_score").get<double>()) +
                    "\n";
          ++s.prune_steps;
        }
      }
    }
    std::map<std::string, std::vector<std::pair<double, double>>> curve_series;
    if (fs::exists(dir / "curve.csv")) {
      for (const auto& row : read_csv_rows(dir / "curve.csv")) {
        if (row.size() != 5) throw RuntimeError("malformed curve.csv in " + dir.string());
        curves += s.name + "," + row[1] + "," + row[2] + "," + row[3] + "," + row[4] + "\n";
        curve_series["seed " + row[1]].emplace_back(std::stod(row[2]), std::stod(row[4]));
      }
    }
    if (fs::exists(dir / "results.csv")) {
      for (const auto& row : read_csv_rows(dir / "results.csv")) {
        if (row.size() != 4) throw RuntimeError("malformed results.csv in " + dir.string());
        results += s.name + "," + row[1] + "," + row[2] + "," + row[3] + "\n";
        s.val_sum += std::stod(row[2]);
        s.test_sum += std::stod(row[3]);
        ++s.results;
      }
    }
    if (request.plots) {
      if (!first_pass.empty()) {
        write_file(out / (s.name + "_scores.svg"),
                   plot::bar_chart(s.name + ": masked validation accuracy drop (first pass)", first_pass));
      }
      if (!curve_series.empty()) {
        write_file(out / (s.name + "_curves.svg"),
                   plot::line_chart(s.name + ": validation accuracy", "step", "val_acc", curve_series));
      }
    }
    summaries.push_back(std::move(s));
  }

  std::string summary = "run,command,mode,score_passes,prune_steps,final_spec,runs,mean_val_acc,mean_test_acc\n";
  for (const auto& s : summaries) {
    const auto n = static_cast<double>(s.results);
    summary += s.name + "," + s.command + "," + s.mode + "," + std::to_string(s.score_passes) + "," +
               std::to_string(s.prune_steps) + "," + s.final_spec + "," + std::to_string(s.results) + "," +
               (s.results ? fmt(s.val_sum / n) : "") + "," + (s.results ? fmt(s.test_sum / n) : "") + "\n";
  }
  write_file(out / "summary.csv", summary);
  write_file(out / "scores.csv", scores);
  write_file(out / "prunes.csv", prunes);
  write_file(out / "curves.csv", curves);
  write_file(out / "results.csv", results);

  for (const auto& s : summaries) {
    std::cout << s.name << ": " << s.command << (s.mode.empty() ? "" : " " + s.mode);
    if (s.prune_steps) std::cout << ", " << s.prune_steps << " removals";
    if (!s.final_spec.empty()) std::cout << ", spec " << s.final_spec;
    if (s.results) std::cout << ", mean test acc " << fmt_short(s.test_sum / static_cast<double>(s.results));
    std::cout << "\n";
  }
  std::cout << "report written to " << out.string() << "\n";
}

}  // namespace hetnas
