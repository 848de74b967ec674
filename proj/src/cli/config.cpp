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

#include "hetnas/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "hetnas/error.hpp"

namespace hetnas {

namespace {

// Reads known keys from a mapping and rejects the rest.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw UsageError("config: '" + path_ + "' must be a mapping");
  }

  template <typename U>
  void read(const char* key, U& out) {
    seen_.insert(key);
    if (!node_ || node_.IsNull()) return;
    const auto v = node_[key];
    if (!v) return;
    try {
      out = v.as<U>();
    } catch (const YAML::Exception&) {
      throw UsageError("config: bad value for '" + where(key) + "'");
    }
  }

  Section child(const char* key) {
    seen_.insert(key);
    return Section(node_ && node_.IsMap() ? node_[key] : YAML::Node(), where(key));
  }

  bool has(const char* key) const { return node_ && node_.IsMap() && node_[key]; }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw UsageError("config: unknown key '" + where(key) + "'");
    }
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<AttentionKind> kinds_from(const std::vector<std::string>& names) {
  std::vector<AttentionKind> out;
  for (const auto& n : names) out.push_back(parse_kind(n));
  return out;
}

std::vector<std::string> names_of(const std::vector<AttentionKind>& kinds) {
  std::vector<std::string> out;
  for (auto k : kinds) out.emplace_back(kind_name(k));
  return out;
}

void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("override '" + assignment + "' must look like key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception&) {
    throw UsageError("override '" + assignment + "': value is not valid YAML");
  }
  std::vector<std::string> keys;
  std::stringstream ss(path);
  for (std::string k; std::getline(ss, k, '.');) {
    if (k.empty()) throw UsageError("override '" + assignment + "': empty key");
    keys.push_back(k);
  }
  // yaml-cpp nodes are handles, so walking with operator[] and reassigning
  // the node variable would rebind rather than descend; recurse instead.
  std::function<void(YAML::Node, std::size_t)> set = [&](YAML::Node node, std::size_t i) {
    if (i + 1 == keys.size()) {
      node[keys[i]] = value;
      return;
    }
    if (!node[keys[i]] || !node[keys[i]].IsMap()) node[keys[i]] = YAML::Node(YAML::NodeType::Map);
    set(node[keys[i]], i + 1);
  };
  set(root, 0);
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw UsageError(std::string("config: malformed YAML: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw UsageError("config: top level must be a mapping");
  for (const auto& o : overrides) apply_override(root, o);

  RunConfig c;
  Section top(root, "");
  top.read("seed", c.seed);

  Section t = top.child("task");
  std::string name = std::string(task_name(c.task.name));
  std::string layout = "local";
  t.read("name", name);
  c.task.name = parse_task_name(name);
  t.read("max_seq_len", c.task.max_seq_len);
  t.read("train_size", c.task.train_size);
  t.read("val_size", c.task.val_size);
  t.read("test_size", c.task.test_size);
  c.task.seed = c.seed;
  t.read("seed", c.task.seed);
  t.read("max_depth", c.task.max_depth);
  t.read("max_args", c.task.max_args);
  t.read("alphabet", c.task.alphabet);
  t.read("motif_len", c.task.motif_len);
  t.read("layout", layout);
  if (layout == "local") c.task.layout = MotifLayout::kLocal;
  else if (layout == "split") c.task.layout = MotifLayout::kSplit;
  else throw UsageError("config: task.layout must be 'local' or 'split'");
  t.read("motif_at_start", c.task.motif_at_start);
  t.read("motif_region", c.task.motif_region);
  t.read("noise", c.task.noise);
  t.read("corruption", c.task.corruption);
  t.read("disjoint_negatives", c.task.disjoint_negatives);
  t.finish();

  Section m = top.child("model");
  m.read("embed_dim", c.model.embed_dim);
  m.read("head_dim", c.model.head_dim);
  m.read("ffn_hidden", c.model.ffn_hidden);
  m.read("num_layers", c.model.num_layers);
  m.read("dropout", c.model.dropout);
  Section a = m.child("attention");
  auto& ac = c.model.attention;
  a.read("window", ac.window);
  a.read("num_global", ac.num_global);
  a.read("num_random", ac.num_random);
  a.read("proj_rank", ac.proj_rank);
  a.read("num_features", ac.num_features);
  a.read("num_hashes", ac.num_hashes);
  a.read("bucket_size", ac.bucket_size);
  std::string synth = ac.synth_mode == SynthMode::kDense ? "dense" : "random";
  a.read("synth_mode", synth);
  if (synth == "dense") ac.synth_mode = SynthMode::kDense;
  else if (synth == "random") ac.synth_mode = SynthMode::kRandom;
  else throw UsageError("config: model.attention.synth_mode must be 'dense' or 'random'");
  a.finish();
  m.finish();

  Section s = top.child("search");
  auto cand = names_of(c.candidates);
  s.read("candidates", cand);
  c.candidates = kinds_from(cand);
  s.read("heads", c.search.heads);
  s.read("pretrain_steps", c.search.pretrain_steps);
  s.read("finetune_steps", c.search.finetune_steps);
  s.read("oneshot_k", c.search.oneshot_k);
  s.read("sample_size", c.search.sample_size);
  s.read("layers", c.search.layers);
  s.read("low_confidence_threshold", c.search.low_confidence_threshold);
  c.search.seed = c.seed;
  s.read("seed", c.search.seed);
  std::vector<std::string> zeroed;
  s.read("zeroed_kinds", zeroed);
  c.search.zeroed_kinds = kinds_from(zeroed);
  s.finish();

  Section tr = top.child("train");
  tr.read("steps", c.train_steps);
  tr.read("repeats", c.repeats);
  tr.read("warmup", c.train.warmup);
  tr.read("base_lr", c.train.base_lr);
  tr.read("batch_size", c.train.batch_size);
  tr.read("eval_every", c.train.eval_every);
  tr.finish();
  top.finish();

  c.search.train = c.train;
  c.model.vocab_size = c.task.vocab_size();
  c.model.max_seq_len = c.task.max_seq_len;
  c.model.num_classes = c.task.num_classes();

  c.task.validate();
  c.model.validate();
  c.search.validate();
  if (c.candidates.empty()) throw UsageError("config: search.candidates is empty");
  if (c.train_steps < 0) throw UsageError("config: train.steps must be >= 0");
  if (c.repeats < 1) throw UsageError("config: train.repeats must be >= 1");
  if (c.train.batch_size < 1) throw UsageError("config: train.batch_size must be >= 1");
  if (c.train.warmup < 1) throw UsageError("config: train.warmup must be >= 1");
  if (c.train.eval_every < 1) throw UsageError("config: train.eval_every must be >= 1");
  if (!(c.train.base_lr > 0.0)) throw UsageError("config: train.base_lr must be positive");
  for (auto k : c.candidates) {
    AttentionConfig probe = c.model.attention;
    probe.kind = k;
    probe.validate(c.model.context_len());
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), overrides);
}

std::string RunConfig::to_yaml() const {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "seed" << YAML::Value << seed;

  e << YAML::Key << "task" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << std::string(task_name(task.name));
  e << YAML::Key << "max_seq_len" << YAML::Value << task.max_seq_len;
  e << YAML::Key << "train_size" << YAML::Value << task.train_size;
  e << YAML::Key << "val_size" << YAML::Value << task.val_size;
  e << YAML::Key << "test_size" << YAML::Value << task.test_size;
  e << YAML::Key << "seed" << YAML::Value << task.seed;
  e << YAML::Key << "max_depth" << YAML::Value << task.max_depth;
  e << YAML::Key << "max_args" << YAML::Value << task.max_args;
  e << YAML::Key << "alphabet" << YAML::Value << task.alphabet;
  e << YAML::Key << "motif_len" << YAML::Value << task.motif_len;
  e << YAML::Key << "layout" << YAML::Value << (task.layout == MotifLayout::kLocal ? "local" : "split");
  e << YAML::Key << "motif_at_start" << YAML::Value << task.motif_at_start;
  e << YAML::Key << "motif_region" << YAML::Value << task.motif_region;
  e << YAML::Key << "noise" << YAML::Value << task.noise;
  e << YAML::Key << "corruption" << YAML::Value << task.corruption;
  e << YAML::Key << "disjoint_negatives" << YAML::Value << task.disjoint_negatives;
  e << YAML::EndMap;

  const auto& a = model.attention;
  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "embed_dim" << YAML::Value << model.embed_dim;
  e << YAML::Key << "head_dim" << YAML::Value << model.head_dim;
  e << YAML::Key << "ffn_hidden" << YAML::Value << model.ffn_hidden;
  e << YAML::Key << "num_layers" << YAML::Value << model.num_layers;
  e << YAML::Key << "dropout" << YAML::Value << model.dropout;
  e << YAML::Key << "attention" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "window" << YAML::Value << a.window;
  e << YAML::Key << "num_global" << YAML::Value << a.num_global;
  e << YAML::Key << "num_random" << YAML::Value << a.num_random;
  e << YAML::Key << "proj_rank" << YAML::Value << a.proj_rank;
  e << YAML::Key << "num_features" << YAML::Value << a.num_features;
  e << YAML::Key << "num_hashes" << YAML::Value << a.num_hashes;
  e << YAML::Key << "bucket_size" << YAML::Value << a.bucket_size;
  e << YAML::Key << "synth_mode" << YAML::Value << (a.synth_mode == SynthMode::kDense ? "dense" : "random");
  e << YAML::EndMap << YAML::EndMap;

  e << YAML::Key << "search" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "candidates" << YAML::Value << YAML::Flow << names_of(candidates);
  e << YAML::Key << "heads" << YAML::Value << search.heads;
  e << YAML::Key << "pretrain_steps" << YAML::Value << search.pretrain_steps;
  e << YAML::Key << "finetune_steps" << YAML::Value << search.finetune_steps;
  e << YAML::Key << "oneshot_k" << YAML::Value << search.oneshot_k;
  e << YAML::Key << "sample_size" << YAML::Value << search.sample_size;
  e << YAML::Key << "layers" << YAML::Value << search.layers;
  e << YAML::Key << "low_confidence_threshold" << YAML::Value << search.low_confidence_threshold;
  e << YAML::Key << "seed" << YAML::Value << search.seed;
  e << YAML::Key << "zeroed_kinds" << YAML::Value << YAML::Flow << names_of(search.zeroed_kinds);
  e << YAML::EndMap;

  e << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "steps" << YAML::Value << train_steps;
  e << YAML::Key << "repeats" << YAML::Value << repeats;
  e << YAML::Key << "warmup" << YAML::Value << train.warmup;
  e << YAML::Key << "base_lr" << YAML::Value << train.base_lr;
  e << YAML::Key << "batch_size" << YAML::Value << train.batch_size;
  e << YAML::Key << "eval_every" << YAML::Value << train.eval_every;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace hetnas
