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

// Layout (little-endian):
//   "HETNASCK"  u32 version  u64 header_bytes  header (YAML text)
//   u32 tensor_count, then per tensor:
//   u32 name_bytes  name  u32 rank  u64 dims[rank]  f32 values[prod(dims)]

#include <yaml-cpp/yaml.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hetnas/error.hpp"
#include "hetnas/model.hpp"

namespace hetnas {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

namespace {

constexpr char kMagic[8] = {'H', 'E', 'T', 'N', 'A', 'S', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename U>
void put(std::ostream& out, U v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename U>
U get(std::istream& in) {
  U v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw RuntimeError("checkpoint: truncated file");
  return v;
}

std::string header_yaml(const Model<float>& model, const std::map<std::string, std::string>& metadata) {
  const auto& c = model.config();
  const auto& a = c.attention;
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "seed" << YAML::Value << model.seed();
  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "embed_dim" << YAML::Value << c.embed_dim;
  e << YAML::Key << "head_dim" << YAML::Value << c.head_dim;
  e << YAML::Key << "ffn_hidden" << YAML::Value << c.ffn_hidden;
  e << YAML::Key << "num_layers" << YAML::Value << c.num_layers;
  e << YAML::Key << "vocab_size" << YAML::Value << c.vocab_size;
  e << YAML::Key << "max_seq_len" << YAML::Value << c.max_seq_len;
  e << YAML::Key << "num_classes" << YAML::Value << c.num_classes;
  e << YAML::Key << "dropout" << YAML::Value << c.dropout;
  e << YAML::Key << "window" << YAML::Value << a.window;
  e << YAML::Key << "num_global" << YAML::Value << a.num_global;
  e << YAML::Key << "num_random" << YAML::Value << a.num_random;
  e << YAML::Key << "proj_rank" << YAML::Value << a.proj_rank;
  e << YAML::Key << "num_features" << YAML::Value << a.num_features;
  e << YAML::Key << "num_hashes" << YAML::Value << a.num_hashes;
  e << YAML::Key << "bucket_size" << YAML::Value << a.bucket_size;
  e << YAML::Key << "synth_mode" << YAML::Value << (a.synth_mode == SynthMode::kDense ? "dense" : "random");
  e << YAML::EndMap;
  // Every block in construction order, with its state.
  e << YAML::Key << "layers" << YAML::Value << YAML::BeginSeq;
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    e << YAML::BeginSeq;
    const auto& layer = model.layer(l);
    for (std::size_t i = 0; i < layer.size(); ++i) {
      const auto& b = layer.block(i);
      e << YAML::Flow << YAML::BeginMap;
      e << YAML::Key << "kind" << YAML::Value << std::string(kind_name(b.kind()));
      e << YAML::Key << "heads" << YAML::Value << b.heads();
      e << YAML::Key << "active" << YAML::Value << b.active();
      e << YAML::Key << "frozen" << YAML::Value << b.frozen();
      e << YAML::EndMap;
    }
    e << YAML::EndSeq;
  }
  e << YAML::EndSeq;
  e << YAML::Key << "metadata" << YAML::Value << YAML::BeginMap;
  for (const auto& [k, v] : metadata) e << YAML::Key << k << YAML::Value << v;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return e.c_str();
}

}  // namespace

void save_checkpoint(const std::string& path, const Model<float>& model,
                     const std::map<std::string, std::string>& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write checkpoint " + path);
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  const auto header = header_yaml(model, metadata);
  put<std::uint64_t>(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  const auto params = model.parameters();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    const auto& shape = p.tensor.shape();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) put<std::uint64_t>(out, d);
    const auto data = p.tensor.data();
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size_bytes()));
  }
  if (!out) throw RuntimeError("failed writing checkpoint " + path);
}

Model<float> load_checkpoint(const std::string& path, std::map<std::string, std::string>* metadata) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read checkpoint " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw UsageError(path + " is not a checkpoint");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) {
    throw UsageError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                     std::to_string(kVersion) + ")");
  }
  const auto header_bytes = get<std::uint64_t>(in);
  if (header_bytes > (1u << 24)) throw RuntimeError("checkpoint: implausible header size");
  std::string header(header_bytes, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_bytes));
  if (!in) throw RuntimeError("checkpoint: truncated header");

  ModelConfig cfg;
  ArchitectureSpec blocks;
  std::vector<std::vector<std::pair<bool, bool>>> states;
  std::uint64_t seed = 0;
  try {
    const auto root = YAML::Load(header);
    seed = root["seed"].as<std::uint64_t>();
    const auto m = root["model"];
    cfg.embed_dim = m["embed_dim"].as<std::size_t>();
    cfg.head_dim = m["head_dim"].as<std::size_t>();
    cfg.ffn_hidden = m["ffn_hidden"].as<std::size_t>();
    cfg.num_layers = m["num_layers"].as<std::size_t>();
    cfg.vocab_size = m["vocab_size"].as<std::size_t>();
    cfg.max_seq_len = m["max_seq_len"].as<std::size_t>();
    cfg.num_classes = m["num_classes"].as<std::size_t>();
    cfg.dropout = m["dropout"].as<double>();
    auto& a = cfg.attention;
    a.window = m["window"].as<std::size_t>();
    a.num_global = m["num_global"].as<std::size_t>();
    a.num_random = m["num_random"].as<std::size_t>();
    a.proj_rank = m["proj_rank"].as<std::size_t>();
    a.num_features = m["num_features"].as<std::size_t>();
    a.num_hashes = m["num_hashes"].as<std::size_t>();
    a.bucket_size = m["bucket_size"].as<std::size_t>();
    a.synth_mode = m["synth_mode"].as<std::string>() == "random" ? SynthMode::kRandom : SynthMode::kDense;
    for (const auto& layer : root["layers"]) {
      LayerSpec ls;
      std::vector<std::pair<bool, bool>> st;
      for (const auto& b : layer) {
        ls.push_back({parse_kind(b["kind"].as<std::string>()), b["heads"].as<std::size_t>()});
        st.emplace_back(b["active"].as<bool>(), b["frozen"].as<bool>());
      }
      blocks.layers.push_back(std::move(ls));
      states.push_back(std::move(st));
    }
    if (metadata) {
      metadata->clear();
      for (const auto& kv : root["metadata"]) (*metadata)[kv.first.as<std::string>()] = kv.second.as<std::string>();
    }
  } catch (const YAML::Exception& e) {
    throw RuntimeError(std::string("checkpoint: bad header: ") + e.what());
  }

  Model<float> model(cfg, blocks, seed);
  for (std::size_t l = 0; l < states.size(); ++l) {
    for (std::size_t i = 0; i < states[l].size(); ++i) {
      auto& b = model.layer(l).block(i);
      b.set_active(states[l][i].first);
      b.set_frozen(states[l][i].second);
    }
  }
  auto params = model.parameters();
  const auto count = get<std::uint32_t>(in);
  if (count != params.size()) throw RuntimeError("checkpoint: tensor count does not match the architecture");
  for (auto& p : params) {
    const auto name_len = get<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in || name != p.name) throw RuntimeError("checkpoint: expected tensor '" + p.name + "'");
    const auto rank = get<std::uint32_t>(in);
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(get<std::uint64_t>(in));
    if (shape != p.tensor.shape()) throw RuntimeError("checkpoint: shape mismatch for '" + name + "'");
    auto dst = p.tensor.mutable_data();
    in.read(reinterpret_cast<char*>(dst.data()), static_cast<std::streamsize>(dst.size_bytes()));
    if (!in) throw RuntimeError("checkpoint: truncated tensor '" + name + "'");
  }
  return model;
}

}  // namespace hetnas
