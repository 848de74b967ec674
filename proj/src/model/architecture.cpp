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

#include "hetnas/architecture.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "hetnas/error.hpp"

namespace hetnas {

namespace {
constexpr const char* kFormatTag = "hetnas-architecture";
constexpr int kFormatVersion = 1;
}  // namespace

ArchitectureSpec ArchitectureSpec::homogeneous(AttentionKind kind, std::size_t heads,
                                               std::size_t num_layers) {
  ArchitectureSpec spec;
  spec.layers.assign(num_layers, LayerSpec{HeadGroup{kind, heads}});
  return spec;
}

ArchitectureSpec ArchitectureSpec::canonical() const {
  ArchitectureSpec out;
  for (const auto& layer : layers) {
    std::map<AttentionKind, std::size_t> merged;
    for (const auto& group : layer) merged[group.kind] += group.heads;
    LayerSpec canon;
    for (const auto& [kind, heads] : merged) canon.push_back({kind, heads});
    out.layers.push_back(std::move(canon));
  }
  return out;
}

bool ArchitectureSpec::is_canonical() const { return canonical() == *this; }

std::size_t ArchitectureSpec::total_heads(std::size_t layer) const {
  std::size_t n = 0;
  for (const auto& g : layers.at(layer)) n += g.heads;
  return n;
}

std::string ArchitectureSpec::describe() const {
  std::ostringstream os;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (l) os << " -> ";
    for (std::size_t i = 0; i < layers[l].size(); ++i) {
      if (i) os << ' ';
      os << kind_name(layers[l][i].kind);
      if (layers[l][i].heads != 1) os << " x" << layers[l][i].heads;
    }
  }
  return os.str();
}

std::string ArchitectureSpec::to_yaml() const {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "format" << YAML::Value << kFormatTag;
  out << YAML::Key << "version" << YAML::Value << kFormatVersion;
  out << YAML::Key << "layers" << YAML::Value << YAML::BeginSeq;
  for (const auto& layer : layers) {
    out << YAML::BeginSeq;
    for (const auto& g : layer) {
      out << YAML::Flow << YAML::BeginMap;
      out << YAML::Key << "kind" << YAML::Value << std::string(kind_name(g.kind));
      out << YAML::Key << "heads" << YAML::Value << g.heads;
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

ArchitectureSpec ArchitectureSpec::from_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw UsageError(std::string("architecture: malformed YAML: ") + e.what());
  }
  if (!root.IsMap()) throw UsageError("architecture: top level must be a mapping");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key != "format" && key != "version" && key != "layers") {
      throw UsageError("architecture: unknown key '" + key + "'");
    }
  }
  if (root["format"] && root["format"].as<std::string>() != kFormatTag) {
    throw UsageError("architecture: unexpected format tag");
  }
  if (root["version"] && root["version"].as<int>() != kFormatVersion) {
    throw UsageError("architecture: unsupported version " + root["version"].as<std::string>());
  }
  const auto layers = root["layers"];
  if (!layers || !layers.IsSequence() || layers.size() == 0) {
    throw UsageError("architecture: 'layers' must be a non-empty list");
  }
  ArchitectureSpec spec;
  try {
    for (const auto& layer : layers) {
      if (!layer.IsSequence() || layer.size() == 0) {
        throw UsageError("architecture: every layer must be a non-empty list of {kind, heads}");
      }
      LayerSpec parsed;
      for (const auto& entry : layer) {
        if (!entry.IsMap() || !entry["kind"] || !entry["heads"] || entry.size() != 2) {
          throw UsageError("architecture: layer entries need exactly 'kind' and 'heads'");
        }
        const long heads = entry["heads"].as<long>();
        if (heads < 1) throw UsageError("architecture: heads must be >= 1");
        parsed.push_back({parse_kind(entry["kind"].as<std::string>()), static_cast<std::size_t>(heads)});
      }
      spec.layers.push_back(std::move(parsed));
    }
  } catch (const YAML::Exception& e) {
    throw UsageError(std::string("architecture: ") + e.what());
  }
  return spec;
}

void ArchitectureSpec::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write architecture file " + path);
  out << to_yaml();
  if (!out) throw RuntimeError("failed writing architecture file " + path);
}

ArchitectureSpec ArchitectureSpec::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read architecture file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_yaml(buf.str());
}

}  // namespace hetnas
