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

#include "hetnas/search.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hetnas/error.hpp"

namespace hetnas {

// ---- ScoreTable --------------------------------------------------------------

const ScoreEntry& ScoreTable::best() const {
  if (entries.empty()) throw UsageError("score table is empty");
  const ScoreEntry* out = &entries.front();
  for (const auto& e : entries)
    if (e.score > out->score) out = &e;
  return *out;
}

const ScoreEntry& ScoreTable::worst() const {
  if (entries.empty()) throw UsageError("score table is empty");
  const ScoreEntry* out = &entries.front();
  for (const auto& e : entries) {
    if (e.score < out->score) {
      out = &e;
    } else if (e.score == out->score) {
      if (e.block > out->block || (e.block == out->block && kind_name(e.kind) > kind_name(out->kind))) {
        out = &e;
      }
    }
  }
  return *out;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("scores: bad " + what + " '" + s + "'");
  }
}

std::size_t parse_index(const std::string& s, const std::string& what) {
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) throw UsageError("scores: bad " + what + " '" + s + "'");
  return v;
}

}  // namespace

std::string ScoreTable::to_csv(bool header) const {
  std::string out = header ? "layer,block,kind,score,a_base\n" : "";
  for (const auto& e : entries) {
    out += std::to_string(e.layer) + "," + std::to_string(e.block) + "," +
           std::string(kind_name(e.kind)) + "," + fmt_double(e.score) + "," + fmt_double(a_base) + "\n";
  }
  return out;
}

ScoreTable ScoreTable::from_csv(const std::string& text) {
  ScoreTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true, have_base = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (first) {
      first = false;
      if (!cells.empty() && cells[0] == "layer") {
        if (cells != std::vector<std::string>{"layer", "block", "kind", "score", "a_base"}) {
          throw UsageError("scores: header must be layer,block,kind,score,a_base");
        }
        continue;
      }
    }
    if (cells.size() != 5) throw UsageError("scores: expected 5 columns in '" + line + "'");
    ScoreEntry e;
    e.layer = parse_index(cells[0], "layer");
    e.block = parse_index(cells[1], "block");
    e.kind = parse_kind(cells[2]);
    e.score = parse_double(cells[3], "score");
    const double base = parse_double(cells[4], "a_base");
    if (!have_base) {
      t.a_base = base;
      have_base = true;
    }
    t.entries.push_back(e);
  }
  if (t.entries.empty()) throw UsageError("scores: no rows");
  return t;
}

ScoreTable ScoreTable::load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read score file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_csv(buf.str());
}

// ---- config ------------------------------------------------------------------

void SearchConfig::validate() const {
  if (heads < 1) throw UsageError("search: heads (H) must be >= 1");
  if (pretrain_steps < 0) throw UsageError("search: pretrain_steps must be >= 0");
  if (finetune_steps < 0) throw UsageError("search: finetune_steps must be >= 0");
  if (oneshot_k < 1) throw UsageError("search: oneshot_k must be >= 1");
  if (layers < 1) throw UsageError("search: layers must be >= 1");
  if (!std::isfinite(low_confidence_threshold)) throw UsageError("search: bad low_confidence_threshold");
}

// ---- scoring -----------------------------------------------------------------

ScoreTable score_blocks(Model<float>& supernet, std::size_t layer, std::span<const Example> val) {
  if (layer >= supernet.num_layers()) throw UsageError("score_blocks: layer index out of range");
  auto& l = supernet.layer(layer);
  const auto active = l.active_indices();
  if (active.size() < 2) throw UsageError("score_blocks: layer has a single active block");
  const std::size_t total = val.size();
  if (total == 0) throw UsageError("score_blocks: empty validation set");

  ScoreTable table;
  const std::size_t base_correct = count_correct(supernet, val);
  table.a_base = static_cast<double>(base_correct) / static_cast<double>(total);
  for (std::size_t i : active) {
    l.mask_block(i);
    std::size_t correct = 0;
    try {
      correct = count_correct(supernet, val);
    } catch (...) {
      l.unmask_block(i);
      throw;
    }
    l.unmask_block(i);
    const double a_i = static_cast<double>(correct) / static_cast<double>(total);
    table.entries.push_back({layer, i, l.block(i).kind(), table.a_base - a_i});
  }
  return table;
}

AttentionKind select_from_scores(const ScoreTable& table) { return table.best().kind; }

// ---- helpers -----------------------------------------------------------------

namespace {

void check_candidates(std::span<const AttentionKind> candidates) {
  if (candidates.empty()) throw UsageError("search: no candidate kinds");
  std::set<AttentionKind> seen;
  for (auto k : candidates) {
    if (!seen.insert(k).second) {
      throw UsageError("search: candidate '" + std::string(kind_name(k)) + "' listed twice");
    }
  }
}

void emit(const SearchObserver& observer, const SearchEvent& ev) {
  if (observer) observer(ev);
}

ModelConfig with_layers(ModelConfig cfg, std::size_t layers) {
  cfg.num_layers = layers;
  return cfg;
}

}  // namespace

Model<float> build_supernet(const ArchitectureSpec& blocks, const ModelConfig& cfg,
                            const SearchConfig& search) {
  Model<float> model(with_layers(cfg, blocks.layers.size()), blocks, search.seed);
  for (std::size_t l = 0; l < model.num_layers(); ++l) {
    auto& layer = model.layer(l);
    for (std::size_t i = 0; i < layer.size(); ++i) {
      auto& b = layer.block(i);
      if (std::find(search.zeroed_kinds.begin(), search.zeroed_kinds.end(), b.kind()) !=
          search.zeroed_kinds.end()) {
        b.zero_output();
        b.set_frozen(true);
      }
    }
  }
  return model;
}

// ---- homogeneous selection ---------------------------------------------------

SearchResult select_homogeneous(std::span<const AttentionKind> candidates, const SearchTask& task,
                                const SearchConfig& cfg, const SearchObserver& observer) {
  cfg.validate();
  check_candidates(candidates);
  SearchResult result;
  if (candidates.size() == 1) {
    result.selected = candidates.front();
    result.spec = ArchitectureSpec::homogeneous(candidates.front(), cfg.heads);
    return result;
  }
  ArchitectureSpec blocks;
  blocks.layers.emplace_back();
  for (auto k : candidates) blocks.layers[0].push_back({k, cfg.heads});
  auto supernet = build_supernet(blocks, task.model, cfg);

  Trainer<float> trainer(supernet, task.train, cfg.train, cfg.seed);
  const double loss = trainer.run(cfg.pretrain_steps);
  emit(observer, {"pretrain", 0, 0, std::nullopt, nullptr, loss, cfg.pretrain_steps});

  result.passes.push_back(score_blocks(supernet, 0, task.val));
  emit(observer, {"score", 1, 0, std::nullopt, &result.passes.back(), 0.0, 0});
  const auto& best = result.passes.back().best();
  result.selected = best.kind;
  result.low_confidence = best.score < cfg.low_confidence_threshold;
  result.spec = ArchitectureSpec::homogeneous(best.kind, cfg.heads);
  return result;
}

// ---- pruning -----------------------------------------------------------------

namespace {

// Masks the worst block of `layer` for good (block indices stay stable, so
// logs refer to initialization order) and fine-tunes.
void prune_once(Model<float>& supernet, std::size_t layer, std::size_t step, const SearchTask& task,
                const SearchConfig& cfg, Trainer<float>& trainer, SearchResult& result,
                const SearchObserver& observer) {
  result.passes.push_back(score_blocks(supernet, layer, task.val));
  const ScoreTable& table = result.passes.back();
  const ScoreEntry worst = table.worst();
  supernet.layer(layer).mask_block(worst.block);
  result.removals.push_back(worst);
  emit(observer, {"prune", step, layer, worst, &table, 0.0, 0});
  const double loss = trainer.run(cfg.finetune_steps);
  emit(observer, {"finetune", step, layer, std::nullopt, nullptr, loss, cfg.finetune_steps});
}

}  // namespace

SearchResult prune_search(std::span<const AttentionKind> candidates, const SearchTask& task,
                          const SearchConfig& cfg, const SearchObserver& observer) {
  cfg.validate();
  check_candidates(candidates);
  const std::size_t initial = candidates.size() * cfg.heads;
  if (cfg.heads >= initial) {
    throw UsageError("prune_search: H = " + std::to_string(cfg.heads) +
                     " leaves nothing to prune from " + std::to_string(initial) + " blocks");
  }
  ArchitectureSpec blocks;
  blocks.layers.emplace_back();
  for (auto k : candidates)
    for (std::size_t h = 0; h < cfg.heads; ++h) blocks.layers[0].push_back({k, 1});
  auto supernet = build_supernet(blocks, task.model, cfg);

  Trainer<float> trainer(supernet, task.train, cfg.train, cfg.seed);
  const double loss = trainer.run(cfg.pretrain_steps);
  emit(observer, {"pretrain", 0, 0, std::nullopt, nullptr, loss, cfg.pretrain_steps});

  SearchResult result;
  std::size_t step = 0;
  while (supernet.layer(0).active_count() > cfg.heads) {
    prune_once(supernet, 0, ++step, task, cfg, trainer, result, observer);
  }
  result.spec = supernet.architecture();
  return result;
}

// ---- one-shot ----------------------------------------------------------------

ArchitectureSpec oneshot_top4(const ScoreTable& scores, std::size_t heads, std::size_t k) {
  if (k == 0) throw UsageError("oneshot: k must be >= 1");
  std::map<AttentionKind, double> best;
  for (const auto& e : scores.entries) {
    auto it = best.find(e.kind);
    if (it == best.end() || e.score > it->second) best[e.kind] = e.score;
  }
  if (best.size() < k) {
    throw UsageError("oneshot: need " + std::to_string(k) + " scored kinds, table has " +
                     std::to_string(best.size()));
  }
  if (heads < k) throw UsageError("oneshot: H must be at least the number of mixed kinds");
  std::vector<std::pair<AttentionKind, double>> ranked(best.begin(), best.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return kind_name(a.first) < kind_name(b.first);
  });
  ArchitectureSpec spec;
  spec.layers.emplace_back();
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t h = heads / k + (r < heads % k ? 1 : 0);
    spec.layers[0].push_back({ranked[r].first, h});
  }
  return spec.canonical();
}

// ---- layer-wise pruning ------------------------------------------------------

SearchResult layerwise_prune_search(std::span<const AttentionKind> candidates,
                                    const SearchTask& task, const SearchConfig& cfg,
                                    const SearchObserver& observer) {
  cfg.validate();
  check_candidates(candidates);
  if (cfg.sample_size == 0) throw UsageError("layerwise search: sample_size must be >= 1");
  if (cfg.sample_size > candidates.size()) {
    throw UsageError("layerwise search: sample_size exceeds the candidates per layer");
  }
  ArchitectureSpec blocks;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    LayerSpec layer;
    for (auto k : candidates) layer.push_back({k, cfg.heads});
    blocks.layers.push_back(std::move(layer));
  }
  auto supernet = build_supernet(blocks, task.model, cfg);
  for (std::size_t l = 0; l < supernet.num_layers(); ++l) supernet.layer(l).sample_size = cfg.sample_size;

  Trainer<float> trainer(supernet, task.train, cfg.train, cfg.seed);
  const double loss = trainer.run(cfg.pretrain_steps);
  emit(observer, {"pretrain", 0, 0, std::nullopt, nullptr, loss, cfg.pretrain_steps});

  SearchResult result;
  std::size_t step = 0;
  auto remaining = [&] {
    for (std::size_t l = 0; l < supernet.num_layers(); ++l)
      if (supernet.layer(l).active_count() > 1) return true;
    return false;
  };
  while (remaining()) {
    for (std::size_t l = 0; l < supernet.num_layers(); ++l) {
      if (supernet.layer(l).active_count() > 1) {
        prune_once(supernet, l, ++step, task, cfg, trainer, result, observer);
      }
    }
  }
  result.spec = supernet.architecture();
  return result;
}

}  // namespace hetnas
