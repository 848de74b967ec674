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

#include "hetnas/tasks.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hetnas/error.hpp"

namespace hetnas {

namespace {

// Probabilities are compared against an integer draw so generation never
// touches floating point.
constexpr std::uint64_t kProbScale = 1000000;

bool chance(Rng& rng, double p) {
  const auto threshold = static_cast<std::uint64_t>(std::llround(p * kProbScale));
  return rng.uniform_int(kProbScale) < threshold;
}

std::size_t uniform_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.uniform_int(hi - lo + 1));
}

constexpr std::uint64_t kMotifStream = 0;
constexpr std::uint64_t kSplitStreams[3] = {1, 2, 3};

std::int32_t symbol(std::size_t i) { return kFirstTaskToken + static_cast<std::int32_t>(i); }

}  // namespace

std::string_view task_name(TaskName name) {
  switch (name) {
    case TaskName::kListops: return "listops";
    case TaskName::kBytecls: return "bytecls";
    case TaskName::kMatch: return "match";
  }
  return "?";
}

TaskName parse_task_name(std::string_view name) {
  if (name == "listops") return TaskName::kListops;
  if (name == "bytecls") return TaskName::kBytecls;
  if (name == "match") return TaskName::kMatch;
  throw UsageError("unknown task '" + std::string(name) + "' (expected listops, bytecls or match)");
}

void TaskSpec::validate() const {
  if (max_seq_len < 1) throw UsageError("task: max_seq_len must be >= 1");
  if (train_size == 0 || val_size == 0 || test_size == 0) {
    throw UsageError("task: train, val and test sizes must be >= 1");
  }
  switch (name) {
    case TaskName::kListops:
      if (max_depth < 1) throw UsageError("task: listops max_depth must be >= 1");
      if (max_args < 2) throw UsageError("task: listops max_args must be >= 2");
      if (max_seq_len < 5) throw UsageError("task: listops needs max_seq_len >= 5");
      break;
    case TaskName::kBytecls: {
      if (alphabet < 2) throw UsageError("task: bytecls alphabet must be >= 2");
      if (motif_len + 1 > alphabet) throw UsageError("task: motif_len must be below the alphabet size");
      if (noise < 0.0 || noise > 1.0) throw UsageError("task: bytecls noise must be in [0, 1]");
      if (noise > 0.0 && motif_len + 1 == alphabet) {
        throw UsageError("task: no symbols left for background noise");
      }
      if (layout == MotifLayout::kLocal && motif_len > max_seq_len) {
        throw UsageError("task: motif longer than the sequence");
      }
      if (motif_region > 0 &&
          (layout != MotifLayout::kLocal || motif_region < motif_len || motif_len == 0 ||
           max_seq_len < motif_region + motif_len)) {
        throw UsageError("task: motif_region needs the local layout, room for the motif and a decoy");
      }
      if (layout == MotifLayout::kSplit && (motif_len + 1) / 2 > max_seq_len / 4) {
        throw UsageError("task: split motif halves must fit in a quarter of the sequence");
      }
      break;
    }
    case TaskName::kMatch:
      if (alphabet < 2) throw UsageError("task: match alphabet must be >= 2");
      if (corruption < 0.0 || corruption >= 1.0) throw UsageError("task: match corruption must be in [0, 1)");
      if (max_seq_len < 3) throw UsageError("task: match needs max_seq_len >= 3");
      if (disjoint_negatives && alphabet < 4) throw UsageError("task: disjoint negatives need alphabet >= 4");
      break;
  }
}

std::size_t TaskSpec::vocab_size() const {
  if (name == TaskName::kListops) return listops::kVocab;
  return static_cast<std::size_t>(kFirstTaskToken) + alphabet;
}

std::size_t TaskSpec::num_classes() const { return name == TaskName::kListops ? 10 : 2; }

// ---- listops ---------------------------------------------------------------

namespace listops {

std::vector<std::int32_t> tokenize(std::string_view text) {
  std::vector<std::int32_t> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == ']') {
      out.push_back(kClose);
      ++i;
    } else if (c >= '0' && c <= '9') {
      out.push_back(kDigit0 + (c - '0'));
      ++i;
    } else if (c == '[') {
      std::size_t j = i + 1;
      while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
      const auto op = text.substr(i + 1, j - i - 1);
      if (op == "MAX") out.push_back(kMax);
      else if (op == "MIN") out.push_back(kMin);
      else if (op == "MED") out.push_back(kMed);
      else if (op == "SM") out.push_back(kSumMod);
      else throw UsageError("listops: unknown operator '" + std::string(op) + "'");
      i = j;
    } else {
      throw UsageError(std::string("listops: unexpected character '") + c + "'");
    }
  }
  return out;
}

std::string detokenize(std::span<const std::int32_t> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto t = tokens[i];
    if (t == kClose) {
      out += ']';
      continue;
    }
    if (!out.empty() && out.back() != '[') out += ' ';
    if (t >= kDigit0 && t < kDigit0 + 10) out += static_cast<char>('0' + (t - kDigit0));
    else if (t == kMax) out += "[MAX";
    else if (t == kMin) out += "[MIN";
    else if (t == kMed) out += "[MED";
    else if (t == kSumMod) out += "[SM";
    else throw UsageError("listops: token " + std::to_string(t) + " is not a listops token");
  }
  return out;
}

namespace {

std::int32_t eval_at(std::span<const std::int32_t> t, std::size_t& pos) {
  if (pos >= t.size()) throw UsageError("listops: truncated expression");
  const auto tok = t[pos++];
  if (tok >= kDigit0 && tok < kDigit0 + 10) return tok - kDigit0;
  if (tok < kMax || tok > kSumMod) throw UsageError("listops: malformed expression");
  std::vector<std::int32_t> args;
  while (pos < t.size() && t[pos] != kClose) args.push_back(eval_at(t, pos));
  if (pos >= t.size()) throw UsageError("listops: missing ']'");
  ++pos;
  if (args.empty()) throw UsageError("listops: operator without arguments");
  switch (tok) {
    case kMax: return *std::max_element(args.begin(), args.end());
    case kMin: return *std::min_element(args.begin(), args.end());
    case kMed: {
      std::sort(args.begin(), args.end());
      const std::size_t n = args.size();
      return n % 2 ? args[n / 2] : (args[n / 2 - 1] + args[n / 2]) / 2;
    }
    default: return std::accumulate(args.begin(), args.end(), 0) % 10;
  }
}

void gen_expr(Rng& rng, std::size_t depth, const TaskSpec& spec, std::vector<std::int32_t>& out) {
  out.push_back(kMax + static_cast<std::int32_t>(rng.uniform_int(4)));
  const std::size_t nargs = uniform_between(rng, 2, spec.max_args);
  for (std::size_t a = 0; a < nargs; ++a) {
    // Nest with probability 1/4 while depth allows.
    if (depth + 1 < spec.max_depth && rng.uniform_int(4) == 0) {
      gen_expr(rng, depth + 1, spec, out);
    } else {
      out.push_back(kDigit0 + static_cast<std::int32_t>(rng.uniform_int(10)));
    }
  }
  out.push_back(kClose);
}

}  // namespace

std::int32_t evaluate(std::span<const std::int32_t> tokens) {
  std::size_t pos = 0;
  const auto v = eval_at(tokens, pos);
  if (pos != tokens.size()) throw UsageError("listops: trailing tokens after expression");
  return v;
}

}  // namespace listops

namespace {

constexpr std::size_t kMaxRetries = 100000;

std::vector<Example> listops_split(const TaskSpec& spec, Rng rng, std::size_t n) {
  const std::size_t classes = 10;
  const std::size_t quota = (n + classes - 1) / classes;
  std::vector<std::size_t> count(classes, 0);
  std::vector<Example> out;
  out.reserve(n);
  std::size_t failures = 0;
  while (out.size() < n) {
    std::vector<std::int32_t> tokens;
    listops::gen_expr(rng, 0, spec, tokens);
    const auto label = listops::evaluate(tokens);
    if (tokens.size() > spec.max_seq_len || count[static_cast<std::size_t>(label)] >= quota) {
      if (++failures > kMaxRetries * (n + 1)) {
        throw RuntimeError("listops: could not generate expressions within max_seq_len");
      }
      continue;
    }
    ++count[static_cast<std::size_t>(label)];
    out.push_back({std::move(tokens), label, -1});
  }
  return out;
}

}  // namespace

Dataset gen_listops(const TaskSpec& spec) {
  spec.validate();
  if (spec.name != TaskName::kListops) throw UsageError("gen_listops: spec is not a listops task");
  // The shortest expression "[OP d d]" is four tokens.
  if (spec.max_seq_len < 4) throw UsageError("listops: max_seq_len too short");
  Rng root(spec.seed);
  Dataset d{spec, {}, {}, {}};
  d.train = listops_split(spec, root.split(kSplitStreams[0]), spec.train_size);
  d.val = listops_split(spec, root.split(kSplitStreams[1]), spec.val_size);
  d.test = listops_split(spec, root.split(kSplitStreams[2]), spec.test_size);
  return d;
}

// ---- bytecls ---------------------------------------------------------------
//
// Symbol 0 of the alphabet is the filler; the motif uses distinct symbols
// from 1..alphabet-1 and background noise never uses motif symbols, so motif
// symbols appear only where the generator placed them. Negatives carry the
// motif with one position replaced by a background symbol.

std::vector<std::int32_t> bytecls_motif(const TaskSpec& spec) {
  Rng rng = Rng(spec.seed).split(kMotifStream);
  std::vector<std::int32_t> pool;
  for (std::size_t i = 1; i < spec.alphabet; ++i) pool.push_back(symbol(i));
  std::vector<std::int32_t> motif;
  for (std::size_t i = 0; i < spec.motif_len && !pool.empty(); ++i) {
    const std::size_t j = rng.uniform_int(pool.size());
    motif.push_back(pool[j]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
  }
  return motif;
}

namespace {

// One motif position replaced by a background symbol.
std::vector<std::int32_t> corrupt_motif(const std::vector<std::int32_t>& motif,
                                        const std::vector<std::int32_t>& background, Rng& rng) {
  if (motif.empty()) return {};
  std::vector<std::int32_t> out = motif;
  out[rng.uniform_int(out.size())] = background[rng.uniform_int(background.size())];
  return out;
}

std::vector<Example> bytecls_split(const TaskSpec& spec, const std::vector<std::int32_t>& motif,
                                   Rng rng, std::size_t n) {
  std::vector<std::int32_t> noise_symbols;
  for (std::size_t i = 1; i < spec.alphabet; ++i) {
    if (std::find(motif.begin(), motif.end(), symbol(i)) == motif.end()) noise_symbols.push_back(symbol(i));
  }
  // Corruption draws from the noise symbols, or the filler when there are none.
  const std::vector<std::int32_t> background =
      noise_symbols.empty() ? std::vector<std::int32_t>{symbol(0)} : noise_symbols;
  const std::size_t len = spec.max_seq_len;
  std::vector<Example> out;
  out.reserve(n);
  for (std::size_t e = 0; e < n; ++e) {
    Example ex;
    ex.label = static_cast<std::int32_t>(e % 2);
    ex.tokens.resize(len);
    for (auto& t : ex.tokens) {
      t = chance(rng, spec.noise)
              ? noise_symbols[static_cast<std::size_t>(rng.uniform_int(noise_symbols.size()))]
              : symbol(0);
    }
    const auto placed = ex.label == 1 ? motif : corrupt_motif(motif, background, rng);
    if (!placed.empty()) {
      if (spec.layout == MotifLayout::kLocal) {
        const std::size_t k = placed.size();
        const std::size_t last = spec.motif_region > 0 ? spec.motif_region - k : len - k;
        const std::size_t at = spec.motif_at_start ? 0 : uniform_between(rng, 0, last);
        std::copy(placed.begin(), placed.end(), ex.tokens.begin() + static_cast<std::ptrdiff_t>(at));
        if (spec.motif_region > 0) {
          const auto decoy = rng.uniform_int(2) ? motif : corrupt_motif(motif, background, rng);
          const std::size_t d = uniform_between(rng, spec.motif_region, len - k);
          std::copy(decoy.begin(), decoy.end(), ex.tokens.begin() + static_cast<std::ptrdiff_t>(d));
        }
      } else {
        const std::size_t h1 = placed.size() / 2, h2 = placed.size() - h1;
        const std::size_t quarter = len / 4;
        const std::size_t a = spec.motif_at_start ? 0 : uniform_between(rng, 0, quarter - h1);
        const std::size_t b = uniform_between(rng, len - quarter, len - h2);
        std::copy(placed.begin(), placed.begin() + static_cast<std::ptrdiff_t>(h1),
                  ex.tokens.begin() + static_cast<std::ptrdiff_t>(a));
        std::copy(placed.begin() + static_cast<std::ptrdiff_t>(h1), placed.end(),
                  ex.tokens.begin() + static_cast<std::ptrdiff_t>(b));
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

Dataset gen_bytecls(const TaskSpec& spec) {
  spec.validate();
  if (spec.name != TaskName::kBytecls) throw UsageError("gen_bytecls: spec is not a bytecls task");
  const auto motif = bytecls_motif(spec);
  Rng root(spec.seed);
  Dataset d{spec, {}, {}, {}};
  d.train = bytecls_split(spec, motif, root.split(kSplitStreams[0]), spec.train_size);
  d.val = bytecls_split(spec, motif, root.split(kSplitStreams[1]), spec.val_size);
  d.test = bytecls_split(spec, motif, root.split(kSplitStreams[2]), spec.test_size);
  return d;
}

// ---- match -----------------------------------------------------------------
//
// "A SEP B". Positives: B is A with each token dropped with probability
// `corruption` (at least one kept). Negatives: B is an independent draw.

namespace {

std::vector<std::int32_t> random_doc(Rng& rng, std::size_t len, std::size_t lo, std::size_t hi) {
  std::vector<std::int32_t> doc(len);
  for (auto& t : doc) t = symbol(uniform_between(rng, lo, hi));
  return doc;
}

std::vector<Example> match_split(const TaskSpec& spec, Rng rng, std::size_t n) {
  const std::size_t max_doc = (spec.max_seq_len - 1) / 2;
  const std::size_t min_doc = std::max<std::size_t>(1, max_doc / 2);
  const std::size_t half = spec.alphabet / 2;
  const std::size_t pos_lo = 0, pos_hi = spec.disjoint_negatives ? half - 1 : spec.alphabet - 1;
  const std::size_t neg_lo = spec.disjoint_negatives ? half : 0, neg_hi = spec.alphabet - 1;
  std::vector<Example> out;
  out.reserve(n);
  for (std::size_t e = 0; e < n; ++e) {
    Example ex;
    ex.label = static_cast<std::int32_t>(e % 2);
    const auto a = random_doc(rng, uniform_between(rng, min_doc, max_doc), pos_lo, pos_hi);
    std::vector<std::int32_t> b;
    if (ex.label == 1) {
      for (auto t : a)
        if (!chance(rng, spec.corruption)) b.push_back(t);
      if (b.empty()) b.push_back(a.front());
    } else {
      b = random_doc(rng, uniform_between(rng, min_doc, max_doc), neg_lo, neg_hi);
    }
    ex.tokens = a;
    ex.segment = static_cast<std::int32_t>(a.size());
    ex.tokens.push_back(kSepId);
    ex.tokens.insert(ex.tokens.end(), b.begin(), b.end());
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

Dataset gen_match(const TaskSpec& spec) {
  spec.validate();
  if (spec.name != TaskName::kMatch) throw UsageError("gen_match: spec is not a match task");
  Rng root(spec.seed);
  Dataset d{spec, {}, {}, {}};
  d.train = match_split(spec, root.split(kSplitStreams[0]), spec.train_size);
  d.val = match_split(spec, root.split(kSplitStreams[1]), spec.val_size);
  d.test = match_split(spec, root.split(kSplitStreams[2]), spec.test_size);
  return d;
}

Dataset generate(const TaskSpec& spec) {
  switch (spec.name) {
    case TaskName::kListops: return gen_listops(spec);
    case TaskName::kBytecls: return gen_bytecls(spec);
    case TaskName::kMatch: return gen_match(spec);
  }
  throw UsageError("unknown task");
}

// ---- batching --------------------------------------------------------------

TokenBatch make_batch(std::span<const Example* const> examples, std::int32_t pad_id) {
  if (examples.empty()) throw UsageError("make_batch: no examples");
  TokenBatch b;
  b.rows = examples.size();
  for (const auto* ex : examples) {
    if (ex->tokens.empty()) throw UsageError("make_batch: empty example");
    b.width = std::max(b.width, ex->tokens.size());
  }
  b.tokens.assign(b.rows * b.width, pad_id);
  for (std::size_t r = 0; r < b.rows; ++r) {
    const auto& t = examples[r]->tokens;
    std::copy(t.begin(), t.end(), b.tokens.begin() + static_cast<std::ptrdiff_t>(r * b.width));
    b.lengths.push_back(t.size());
    b.labels.push_back(examples[r]->label);
  }
  return b;
}

std::vector<TokenBatch> make_batches(std::span<const Example> examples, std::size_t batch_size,
                                     std::int32_t pad_id, Rng* shuffle) {
  if (batch_size == 0) throw UsageError("make_batches: batch_size must be >= 1");
  std::vector<const Example*> order;
  order.reserve(examples.size());
  for (const auto& ex : examples) order.push_back(&ex);
  if (shuffle) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle->uniform_int(i)]);
    }
  }
  std::vector<TokenBatch> out;
  for (std::size_t i = 0; i < order.size(); i += batch_size) {
    const std::size_t n = std::min(batch_size, order.size() - i);
    out.push_back(make_batch(std::span<const Example* const>(order.data() + i, n), pad_id));
  }
  return out;
}

// ---- text export -----------------------------------------------------------

void export_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write dataset file " + path);
  out << "# hetnas-dataset 1 task=" << task_name(data.spec.name) << "\n";
  auto dump = [&](const char* split, const std::vector<Example>& xs) {
    for (const auto& ex : xs) {
      out << split << '\t' << ex.label << '\t' << ex.segment << '\t';
      for (std::size_t i = 0; i < ex.tokens.size(); ++i) out << (i ? " " : "") << ex.tokens[i];
      out << '\n';
    }
  };
  dump("train", data.train);
  dump("val", data.val);
  dump("test", data.test);
  if (!out) throw RuntimeError("failed writing dataset file " + path);
}

Dataset import_dataset(const std::string& path, const TaskSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read dataset file " + path);
  Dataset d{spec, {}, {}, {}};
  const auto vocab = static_cast<std::int32_t>(spec.vocab_size());
  const auto classes = static_cast<std::int32_t>(spec.num_classes());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string split, label, segment, tokens;
    if (!std::getline(fields, split, '\t') || !std::getline(fields, label, '\t') ||
        !std::getline(fields, segment, '\t') || !std::getline(fields, tokens)) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected 4 tab-separated fields");
    }
    Example ex;
    try {
      ex.label = std::stoi(label);
      ex.segment = std::stoi(segment);
    } catch (const std::exception&) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": bad label or segment");
    }
    std::istringstream ts(tokens);
    std::int32_t t;
    while (ts >> t) {
      if (t < 0 || t >= vocab) throw UsageError(path + ":" + std::to_string(lineno) + ": token out of range");
      ex.tokens.push_back(t);
    }
    if (ex.label < 0 || ex.label >= classes) throw UsageError(path + ":" + std::to_string(lineno) + ": label out of range");
    if (ex.tokens.empty() || ex.tokens.size() > spec.max_seq_len) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": sequence length out of range");
    }
    if (split == "train") d.train.push_back(std::move(ex));
    else if (split == "val") d.val.push_back(std::move(ex));
    else if (split == "test") d.test.push_back(std::move(ex));
    else throw UsageError(path + ":" + std::to_string(lineno) + ": unknown split '" + split + "'");
  }
  return d;
}

}  // namespace hetnas
