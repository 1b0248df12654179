// Copyright 2026 The RandEnc Authors.
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

#include "randenc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "randenc/rng.hpp"

namespace randenc {
namespace fs = std::filesystem;

SweepCurve dim_sweep(const EncoderConfig& config, std::span<const Index> dims,
                     const EmbeddingTable& table, const TaskDataset& dataset,
                     const Protocol& protocol) {
  if (dims.empty()) throw Error("dim_sweep: no dimensions given");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1) throw DimensionError("dim_sweep: dimensions must be positive");
    if (i > 0 && dims[i] <= dims[i - 1])
      throw Error("dim_sweep: dimensions must be strictly increasing");
    if ((config.family == Family::randlstm || config.family == Family::esn) && dims[i] % 2 != 0)
      throw DimensionError("dim_sweep: recurrent families need even dimensions");
  }
  SweepCurve curve;
  for (Index d : dims) {
    EncoderConfig c = config;
    c.dim = d;
    curve.dims.push_back(d);
    curve.results.push_back(evaluate_task(c, table, dataset, protocol));
  }
  return curve;
}

void write_sweep_csv(const SweepCurve& curve, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "dim,seed,metric\n";
  out.precision(17);
  for (std::size_t i = 0; i < curve.dims.size(); ++i) {
    const EvalResult& r = curve.results[i];
    for (std::size_t s = 0; s < r.per_seed.size(); ++s)
      out << curve.dims[i] << ',' << r.seeds[s] << ',' << r.per_seed[s] << '\n';
  }
}

Matrix projection_matrix(Index source_dim, Index target_dim, InitScheme scheme,
                         std::uint64_t seed) {
  if (target_dim < 1) throw DimensionError("projection target_dim must be positive");
  return init_matrix(target_dim, source_dim, scheme, SeededRng(seed, "project/W"));
}

Matrix project_rows(const Matrix& vectors, const Matrix& projection) {
  if (vectors.cols() != projection.cols())
    throw DimensionError("project_rows: vector dim " + std::to_string(vectors.cols()) +
                         " does not match projection input dim " +
                         std::to_string(projection.cols()));
  return vectors * projection.transpose();
}

Matrix random_project_vectors(const Matrix& vectors, Index target_dim, InitScheme scheme,
                              std::uint64_t seed) {
  if (vectors.cols() < 1) throw DimensionError("random_project_vectors: empty vectors");
  return project_rows(vectors, projection_matrix(vectors.cols(), target_dim, scheme, seed));
}

namespace {

double entry_variance(InitScheme scheme, Index source_dim, Index target_dim) {
  const double in = static_cast<double>(source_dim), out = static_cast<double>(target_dim);
  switch (scheme) {
    case InitScheme::heuristic: return 1.0 / (3.0 * in);
    case InitScheme::uniform01: return 0.01 / 3.0;
    case InitScheme::normal: return 1.0;
    case InitScheme::he: return 2.0 / in;
    case InitScheme::xavier: return 2.0 / (in + out);
    case InitScheme::orthogonal: return target_dim <= source_dim ? 1.0 / in : 1.0 / out;
  }
  return 1.0;
}

}  // namespace

JlStats jl_distortion(const Matrix& vectors, Index target_dim, std::uint64_t seed, double epsilon,
                      InitScheme scheme) {
  if (vectors.rows() < 2) throw Error("jl_distortion: needs at least two vectors");
  const Matrix projected = random_project_vectors(vectors, target_dim, scheme, seed);
  const Vector norms = vectors.rowwise().norm();
  const Vector pnorms = projected.rowwise().norm();
  if ((norms.array() == 0.0).any() || (pnorms.array() == 0.0).any())
    throw NumericalError("jl_distortion: zero vector has no cosine");
  const Matrix gram = vectors * vectors.transpose();
  const Matrix pgram = projected * projected.transpose();

  JlStats s;
  s.epsilon = epsilon;
  double total = 0.0;
  std::size_t within = 0;
  for (Index i = 0; i < vectors.rows(); ++i) {
    for (Index j = i + 1; j < vectors.rows(); ++j) {
      const double before = gram(i, j) / (norms(i) * norms(j));
      const double after = pgram(i, j) / (pnorms(i) * pnorms(j));
      const double d = std::abs(after - before);
      s.max_abs = std::max(s.max_abs, d);
      total += d;
      within += d <= epsilon;
      ++s.pairs;
    }
  }
  s.mean_abs = total / static_cast<double>(s.pairs);
  s.fraction_within = static_cast<double>(within) / static_cast<double>(s.pairs);
  const double scale =
      1.0 / std::sqrt(static_cast<double>(target_dim) *
                      entry_variance(scheme, vectors.cols(), target_dim));
  s.mean_norm_ratio = (pnorms.array() * scale / norms.array()).mean();
  return s;
}

SparsedReport sparsed_stats(const Encoder& encoder, const EmbeddingTable& table,
                            const TaskDataset& ds, Index batch_size, SortMode sort_mode) {
  if (encoder.pooling().kind != PoolKind::max)
    throw Error("sparsed_stats: sparsing is defined for max pooling only");
  std::vector<TokenMatrix> sentences;
  sentences.reserve(ds.examples.size());
  for (const auto& ex : ds.examples) sentences.push_back(embed_sentence(table, ex.text));
  const Matrix exact = encode_batch(encoder, sentences, batch_size, sort_mode, PadMode::length);
  const Matrix padded = encode_batch(encoder, sentences, batch_size, sort_mode, PadMode::padded);

  SparsedReport r;
  r.total = sentences.size();
  r.batch_size = batch_size;
  r.sort_mode = sort_mode;
  r.classes = ds.labels;
  r.per_class_total.assign(r.classes.size(), 0);
  r.per_class_sparsed.assign(r.classes.size(), 0);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const bool differs = (exact.row(static_cast<Index>(i)).array() !=
                          padded.row(static_cast<Index>(i)).array()).any();
    r.sparsed += differs;
    if (!ds.is_relatedness()) {
      const int k = ds.label_index(ds.examples[i].label);
      if (k >= 0) {
        ++r.per_class_total[static_cast<std::size_t>(k)];
        r.per_class_sparsed[static_cast<std::size_t>(k)] += differs;
      }
    }
  }
  return r;
}

nlohmann::ordered_json sparsed_to_json(const SparsedReport& r) {
  nlohmann::ordered_json j;
  j["total"] = r.total;
  j["sparsed"] = r.sparsed;
  j["fraction_sparsed"] = r.total ? static_cast<double>(r.sparsed) / static_cast<double>(r.total) : 0.0;
  j["batch_size"] = r.batch_size;
  j["sort_mode"] = std::string(to_string(r.sort_mode));
  nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < r.classes.size(); ++k) {
    per_class.push_back({{"class", r.classes[k]},
                         {"total", r.per_class_total[k]},
                         {"sparsed", r.per_class_sparsed[k]}});
  }
  j["per_class"] = per_class;
  return j;
}

std::string_view to_string(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::word_content: return "word_content";
    case SyntheticKind::xor_words: return "xor_words";
    case SyntheticKind::length_bins: return "length_bins";
    case SyntheticKind::bigram_shift: return "bigram_shift";
  }
  return "word_content";
}

SyntheticKind parse_synthetic_kind(std::string_view s) {
  for (SyntheticKind k : {SyntheticKind::word_content, SyntheticKind::xor_words,
                          SyntheticKind::length_bins, SyntheticKind::bigram_shift})
    if (to_string(k) == s) return k;
  throw Error("unknown synthetic task kind: " + std::string(s));
}

SyntheticParams default_params(SyntheticKind kind) {
  SyntheticParams p;
  switch (kind) {
    case SyntheticKind::word_content:
      p.vocab_size = 200;
      p.marked = 32;
      p.min_len = 6;
      p.max_len = 12;
      p.examples = 1200;
      break;
    case SyntheticKind::xor_words:
      p.vocab_size = 200;
      p.min_len = 8;
      p.max_len = 8;
      p.examples = 2400;
      break;
    case SyntheticKind::length_bins:
      p.vocab_size = 200;
      p.min_len = 1;
      p.max_len = 12;
      p.examples = 1200;
      break;
    case SyntheticKind::bigram_shift:
      p.vocab_size = 8;
      p.min_len = 6;
      p.max_len = 10;
      p.examples = 600;
      break;
  }
  return p;
}

int length_bin(Index length, Index min_len, Index max_len, int bins) {
  if (bins < 1 || max_len < min_len || length < min_len || length > max_len)
    throw Error("length_bin: length outside the configured range");
  const Index span = max_len - min_len + 1;
  const Index width = (span + bins - 1) / bins;
  return static_cast<int>((length - min_len) / width);
}

namespace {

std::vector<std::string> numbered(const std::string& prefix, Index count) {
  std::vector<std::string> out;
  for (Index i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

void check_params(SyntheticKind kind, const SyntheticParams& p) {
  if (p.vocab_size < 2 || p.embed_dim < 1 || p.min_len < 1 || p.max_len < p.min_len ||
      p.examples < 4)
    throw Error("gen_synthetic: invalid vocabulary, length or size parameters");
  if (!(p.train_fraction > 0.0 && p.dev_fraction > 0.0 &&
        p.train_fraction + p.dev_fraction < 1.0))
    throw Error("gen_synthetic: split fractions must be positive and sum below 1");
  if (kind == SyntheticKind::word_content && p.marked < 2)
    throw Error("gen_synthetic: word_content needs at least two marked tokens");
  if (kind == SyntheticKind::xor_words) {
    if (p.min_len < 2) throw Error("gen_synthetic: xor_words needs sentences of length >= 2");
    if (p.balance.size() != 4 ||
        std::any_of(p.balance.begin(), p.balance.end(), [](double w) { return !(w >= 0.0); }) ||
        std::accumulate(p.balance.begin(), p.balance.end(), 0.0) <= 0.0)
      throw Error("gen_synthetic: xor_words balance needs four non-negative weights");
  }
  if (kind == SyntheticKind::length_bins && (p.bins < 2 || p.max_len - p.min_len + 1 < p.bins))
    throw Error("gen_synthetic: length_bins needs at least two bins and one length per bin");
  if (kind == SyntheticKind::bigram_shift && (p.min_len < 2 || p.vocab_size < 2))
    throw Error("gen_synthetic: bigram_shift needs sentences of length >= 2");
}

// Split tag of item i given a seeded permutation position.
std::vector<Split> assign_splits(std::size_t items, const SyntheticParams& p, RandomStream& rng) {
  std::vector<std::size_t> perm(items);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = items; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  const auto n_train = static_cast<std::size_t>(std::llround(p.train_fraction * static_cast<double>(items)));
  const auto n_dev = static_cast<std::size_t>(std::llround(p.dev_fraction * static_cast<double>(items)));
  std::vector<Split> out(items, Split::test);
  for (std::size_t k = 0; k < items; ++k) {
    if (k < n_train)
      out[perm[k]] = Split::train;
    else if (k < n_train + n_dev)
      out[perm[k]] = Split::dev;
  }
  return out;
}

}  // namespace

SyntheticTask gen_synthetic(SyntheticKind kind, const SyntheticParams& p, std::uint64_t seed) {
  check_params(kind, p);
  RandomStream rng = SeededRng(seed, "synthetic").child(to_string(kind)).stream();
  const std::vector<std::string> fillers = numbered("w", p.vocab_size);
  std::vector<std::string> vocab = fillers;
  TaskDataset ds;
  ds.name = std::string(to_string(kind));
  ds.kind = TaskKind::probing;

  auto length = [&] { return p.min_len + static_cast<Index>(rng.below(static_cast<std::uint64_t>(p.max_len - p.min_len + 1))); };
  auto filler_sentence = [&](Index n) {
    std::vector<std::string> s;
    for (Index i = 0; i < n; ++i) s.push_back(fillers[rng.below(fillers.size())]);
    return s;
  };

  switch (kind) {
    case SyntheticKind::word_content: {
      const auto marked = numbered("m", p.marked);
      vocab.insert(vocab.end(), marked.begin(), marked.end());
      for (std::size_t e = 0; e < p.examples; ++e) {
        Example ex;
        ex.text = filler_sentence(length());
        const std::size_t k = rng.below(marked.size());
        ex.text[rng.below(ex.text.size())] = marked[k];
        ex.label = marked[k];
        ds.examples.push_back(std::move(ex));
      }
      break;
    }
    case SyntheticKind::xor_words: {
      vocab.push_back("a");
      vocab.push_back("b");
      const double total = std::accumulate(p.balance.begin(), p.balance.end(), 0.0);
      for (std::size_t e = 0; e < p.examples; ++e) {
        double u = rng.uniform01() * total;
        int combo = 0;
        while (combo < 3 && u >= p.balance[static_cast<std::size_t>(combo)]) {
          u -= p.balance[static_cast<std::size_t>(combo)];
          ++combo;
        }
        const bool has_a = combo == 1 || combo == 3;
        const bool has_b = combo == 2 || combo == 3;
        Example ex;
        ex.text = filler_sentence(length());
        const std::size_t pa = rng.below(ex.text.size());
        std::size_t pb = rng.below(ex.text.size() - 1);
        if (pb >= pa) ++pb;
        if (has_a) ex.text[pa] = "a";
        if (has_b) ex.text[pb] = "b";
        ex.label = (has_a != has_b) ? "1" : "0";
        ds.examples.push_back(std::move(ex));
      }
      break;
    }
    case SyntheticKind::length_bins: {
      for (std::size_t e = 0; e < p.examples; ++e) {
        Example ex;
        ex.text = filler_sentence(length());
        ex.label = std::to_string(
            length_bin(static_cast<Index>(ex.text.size()), p.min_len, p.max_len, p.bins));
        ds.examples.push_back(std::move(ex));
      }
      break;
    }
    case SyntheticKind::bigram_shift: {
      // Canonical sentences alternate between two token classes, so a swap
      // of two adjacent tokens always creates same-class neighbours.
      const Index half = std::max<Index>(1, p.vocab_size / 2);
      const auto xs = numbered("x", half);
      const auto ys = numbered("y", half);
      vocab = xs;
      vocab.insert(vocab.end(), ys.begin(), ys.end());
      for (std::size_t e = 0; e < p.examples; ++e) {
        const Index n = length();
        bool x_turn = rng.below(2) == 0;
        Example neg;
        for (Index i = 0; i < n; ++i, x_turn = !x_turn)
          neg.text.push_back(x_turn ? xs[rng.below(xs.size())] : ys[rng.below(ys.size())]);
        neg.label = "0";
        Example pos = neg;
        const std::size_t at = rng.below(static_cast<std::uint64_t>(n - 1));
        std::swap(pos.text[at], pos.text[at + 1]);
        pos.label = "1";
        ds.examples.push_back(std::move(neg));
        ds.examples.push_back(std::move(pos));
      }
      break;
    }
  }

  // Bigram-shift pairs share a split so both members land in the same set.
  const std::size_t group = kind == SyntheticKind::bigram_shift ? 2 : 1;
  const auto splits = assign_splits(ds.examples.size() / group, p, rng);
  for (std::size_t i = 0; i < ds.examples.size(); ++i) ds.examples[i].split = splits[i / group];
  ds.validate();

  EmbeddingTable table = generate_random_table(vocab, p.embed_dim, p.scheme, seed);
  return {std::move(ds), std::move(table)};
}

SyntheticTask padding_corpus() {
  RowMatrix m(3, 2);
  m << -1, -1,  //
      1, 1,     //
      1, -1;
  EmbeddingTable table({"neg", "pos", "mix"}, m);
  TaskDataset ds;
  ds.name = "padding_corpus";
  ds.kind = TaskKind::classification_single;
  auto add = [&](std::vector<std::string> text, std::string label) {
    Example ex;
    ex.text = std::move(text);
    ex.label = std::move(label);
    ds.examples.push_back(std::move(ex));
  };
  add({"neg", "neg"}, "a");
  add({"pos", "mix", "pos", "mix", "pos"}, "b");
  add({"neg"}, "a");
  add({"mix", "neg", "mix"}, "b");
  ds.validate();
  return {std::move(ds), std::move(table)};
}

}  // namespace randenc
