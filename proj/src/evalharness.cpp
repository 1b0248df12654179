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

#include "randenc/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "randenc/parallel.hpp"
#include "randenc/rng.hpp"

namespace randenc {

std::string_view to_string(SplitMode m) {
  return m == SplitMode::kfold ? "kfold" : "provided_splits";
}
std::string_view to_string(TuningMode m) {
  return m == TuningMode::best_overall ? "best_overall" : "per_task";
}
std::string_view to_string(MetricKind m) { return m == MetricKind::pearson ? "pearson" : "accuracy"; }

SplitMode parse_split_mode(std::string_view s) {
  if (s == "provided_splits") return SplitMode::provided_splits;
  if (s == "kfold") return SplitMode::kfold;
  throw Error("unknown split mode: " + std::string(s));
}

TuningMode parse_tuning_mode(std::string_view s) {
  if (s == "per_task") return TuningMode::per_task;
  if (s == "best_overall") return TuningMode::best_overall;
  throw Error("unknown tuning mode: " + std::string(s));
}

std::string GridPoint::describe(Family family) const {
  std::ostringstream os;
  os << "pooling=" << to_string(pooling);
  if (family == Family::borep) os << " activation=" << to_string(activation);
  if (family == Family::esn) {
    os << " rho=" << spectral_radius << " input_scale=" << input_scale << " sparsity=" << sparsity
       << " activation=" << to_string(activation);
  }
  os << " l2=" << l2;
  return os.str();
}

HyperGrid HyperGrid::defaults(Family family, bool l2_sweep) {
  const std::vector<double> l2s = l2_sweep ? std::vector<double>{0.0, 1e-4, 1e-3, 1e-2}
                                           : std::vector<double>{0.0};
  HyperGrid g;
  for (PoolKind pooling : {PoolKind::mean, PoolKind::max}) {
    GridPoint p;
    p.pooling = pooling;
    if (family == Family::borep) {
      for (Activation a : {Activation::none, Activation::relu}) {
        p.activation = a;
        for (double l2 : l2s) {
          p.l2 = l2;
          g.points.push_back(p);
        }
      }
    } else if (family == Family::esn) {
      for (double rho : {0.4, 0.6, 0.8, 1.0})
        for (double scale : {0.01, 0.05, 0.1, 0.2})
          for (double sparsity : {0.0, 0.25, 0.5, 0.75})
            for (Activation a : {Activation::relu, Activation::none})
              for (double l2 : l2s) {
                p.spectral_radius = rho;
                p.input_scale = scale;
                p.sparsity = sparsity;
                p.activation = a;
                p.l2 = l2;
                g.points.push_back(p);
              }
    } else {
      for (double l2 : l2s) {
        p.l2 = l2;
        g.points.push_back(p);
      }
    }
  }
  return g;
}

HyperGrid HyperGrid::single(const EncoderConfig& c, double l2) {
  GridPoint p;
  p.pooling = c.pooling.kind;
  p.activation = c.activation;
  p.spectral_radius = c.spectral_radius;
  p.input_scale = c.input_scale;
  p.sparsity = c.sparsity;
  p.l2 = l2;
  return HyperGrid{{p}};
}

std::vector<std::uint64_t> make_seeds(std::uint64_t base, int count) {
  if (count < 1) throw Error("seed count must be positive");
  std::vector<std::uint64_t> out;
  for (int i = 0; i < count; ++i) out.push_back(base + static_cast<std::uint64_t>(i));
  return out;
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw Error("make_folds: k must be at least 2");
  if (n < static_cast<std::size_t>(k)) throw Error("make_folds: fewer examples than folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RandomStream stream = SeededRng(seed, "kfold/assign").stream();
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[stream.below(i)]);
  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::vector<std::size_t>> folds(kk);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < kk; ++f) {
    const std::size_t size = n / kk + (f < n % kk ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

MetricKind metric_for(const TaskDataset& ds) {
  return ds.is_relatedness() ? MetricKind::pearson : MetricKind::accuracy;
}

namespace {

struct FoldSplit {
  std::vector<std::size_t> train, dev, test;
};

std::string content_key(const Example& ex) {
  std::string key;
  for (const auto& t : ex.text) key += t + ' ';
  key += '\t';
  if (ex.text2)
    for (const auto& t : *ex.text2) key += t + ' ';
  key += '\t';
  key += ex.label;
  key += '\t';
  std::ostringstream os;
  os.precision(17);
  os << ex.score;
  key += os.str();
  return key;
}

// Orders indices by example content, so that training does not depend on
// the order of examples in the file.
void canonical_order(std::vector<std::size_t>& idx, const std::vector<std::string>& keys) {
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(keys[a], a) < std::tie(keys[b], b);
  });
}

std::vector<FoldSplit> make_splits(const TaskDataset& ds, const Protocol& protocol,
                                   std::uint64_t seed, const std::vector<std::string>& keys) {
  std::vector<FoldSplit> out;
  if (protocol.split_mode == SplitMode::provided_splits) {
    if (!ds.has_splits())
      throw Error(ds.name + ": provided_splits protocol but the dataset has no split tags");
    FoldSplit s;
    for (std::size_t i = 0; i < ds.examples.size(); ++i) {
      switch (*ds.examples[i].split) {
        case Split::train: s.train.push_back(i); break;
        case Split::dev: s.dev.push_back(i); break;
        case Split::test: s.test.push_back(i); break;
      }
    }
    if (s.train.empty() || s.dev.empty() || s.test.empty())
      throw Error(ds.name + ": empty train, dev or test split");
    canonical_order(s.train, keys);
    canonical_order(s.dev, keys);
    canonical_order(s.test, keys);
    out.push_back(std::move(s));
    return out;
  }
  if (!(protocol.inner_dev_fraction > 0.0 && protocol.inner_dev_fraction < 1.0))
    throw Error("inner_dev_fraction must lie in (0, 1)");
  const auto folds = make_folds(ds.examples.size(), protocol.folds, seed);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    FoldSplit s;
    s.test = folds[f];
    std::vector<std::size_t> rest;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) rest.insert(rest.end(), folds[g].begin(), folds[g].end());
    std::sort(rest.begin(), rest.end());
    RandomStream stream = SeededRng(seed, "kfold/inner").child(std::to_string(f)).stream();
    for (std::size_t i = rest.size(); i > 1; --i) std::swap(rest[i - 1], rest[stream.below(i)]);
    auto n_dev = static_cast<std::size_t>(
        std::llround(protocol.inner_dev_fraction * static_cast<double>(rest.size())));
    n_dev = std::clamp<std::size_t>(n_dev, 1, rest.size() - 1);
    s.dev.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_dev));
    s.train.assign(rest.begin() + static_cast<std::ptrdiff_t>(n_dev), rest.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.dev.begin(), s.dev.end());
    out.push_back(std::move(s));
  }
  return out;
}

// Encoder-side settings of a grid point. Points sharing a key share one
// encoder and one pass over the sentences.
using EncoderKey = std::tuple<int, double, double, double>;

EncoderKey encoder_key(Family family, const GridPoint& p) {
  if (family == Family::esn)
    return {static_cast<int>(p.activation), p.spectral_radius, p.input_scale, p.sparsity};
  return {0, 0.0, 0.0, 0.0};
}

// Settings that change the sentence vector given the states.
using VariantKey = std::pair<int, int>;

VariantKey variant_key(Family family, const GridPoint& p) {
  return {static_cast<int>(p.pooling), family == Family::borep ? static_cast<int>(p.activation) : 0};
}

EncoderConfig apply_point(EncoderConfig c, const GridPoint& p, std::uint64_t seed) {
  c.pooling.kind = p.pooling;
  c.pooling.pad_mode = PadMode::length;
  if (c.family == Family::borep || c.family == Family::esn) c.activation = p.activation;
  if (c.family == Family::esn) {
    c.spectral_radius = p.spectral_radius;
    c.input_scale = p.input_scale;
    c.sparsity = p.sparsity;
  }
  c.seed = seed;
  return c;
}

Encoder variant_encoder(const Encoder& base, Family family, const GridPoint& p) {
  Encoder e = base.with_pooling({p.pooling, PadMode::length});
  if (family == Family::borep) {
    auto params = std::get<BorepParams>(e.params());
    params.activation = p.activation;
    return Encoder(std::move(params));
  }
  return e;
}

Examples gather_examples(const Matrix& features, const std::vector<std::size_t>& rows,
                         const TaskDataset& ds, const std::vector<int>& labels) {
  Examples out;
  out.features.resize(static_cast<Index>(rows.size()), features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.features.row(static_cast<Index>(r)) = features.row(static_cast<Index>(rows[r]));
  if (ds.is_relatedness()) {
    out.targets.resize(static_cast<Index>(rows.size()), static_cast<Index>(ds.support.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double score = ds.examples[rows[r]].score;
      out.targets.row(static_cast<Index>(r)) = score_to_distribution(score, ds.support).transpose();
      out.scores.push_back(score);
    }
  } else {
    for (std::size_t r : rows) out.labels.push_back(labels[r]);
  }
  return out;
}

}  // namespace

GridScores score_grid(const EncoderConfig& config, const EmbeddingTable& table,
                      const TaskDataset& ds, const Protocol& protocol) {
  if (protocol.seeds.empty()) throw Error("protocol needs at least one seed");
  if (config.input_dim != table.dim())
    throw DimensionError("encoder input_dim " + std::to_string(config.input_dim) +
                         " does not match embedding dim " + std::to_string(table.dim()));
  GridScores out;
  out.grid = protocol.grid ? *protocol.grid : HyperGrid::defaults(config.family, protocol.l2_sweep);
  if (out.grid.points.empty()) throw Error("hyperparameter grid is empty");
  out.metric = metric_for(ds);
  const Family family = config.family;

  std::vector<std::string> keys;
  keys.reserve(ds.examples.size());
  for (const auto& ex : ds.examples) keys.push_back(content_key(ex));

  std::vector<int> labels(ds.examples.size(), 0);
  if (!ds.is_relatedness())
    for (std::size_t i = 0; i < ds.examples.size(); ++i)
      labels[i] = ds.label_index(ds.examples[i].label);

  // Token matrices, computed once for all seeds.
  const std::size_t m = ds.examples.size();
  std::vector<TokenMatrix> first(m), second(ds.is_pair() ? m : 0);
  parallel_for(m, protocol.workers, [&](std::size_t i) {
    first[i] = embed_sentence(table, ds.examples[i].text);
    if (ds.is_pair()) second[i] = embed_sentence(table, *ds.examples[i].text2);
  });

  const FeatureMode mode = ds.kind == TaskKind::classification_pair ? FeatureMode::pair_class
                           : ds.is_relatedness()                    ? FeatureMode::pair_related
                                                                    : FeatureMode::single;
  const auto& points = out.grid.points;

  for (std::uint64_t seed : protocol.seeds) {
    const std::vector<FoldSplit> splits = make_splits(ds, protocol, seed, keys);
    std::vector<std::vector<UnitScore>> seed_scores(splits.size(),
                                                    std::vector<UnitScore>(points.size()));

    std::map<EncoderKey, std::vector<std::size_t>> groups;
    for (std::size_t p = 0; p < points.size(); ++p)
      groups[encoder_key(family, points[p])].push_back(p);

    for (const auto& [key, members] : groups) {
      const Encoder base = build_encoder(apply_point(config, points[members.front()], seed));
      ++out.encoder_builds;

      // Sentence vectors for every distinct (pooling, activation) variant.
      std::map<VariantKey, std::size_t> variant_slot;
      std::vector<Encoder> variants;
      for (std::size_t p : members) {
        const VariantKey vk = variant_key(family, points[p]);
        if (variant_slot.emplace(vk, variants.size()).second)
          variants.push_back(variant_encoder(base, family, points[p]));
      }
      const Index dim = base.output_dim();
      std::vector<Matrix> u(variants.size(), Matrix(static_cast<Index>(m), dim));
      std::vector<Matrix> v(ds.is_pair() ? variants.size() : 0, Matrix(static_cast<Index>(m), dim));
      parallel_for(m, protocol.workers, [&](std::size_t i) {
        const Matrix s1 = base.states(first[i]);
        const Matrix s2 = ds.is_pair() ? base.states(second[i]) : Matrix();
        for (std::size_t k = 0; k < variants.size(); ++k) {
          const PoolingSpec spec = variants[k].pooling();
          u[k].row(static_cast<Index>(i)) = variants[k].finish(s1, spec, s1.rows()).transpose();
          if (ds.is_pair())
            v[k].row(static_cast<Index>(i)) = variants[k].finish(s2, spec, s2.rows()).transpose();
        }
      });
      ++out.encode_passes;

      std::vector<Matrix> features(variants.size());
      for (std::size_t k = 0; k < variants.size(); ++k)
        features[k] = build_feature_matrix(mode, u[k], ds.is_pair() ? &v[k] : nullptr);
      u.clear();
      v.clear();

      const std::size_t units = members.size() * splits.size();
      parallel_for(units, protocol.workers, [&](std::size_t unit) {
        const std::size_t p = members[unit / splits.size()];
        const std::size_t f = unit % splits.size();
        const Matrix& x = features[variant_slot.at(variant_key(family, points[p]))];
        const FoldSplit& split = splits[f];
        const Examples train_set = gather_examples(x, split.train, ds, labels);
        const Examples dev_set = gather_examples(x, split.dev, ds, labels);
        const Examples test_set = gather_examples(x, split.test, ds, labels);

        LinearHead head = ds.is_relatedness()
                              ? LinearHead::zeros(HeadKind::relatedness,
                                                  static_cast<Index>(ds.support.size()), x.cols())
                              : LinearHead::zeros(HeadKind::classification,
                                                  static_cast<Index>(ds.labels.size()), x.cols());
        head.classes = ds.labels;
        head.support = ds.support;
        TrainSpec spec = protocol.train;
        spec.l2 = points[p].l2;
        spec.seed = SeededRng(seed, "head").child(std::to_string(f)).child(std::to_string(p))
                        .stream()
                        .next_u64();
        const TrainResult r = train(head, train_set, dev_set, spec);
        seed_scores[f][p] = {r.best_metric, evaluate_metric(r.head, test_set)};
      });
    }
    out.scores.push_back(std::move(seed_scores));
  }
  return out;
}

namespace {

std::size_t best_point(const std::vector<UnitScore>& row) {
  std::size_t best = 0;
  for (std::size_t p = 1; p < row.size(); ++p)
    if (row[p].dev > row[best].dev) best = p;
  return best;
}

EvalResult result_shell(const EncoderConfig& config, const TaskDataset& ds,
                        const Protocol& protocol, const GridScores& scores) {
  EvalResult r;
  r.task = ds.name;
  r.metric = scores.metric;
  r.config = config;
  r.seeds = protocol.seeds;
  r.encoder_builds = scores.encoder_builds;
  r.encode_passes = scores.encode_passes;
  return r;
}

void finalize(EvalResult& r) {
  std::tie(r.mean, r.std) = mean_std(r.per_seed);
}

}  // namespace

EvalResult evaluate_task(const EncoderConfig& config, const EmbeddingTable& table,
                         const TaskDataset& ds, const Protocol& protocol) {
  const GridScores scores = score_grid(config, table, ds, protocol);
  EvalResult r = result_shell(config, ds, protocol, scores);
  for (const auto& seed_scores : scores.scores) {
    double total = 0.0;
    std::vector<std::string> chosen;
    for (const auto& fold : seed_scores) {
      const std::size_t p = best_point(fold);
      total += fold[p].test;
      chosen.push_back(scores.grid.points[p].describe(config.family));
    }
    r.per_seed.push_back(total / static_cast<double>(seed_scores.size()));
    r.chosen.push_back(std::move(chosen));
  }
  finalize(r);
  return r;
}

BestOverallResult tune_best_overall(const EncoderConfig& config, const EmbeddingTable& table,
                                    std::span<const TaskDataset> datasets,
                                    const Protocol& protocol) {
  if (datasets.empty()) throw Error("tune_best_overall: no datasets");
  std::vector<GridScores> all;
  for (const auto& ds : datasets) all.push_back(score_grid(config, table, ds, protocol));
  BestOverallResult out;
  out.grid = all.front().grid;
  const std::size_t n_points = out.grid.points.size();

  // Unweighted mean over tasks of each task's mean dev metric.
  auto choose = [&](MetricKind kind) -> std::optional<std::size_t> {
    std::vector<double> total(n_points, 0.0);
    std::size_t tasks = 0;
    for (const auto& gs : all) {
      if (gs.metric != kind) continue;
      ++tasks;
      for (std::size_t p = 0; p < n_points; ++p) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& seed_scores : gs.scores)
          for (const auto& fold : seed_scores) {
            sum += fold[p].dev;
            ++count;
          }
        total[p] += sum / static_cast<double>(count);
      }
    }
    if (tasks == 0) return std::nullopt;
    std::size_t best = 0;
    for (std::size_t p = 1; p < n_points; ++p)
      if (total[p] > total[best]) best = p;
    return best;
  };
  out.accuracy_point = choose(MetricKind::accuracy);
  out.pearson_point = choose(MetricKind::pearson);

  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const GridScores& gs = all[d];
    EvalResult r = result_shell(config, datasets[d], protocol, gs);
    const std::size_t p =
        gs.metric == MetricKind::accuracy ? *out.accuracy_point : *out.pearson_point;
    for (const auto& seed_scores : gs.scores) {
      double total = 0.0;
      for (const auto& fold : seed_scores) total += fold[p].test;
      r.per_seed.push_back(total / static_cast<double>(seed_scores.size()));
      r.chosen.push_back(std::vector<std::string>(seed_scores.size(),
                                                  out.grid.points[p].describe(config.family)));
    }
    finalize(r);
    out.results.push_back(std::move(r));
  }
  return out;
}

}  // namespace randenc
