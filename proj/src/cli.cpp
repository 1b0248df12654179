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

#include "randenc/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "randenc/config.hpp"
#include "randenc/dataset.hpp"
#include "randenc/diagnostics.hpp"
#include "randenc/embed_store.hpp"
#include "randenc/encoders.hpp"
#include "randenc/evalharness.hpp"
#include "randenc/report.hpp"
#include "randenc/selfcheck.hpp"
#include "randenc/vector_io.hpp"

namespace randenc {
namespace fs = std::filesystem;

namespace {

// Command-line values; an option overrides the config file only when given.
struct Flags {
  std::string config;
  bool print_config = false;
  std::string embeddings, family, pooling, pad_mode, sort, init, activation, grid, out, input,
      vectors, kind, dims;
  std::vector<std::string> tasks;
  std::uint64_t seed = 0;
  int seeds = 0, workers = 0, batch_size = 0, examples = 0;
  Index dim = 0, target_dim = 0, random_dim = 0;
  double spectral_radius = 0, input_scale = 0, sparsity = 0, leak = 0, l2 = 0;
  bool l2_sweep = false, random_table = false, kfold = false, best_overall = false;
  // Every subcommand registers its own copy of each option.
  std::multimap<std::string, CLI::Option*> opts;

  bool given(const std::string& name) const {
    auto [lo, hi] = opts.equal_range(name);
    return std::any_of(lo, hi, [](const auto& kv) { return kv.second->count() > 0; });
  }
};

void add_common(CLI::App* sc, Flags& f) {
  auto& o = f.opts;
  auto add = [&o](const char* name, CLI::Option* opt) { o.emplace(name, opt); };
  add("config", sc->add_option("--config", f.config, "INI configuration file"));
  add("print-config", sc->add_flag("--print-config", f.print_config,
                                   "Print the effective configuration and exit"));
  add("seed", sc->add_option("--seed", f.seed, "Base random seed"));
  add("embeddings", sc->add_option("--embeddings", f.embeddings, "Word vector file"));
  add("random-table", sc->add_flag("--random-table", f.random_table,
                                   "Use a random embedding table over the data vocabulary"));
  add("random-dim", sc->add_option("--random-dim", f.random_dim, "Random table dimension"));
  add("family", sc->add_option("--family", f.family, "boe|borep|randlstm|esn"));
  add("dim", sc->add_option("--dim", f.dim, "Sentence vector dimension"));
  add("init", sc->add_option("--init", f.init,
                             "heuristic|uniform01|normal|orthogonal|he|xavier"));
  add("pooling", sc->add_option("--pooling", f.pooling, "mean|max|sum"));
  add("pad-mode", sc->add_option("--pad-mode", f.pad_mode, "length|padded"));
  add("sort", sc->add_option("--sort", f.sort, "sorted_by_length|as_given"));
  add("batch-size", sc->add_option("--batch-size", f.batch_size, "Encoding batch size"));
  add("activation", sc->add_option("--activation", f.activation, "none|relu|tanh"));
  add("spectral-radius", sc->add_option("--spectral-radius", f.spectral_radius, "ESN radius"));
  add("input-scale", sc->add_option("--input-scale", f.input_scale, "ESN input scale"));
  add("sparsity", sc->add_option("--sparsity", f.sparsity, "ESN reservoir sparsity"));
  add("leak", sc->add_option("--leak", f.leak, "ESN leak rate"));
  add("seeds", sc->add_option("--seeds", f.seeds, "Number of seeds"));
  add("grid", sc->add_option("--grid", f.grid, "default|none"));
  add("l2-sweep", sc->add_flag("--l2-sweep", f.l2_sweep, "Add the l2 sweep to the grid"));
  add("l2", sc->add_option("--l2", f.l2, "Head l2 penalty"));
  add("kfold", sc->add_flag("--kfold", f.kfold, "k-fold cross-validation"));
  add("best-overall", sc->add_flag("--best-overall", f.best_overall,
                                   "One grid point for all tasks of a metric"));
  add("workers", sc->add_option("--workers", f.workers, "Worker threads"));
  add("out", sc->add_option("--out", f.out, "Output directory"));
  add("task", sc->add_option("--task", f.tasks, "Dataset .jsonl (repeatable)"));
  add("input", sc->add_option("--input", f.input, "Sentences (.txt, one per line, or .jsonl)"));
  add("vectors", sc->add_option("--vectors", f.vectors, "Binary vector base or manifest"));
  add("target-dim", sc->add_option("--target-dim", f.target_dim, "Projection dimension"));
  add("dims", sc->add_option("--dims", f.dims, "Comma-separated sweep dimensions"));
  add("kind", sc->add_option("--kind", f.kind, "Synthetic task kind, or padding"));
  add("examples", sc->add_option("--examples", f.examples, "Synthetic example count"));
}

RunConfig resolve(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  EncoderConfig& e = c.encoder;
  if (f.given("seed")) e.seed = f.seed;
  if (f.given("embeddings")) {
    c.embeddings = f.embeddings;
    c.random_table = false;
  }
  if (f.given("random-table")) {
    c.random_table = true;
    c.embeddings.clear();
  }
  if (f.given("random-dim")) c.random_dim = f.random_dim;
  if (f.given("family")) e.family = parse_family(f.family);
  if (f.given("dim")) e.dim = f.dim;
  if (f.given("init")) e.init = parse_init_scheme(f.init);
  if (f.given("pooling")) e.pooling.kind = parse_pool_kind(f.pooling);
  if (f.given("pad-mode")) e.pooling.pad_mode = parse_pad_mode(f.pad_mode);
  if (f.given("sort")) c.sort = parse_sort_mode(f.sort);
  if (f.given("batch-size")) c.batch_size = f.batch_size;
  if (f.given("activation")) e.activation = parse_activation(f.activation);
  if (f.given("spectral-radius")) e.spectral_radius = f.spectral_radius;
  if (f.given("input-scale")) e.input_scale = f.input_scale;
  if (f.given("sparsity")) e.sparsity = f.sparsity;
  if (f.given("leak")) e.leak = f.leak;
  if (f.given("seeds")) c.seeds = f.seeds;
  if (f.given("grid")) {
    if (f.grid != "default" && f.grid != "none") throw Error("--grid must be default or none");
    c.grid = f.grid;
  }
  if (f.given("l2-sweep")) c.l2_sweep = true;
  if (f.given("l2")) c.l2 = f.l2;
  if (f.given("kfold")) c.split = SplitMode::kfold;
  if (f.given("best-overall")) c.tuning = TuningMode::best_overall;
  if (f.given("workers")) {
    c.workers = f.workers;
  } else if (const char* env = std::getenv("RANDENC_WORKERS"); env && *env) {
    try {
      c.workers = std::stoi(env);
    } catch (const std::exception&) {
      throw Error(std::string("RANDENC_WORKERS is not an integer: ") + env);
    }
  }
  if (f.given("out")) c.out = f.out;
  if (f.given("task")) c.tasks = f.tasks;
  if (f.given("input")) c.input = f.input;
  if (f.given("vectors")) c.vectors = f.vectors;
  if (f.given("target-dim")) c.target_dim = f.target_dim;
  if (f.given("dims")) {
    c.dims.clear();
    std::stringstream ss(f.dims);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) c.dims.push_back(std::stoll(item));
  }
  if (f.given("kind")) c.synthetic = f.kind;
  if (f.given("examples")) c.examples = static_cast<std::size_t>(f.examples);
  return c;
}

std::vector<TaskDataset> load_tasks(const RunConfig& c) {
  std::vector<TaskDataset> out;
  for (const auto& t : c.tasks) out.push_back(load_dataset(t));
  return out;
}

std::vector<std::vector<std::string>> read_sentences(const fs::path& path) {
  std::vector<std::vector<std::string>> out;
  if (path.extension() == ".jsonl") {
    for (auto& ex : load_dataset(path).examples) out.push_back(std::move(ex.text));
    return out;
  }
  std::ifstream in(path);
  if (!in) throw Error("cannot open input file " + path.string());
  std::string line;
  while (std::getline(in, line)) out.push_back(split_tokens(line));
  return out;
}

EmbeddingTable load_table(const RunConfig& c, const std::vector<TaskDataset>& tasks,
                          const std::vector<std::vector<std::string>>& extra = {}) {
  if (!c.embeddings.empty()) {
    const fs::path p(c.embeddings);
    if (p.extension() == ".json" || fs::exists(fs::path(c.embeddings + ".json")))
      return load_embeddings_binary(p.extension() == ".json" ? p.parent_path() / p.stem() : p);
    return load_embeddings(p);
  }
  std::set<std::string> vocab;
  for (const auto& ds : tasks)
    for (const auto& ex : ds.examples) {
      vocab.insert(ex.text.begin(), ex.text.end());
      if (ex.text2) vocab.insert(ex.text2->begin(), ex.text2->end());
    }
  for (const auto& s : extra) vocab.insert(s.begin(), s.end());
  const std::vector<std::string> tokens(vocab.begin(), vocab.end());
  return generate_random_table(tokens, c.random_dim, c.random_scheme, c.encoder.seed);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

int cmd_encode(RunConfig c, std::ostream& out) {
  validate_config(c, true, false);
  if (c.input.empty()) throw Error("encode: no --input given");
  if (!fs::exists(c.input)) throw Error("input file not found: " + c.input);
  const auto sentences = read_sentences(c.input);
  const EmbeddingTable table = load_table(c, {}, sentences);
  c.encoder.input_dim = table.dim();
  const Encoder encoder = build_encoder(c.encoder);
  std::vector<TokenMatrix> mats;
  for (const auto& s : sentences) mats.push_back(embed_sentence(table, s));
  const Matrix vectors =
      encode_batch(encoder, mats, c.batch_size, c.sort, c.encoder.pooling.pad_mode, c.workers);
  fs::create_directories(c.out);
  write_vectors(fs::path(c.out) / "vectors", vectors, Dtype::f32);
  out << "encoded " << vectors.rows() << " sentences to " << (fs::path(c.out) / "vectors.bin").string()
      << " (dim " << vectors.cols() << ")\n";
  return 0;
}

int cmd_eval(RunConfig c, std::ostream& out) {
  validate_config(c, true, true);
  const auto tasks = load_tasks(c);
  const EmbeddingTable table = load_table(c, tasks);
  c.encoder.input_dim = table.dim();
  const Protocol protocol = make_protocol(c);
  std::vector<EvalResult> results;
  if (c.tuning == TuningMode::best_overall) {
    results = tune_best_overall(c.encoder, table, tasks, protocol).results;
  } else {
    for (const auto& ds : tasks) results.push_back(evaluate_task(c.encoder, table, ds, protocol));
  }
  write_reports(c.out, results, protocol);
  out << render_table(results);
  return 0;
}

int cmd_sweep(RunConfig c, std::ostream& out) {
  validate_config(c, true, true);
  const auto tasks = load_tasks(c);
  const EmbeddingTable table = load_table(c, tasks);
  c.encoder.input_dim = table.dim();
  const Protocol protocol = make_protocol(c);
  fs::create_directories(c.out);
  for (const auto& ds : tasks) {
    const SweepCurve curve = dim_sweep(c.encoder, c.dims, table, ds, protocol);
    const fs::path csv = fs::path(c.out) / (ds.name + "_sweep.csv");
    write_sweep_csv(curve, csv);
    for (std::size_t i = 0; i < curve.dims.size(); ++i)
      out << ds.name << " dim " << curve.dims[i] << ": "
          << format_cell(curve.results[i].mean, curve.results[i].std) << "\n";
    out << "wrote " << csv.string() << "\n";
  }
  return 0;
}

int cmd_project(const RunConfig& c, std::ostream& out) {
  if (c.vectors.empty()) throw Error("project: no --vectors given");
  if (!fs::exists(manifest_path(c.vectors))) throw Error("vector file not found: " + c.vectors);
  const Matrix vectors = read_vectors(c.vectors);
  const Matrix projected =
      random_project_vectors(vectors, c.target_dim, c.encoder.init, c.encoder.seed);
  fs::create_directories(c.out);
  write_vectors(fs::path(c.out) / "projected", projected, Dtype::f32);
  out << "projected " << vectors.rows() << " vectors " << vectors.cols() << " -> "
      << projected.cols() << "\n";
  return 0;
}

int cmd_padding(RunConfig c, std::ostream& out) {
  std::vector<TaskDataset> tasks;
  std::optional<EmbeddingTable> table;
  if (c.tasks.empty()) {
    // Without datasets the crafted corpus is diagnosed.
    SyntheticTask t = padding_corpus();
    tasks.push_back(std::move(t.dataset));
    table.emplace(std::move(t.table));
  } else {
    validate_config(c, true, true);
    tasks = load_tasks(c);
    table.emplace(load_table(c, tasks));
  }
  c.encoder.input_dim = table->dim();
  const Encoder encoder = build_encoder(c.encoder);
  fs::create_directories(c.out);
  for (const auto& ds : tasks) {
    const SparsedReport r = sparsed_stats(encoder, *table, ds, c.batch_size, c.sort);
    write_text(fs::path(c.out) / (ds.name + "_sparsed.json"), sparsed_to_json(r).dump(2) + "\n");
    out << ds.name << ": " << r.sparsed << " of " << r.total << " sparsed (batch "
        << r.batch_size << ", " << to_string(r.sort_mode) << ")\n";
  }
  return 0;
}

int cmd_gen(const RunConfig& c, std::ostream& out) {
  SyntheticTask task = [&] {
    if (c.synthetic == "padding") return padding_corpus();
    const SyntheticKind kind = parse_synthetic_kind(c.synthetic);
    SyntheticParams p = default_params(kind);
    if (c.examples > 0) p.examples = c.examples;
    return gen_synthetic(kind, p, c.encoder.seed);
  }();
  fs::create_directories(c.out);
  const fs::path data = fs::path(c.out) / (task.dataset.name + ".jsonl");
  const fs::path emb = fs::path(c.out) / (task.dataset.name + ".vectors.txt");
  save_dataset(task.dataset, data);
  save_embeddings(task.table, emb);
  out << "wrote " << data.string() << " (" << task.dataset.examples.size() << " examples) and "
      << emb.string() << "\n";
  return 0;
}

int cmd_selfcheck(std::ostream& out) {
  bool ok = true;
  for (const auto& line : run_selfcheck()) {
    out << (line.passed ? "PASS " : "FAIL ") << line.name << ": " << line.detail << "\n";
    ok = ok && line.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random sentence encoders and their evaluation"};
  app.name("randenc");
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"encode", "Encode sentences into a binary vector file"},
      {"eval", "Evaluate an encoder on transfer tasks"},
      {"probe", "Evaluate an encoder on probing tasks"},
      {"sweep-dim", "Evaluate over a list of output dimensions"},
      {"project", "Randomly project external sentence vectors"},
      {"diagnose-padding", "Count examples changed by padded max pooling"},
      {"gen-synthetic", "Write a synthetic task and its embedding table"},
      {"selfcheck", "Run fast invariant checks"}};
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), flags);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const RunConfig config = resolve(flags);
    if (flags.print_config) {
      out << print_config(config);
      return 0;
    }
    if (cmd == "encode") return cmd_encode(config, out);
    if (cmd == "eval" || cmd == "probe") return cmd_eval(config, out);
    if (cmd == "sweep-dim") return cmd_sweep(config, out);
    if (cmd == "project") return cmd_project(config, out);
    if (cmd == "diagnose-padding") return cmd_padding(config, out);
    if (cmd == "gen-synthetic") return cmd_gen(config, out);
    if (cmd == "selfcheck") return cmd_selfcheck(out);
    err << "error: unknown subcommand " << cmd << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace randenc
