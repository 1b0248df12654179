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

#include "randenc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

namespace randenc {
namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <typename T>
T parse_number(const std::string& key, const std::string& s) {
  T v{};
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw ParseError("config: invalid value for " + key + ": '" + s + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ParseError("config: invalid boolean for " + key + ": '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

void set_key(RunConfig& c, const std::string& section, const std::string& key,
             const std::string& v) {
  const std::string name = section + "." + key;
  EncoderConfig& e = c.encoder;
  if (section == "encoder") {
    if (key == "family") e.family = parse_family(v);
    else if (key == "dim") e.dim = parse_number<Index>(name, v);
    else if (key == "init") e.init = parse_init_scheme(v);
    else if (key == "pooling") e.pooling.kind = parse_pool_kind(v);
    else if (key == "pad_mode") e.pooling.pad_mode = parse_pad_mode(v);
    else if (key == "activation") e.activation = parse_activation(v);
    else if (key == "spectral_radius") e.spectral_radius = parse_number<double>(name, v);
    else if (key == "input_scale") e.input_scale = parse_number<double>(name, v);
    else if (key == "sparsity") e.sparsity = parse_number<double>(name, v);
    else if (key == "leak") e.leak = parse_number<double>(name, v);
    else if (key == "seed") e.seed = parse_number<std::uint64_t>(name, v);
    else if (key == "sort") c.sort = parse_sort_mode(v);
    else if (key == "batch_size") c.batch_size = parse_number<Index>(name, v);
    else throw ParseError("config: unknown key " + name);
  } else if (section == "protocol") {
    if (key == "split") c.split = parse_split_mode(v);
    else if (key == "folds") c.folds = parse_number<int>(name, v);
    else if (key == "seeds") c.seeds = parse_number<int>(name, v);
    else if (key == "tuning") c.tuning = parse_tuning_mode(v);
    else if (key == "grid") {
      if (v != "default" && v != "none") throw ParseError("config: grid must be default or none");
      c.grid = v;
    } else if (key == "l2_sweep") c.l2_sweep = parse_bool(name, v);
    else if (key == "l2") c.l2 = parse_number<double>(name, v);
    else if (key == "max_epochs") c.max_epochs = parse_number<int>(name, v);
    else if (key == "patience") c.patience = parse_number<int>(name, v);
    else if (key == "workers") c.workers = parse_number<int>(name, v);
    else throw ParseError("config: unknown key " + name);
  } else if (section == "data") {
    if (key == "embeddings") c.embeddings = v;
    else if (key == "random_table") c.random_table = parse_bool(name, v);
    else if (key == "random_dim") c.random_dim = parse_number<Index>(name, v);
    else if (key == "random_scheme") c.random_scheme = parse_init_scheme(v);
    else if (key == "tasks") c.tasks = split_list(v);
    else if (key == "input") c.input = v;
    else if (key == "vectors") c.vectors = v;
    else if (key == "target_dim") c.target_dim = parse_number<Index>(name, v);
    else if (key == "dims") {
      c.dims.clear();
      for (const auto& d : split_list(v)) c.dims.push_back(parse_number<Index>(name, d));
    } else if (key == "synthetic") c.synthetic = v;
    else if (key == "examples") c.examples = parse_number<std::size_t>(name, v);
    else throw ParseError("config: unknown key " + name);
  } else if (section == "output") {
    if (key == "out") c.out = v;
    else throw ParseError("config: unknown key " + name);
  } else {
    throw ParseError("config: unknown section [" + section + "]");
  }
}

}  // namespace

RunConfig parse_config_string(const std::string& ini) {
  pt::ptree tree;
  std::istringstream in(ini);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config: " + std::string(e.what()));
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ParseError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) set_key(c, section, key, value.data());
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

std::string print_config(const RunConfig& c) {
  const EncoderConfig& e = c.encoder;
  std::ostringstream o;
  o << "[encoder]\n"
    << "family = " << to_string(e.family) << "\n"
    << "dim = " << e.dim << "\n"
    << "init = " << to_string(e.init) << "\n"
    << "pooling = " << to_string(e.pooling.kind) << "\n"
    << "pad_mode = " << to_string(e.pooling.pad_mode) << "\n"
    << "activation = " << to_string(e.activation) << "\n"
    << "spectral_radius = " << fmt(e.spectral_radius) << "\n"
    << "input_scale = " << fmt(e.input_scale) << "\n"
    << "sparsity = " << fmt(e.sparsity) << "\n"
    << "leak = " << fmt(e.leak) << "\n"
    << "seed = " << e.seed << "\n"
    << "sort = " << to_string(c.sort) << "\n"
    << "batch_size = " << c.batch_size << "\n\n"
    << "[protocol]\n"
    << "split = " << to_string(c.split) << "\n"
    << "folds = " << c.folds << "\n"
    << "seeds = " << c.seeds << "\n"
    << "tuning = " << to_string(c.tuning) << "\n"
    << "grid = " << c.grid << "\n"
    << "l2_sweep = " << (c.l2_sweep ? "true" : "false") << "\n"
    << "l2 = " << fmt(c.l2) << "\n"
    << "max_epochs = " << c.max_epochs << "\n"
    << "patience = " << c.patience << "\n"
    << "workers = " << c.workers << "\n\n"
    << "[data]\n"
    << "embeddings = " << c.embeddings << "\n"
    << "random_table = " << (c.random_table ? "true" : "false") << "\n"
    << "random_dim = " << c.random_dim << "\n"
    << "random_scheme = " << to_string(c.random_scheme) << "\n"
    << "tasks = " << join(c.tasks) << "\n"
    << "input = " << c.input << "\n"
    << "vectors = " << c.vectors << "\n"
    << "target_dim = " << c.target_dim << "\n";
  std::vector<std::string> dims;
  for (Index d : c.dims) dims.push_back(std::to_string(d));
  o << "dims = " << join(dims) << "\n"
    << "synthetic = " << c.synthetic << "\n"
    << "examples = " << c.examples << "\n\n"
    << "[output]\n"
    << "out = " << c.out << "\n";
  return o.str();
}

void validate_config(const RunConfig& c, bool need_embeddings, bool need_tasks) {
  if (need_embeddings) {
    if (c.embeddings.empty() == !c.random_table)
      throw Error("config: give exactly one embedding source (embeddings path or random_table)");
    if (!c.embeddings.empty()) {
      const fs::path p(c.embeddings);
      if (!fs::exists(p) && !fs::exists(fs::path(c.embeddings + ".json")))
        throw Error("embedding file not found: " + c.embeddings);
    }
  }
  if (need_tasks) {
    if (c.tasks.empty()) throw Error("config: no task datasets given");
    for (const auto& t : c.tasks)
      if (!fs::exists(t)) throw Error("dataset file not found: " + t);
  }
  if (c.seeds < 1) throw Error("config: seeds must be at least 1");
  if (c.batch_size < 1) throw Error("config: batch_size must be at least 1");
  if (c.workers < 1) throw Error("config: workers must be at least 1");
  if (c.encoder.dim < 1) throw DimensionError("config: dim must be positive");
}

Protocol make_protocol(const RunConfig& c) {
  Protocol p;
  p.split_mode = c.split;
  p.folds = c.folds;
  p.seeds = make_seeds(c.encoder.seed, c.seeds);
  p.tuning = c.tuning;
  p.l2_sweep = c.l2_sweep;
  if (c.grid == "none") p.grid = HyperGrid::single(c.encoder, c.l2);
  p.train.l2 = c.l2;
  p.train.max_epochs = c.max_epochs;
  p.train.patience = c.patience;
  p.workers = c.workers;
  return p;
}

}  // namespace randenc
