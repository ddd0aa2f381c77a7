//
// Copyright 2026 The dpfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpfl/cli/config.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "dpfl/errors.hpp"

namespace dpfl::cli {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_real(const std::string& v, int line) {
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("expected a real number, got '" + v + "'", line);
  }
}

long parse_long(const std::string& v, int line) {
  long x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("expected an integer, got '" + v + "'", line);
  }
  return x;
}

std::uint64_t parse_u64(const std::string& v, int line) {
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("expected an unsigned integer, got '" + v + "'", line);
  }
  return x;
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected a boolean, got '" + v + "'", line);
}

std::vector<std::string> split_ws(const std::string& v) {
  std::istringstream in(v);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, int)>;

const std::map<std::string, Setter>& schema() {
  static const std::map<std::string, Setter> s = {
      {"model", [](ExperimentConfig& c, const std::string& v, int) { c.model = v; }},
      {"classes", [](ExperimentConfig& c, const std::string& v, int l) { c.classes = static_cast<int>(parse_long(v, l)); }},
      {"hidden", [](ExperimentConfig& c, const std::string& v, int l) { c.hidden = static_cast<int>(parse_long(v, l)); }},
      {"dataset", [](ExperimentConfig& c, const std::string& v, int) { c.dataset = v; }},
      {"blr_samples_per_client", [](ExperimentConfig& c, const std::string& v, int l) { c.blr_samples_per_client = static_cast<int>(parse_long(v, l)); }},
      {"blr_dim", [](ExperimentConfig& c, const std::string& v, int l) { c.blr_dim = static_cast<int>(parse_long(v, l)); }},
      {"blr_rho", [](ExperimentConfig& c, const std::string& v, int l) { c.blr_rho = parse_real(v, l); }},
      {"blr_zeta2", [](ExperimentConfig& c, const std::string& v, int l) { c.blr_zeta2 = parse_real(v, l); }},
      {"blr_sigma2", [](ExperimentConfig& c, const std::string& v, int l) { c.blr_sigma2 = parse_real(v, l); }},
      {"synth_samples", [](ExperimentConfig& c, const std::string& v, int l) { c.synth_samples = static_cast<int>(parse_long(v, l)); }},
      {"synth_features", [](ExperimentConfig& c, const std::string& v, int l) { c.synth_features = static_cast<int>(parse_long(v, l)); }},
      {"synth_class_sep", [](ExperimentConfig& c, const std::string& v, int l) { c.synth_class_sep = parse_real(v, l); }},
      {"idx_images", [](ExperimentConfig& c, const std::string& v, int) { c.idx_images = v; }},
      {"idx_labels", [](ExperimentConfig& c, const std::string& v, int) { c.idx_labels = v; }},
      {"idx_test_images", [](ExperimentConfig& c, const std::string& v, int) { c.idx_test_images = v; }},
      {"idx_test_labels", [](ExperimentConfig& c, const std::string& v, int) { c.idx_test_labels = v; }},
      {"idx_limit", [](ExperimentConfig& c, const std::string& v, int l) { c.idx_limit = static_cast<int>(parse_long(v, l)); }},
      {"partition", [](ExperimentConfig& c, const std::string& v, int) { c.partition = v; }},
      {"shards_per_client", [](ExperimentConfig& c, const std::string& v, int l) { c.shards_per_client = static_cast<int>(parse_long(v, l)); }},
      {"holdout_fraction", [](ExperimentConfig& c, const std::string& v, int l) { c.holdout_fraction = parse_real(v, l); }},
      {"n_clients", [](ExperimentConfig& c, const std::string& v, int l) { c.n_clients = static_cast<int>(parse_long(v, l)); }},
      {"rounds", [](ExperimentConfig& c, const std::string& v, int l) { c.rounds = static_cast<int>(parse_long(v, l)); }},
      {"eta_g", [](ExperimentConfig& c, const std::string& v, int l) { c.eta_g = parse_real(v, l); }},
      {"eta_l", [](ExperimentConfig& c, const std::string& v, int l) { c.eta_l = parse_real(v, l); }},
      {"lambda", [](ExperimentConfig& c, const std::string& v, int l) { c.lambda = parse_real(v, l); }},
      {"seed", [](ExperimentConfig& c, const std::string& v, int l) { c.seed = parse_u64(v, l); }},
      {"epsilon", [](ExperimentConfig& c, const std::string& v, int l) { c.epsilon = parse_real(v, l); }},
      {"delta", [](ExperimentConfig& c, const std::string& v, int l) { c.delta = parse_real(v, l); }},
      {"clip", [](ExperimentConfig& c, const std::string& v, int l) { c.clip = parse_real(v, l); }},
      {"local_epochs", [](ExperimentConfig& c, const std::string& v, int l) { c.local_epochs = static_cast<int>(parse_long(v, l)); }},
      {"minibatch", [](ExperimentConfig& c, const std::string& v, int l) { c.minibatch = static_cast<int>(parse_long(v, l)); }},
      {"mu", [](ExperimentConfig& c, const std::string& v, int l) { c.mu = parse_real(v, l); }},
      {"l_smooth", [](ExperimentConfig& c, const std::string& v, int l) { c.l_smooth = parse_real(v, l); }},
      {"g0", [](ExperimentConfig& c, const std::string& v, int l) { c.g0 = parse_real(v, l); }},
      {"m_dist", [](ExperimentConfig& c, const std::string& v, int l) { c.m_dist = parse_real(v, l); }},
      {"psi1", [](ExperimentConfig& c, const std::string& v, int l) { c.psi1 = parse_real(v, l); }},
      {"psi2", [](ExperimentConfig& c, const std::string& v, int l) { c.psi2 = parse_real(v, l); }},
      {"analyze_bounds", [](ExperimentConfig& c, const std::string& v, int l) { c.analyze_bounds = parse_bool(v, l); }},
      {"analyze_fairness", [](ExperimentConfig& c, const std::string& v, int l) { c.analyze_fairness = parse_bool(v, l); }},
      {"analyze_optimize", [](ExperimentConfig& c, const std::string& v, int l) { c.analyze_optimize = parse_bool(v, l); }},
      {"analyze_oracle", [](ExperimentConfig& c, const std::string& v, int l) { c.analyze_oracle = parse_bool(v, l); }},
      {"oracle_trials", [](ExperimentConfig& c, const std::string& v, int l) { c.oracle_trials = parse_long(v, l); }},
      {"t_max", [](ExperimentConfig& c, const std::string& v, int l) { c.t_max = parse_long(v, l); }},
      {"lambda_grid",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.lambda_grid.clear();
         for (const auto& tok : split_ws(v)) c.lambda_grid.push_back(parse_real(tok, l));
       }},
      {"t_grid",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.t_grid.clear();
         for (const auto& tok : split_ws(v)) c.t_grid.push_back(static_cast<int>(parse_long(tok, l)));
       }},
      {"sweep_epsilons",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.sweep_epsilons.clear();
         for (const auto& tok : split_ws(v)) c.sweep_epsilons.push_back(parse_real(tok, l));
       }},
      {"sweep_seeds",
       [](ExperimentConfig& c, const std::string& v, int l) {
         c.sweep_seeds.clear();
         for (const auto& tok : split_ws(v)) c.sweep_seeds.push_back(parse_u64(tok, l));
       }},
      {"out_dir", [](ExperimentConfig& c, const std::string& v, int) { c.out_dir = v; }},
      {"workers", [](ExperimentConfig& c, const std::string& v, int l) { c.workers = static_cast<int>(parse_long(v, l)); }},
  };
  return s;
}

void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what, 0);
}

void validate(const ExperimentConfig& c) {
  require(c.model == "quadratic" || c.model == "mlr" || c.model == "mlp",
          "model must be quadratic, mlr, or mlp");
  require(c.dataset == "synthetic-blr" || c.dataset == "synthetic-classification" ||
              c.dataset == "idx-files",
          "dataset must be synthetic-blr, synthetic-classification, or idx-files");
  require(c.partition == "iid" || c.partition == "label-shard",
          "partition must be iid or label-shard");
  if (c.model != "quadratic") require(c.classes >= 2, "classes must be >= 2");
  if (c.model == "mlp") require(c.hidden >= 1, "hidden must be >= 1");
  if (c.dataset == "synthetic-blr") {
    require(c.model == "quadratic", "synthetic-blr requires model = quadratic");
    require(c.blr_samples_per_client >= c.blr_dim, "blr_samples_per_client must be >= blr_dim");
    require(c.blr_rho > 0, "blr_rho must be > 0");
    require(c.blr_zeta2 >= 0, "blr_zeta2 must be >= 0");
    require(c.blr_sigma2 > 0, "blr_sigma2 must be > 0");
  }
  if (c.dataset == "synthetic-classification") {
    require(c.model != "quadratic", "synthetic-classification requires a classifier model");
    require(c.synth_samples >= c.n_clients, "synth_samples must cover all clients");
    require(c.synth_features >= 1, "synth_features must be >= 1");
  }
  if (c.dataset == "idx-files") {
    require(c.model != "quadratic", "idx-files requires a classifier model");
    require(!c.idx_images.empty() && !c.idx_labels.empty(),
            "idx-files requires idx_images and idx_labels");
    require(std::ifstream(c.idx_images).good(), "idx_images file does not exist: " + c.idx_images);
    require(std::ifstream(c.idx_labels).good(), "idx_labels file does not exist: " + c.idx_labels);
    if (!c.idx_test_images.empty() || !c.idx_test_labels.empty()) {
      require(!c.idx_test_images.empty() && !c.idx_test_labels.empty(),
              "idx test images and labels must be given together");
      require(std::ifstream(c.idx_test_images).good(),
              "idx_test_images file does not exist: " + c.idx_test_images);
      require(std::ifstream(c.idx_test_labels).good(),
              "idx_test_labels file does not exist: " + c.idx_test_labels);
    }
    require(c.idx_limit >= 0, "idx_limit must be >= 0");
  }
  if (c.partition == "label-shard") {
    require(c.shards_per_client >= 1, "shards_per_client must be >= 1");
  }
  require(c.holdout_fraction >= 0 && c.holdout_fraction < 1, "holdout_fraction must be in [0,1)");
  require(c.n_clients >= 1, "n_clients must be >= 1");
  require(c.rounds >= 0, "rounds must be >= 0");
  require(c.eta_g > 0 && c.eta_l > 0, "learning rates must be > 0");
  require(c.lambda >= 0 && c.lambda <= 2, "lambda must be in [0,2]");
  require(c.epsilon > 0, "epsilon must be > 0");
  require(c.delta > 0 && c.delta < 1, "delta must be in (0,1)");
  require(c.clip > 0, "clip must be > 0");
  require(c.local_epochs >= 1, "local_epochs must be >= 1");
  require(c.minibatch >= 0, "minibatch must be >= 0");
  require(c.mu > 0 && c.l_smooth >= c.mu, "need 0 < mu <= l_smooth");
  require(c.g0 >= 0 && c.m_dist >= 0 && c.psi1 >= 0 && c.psi2 >= 0,
          "g0, m_dist, psi1, psi2 must be >= 0");
  require(c.oracle_trials >= 10000, "oracle_trials must be >= 10000");
  require(c.t_max >= 1, "t_max must be >= 1");
  require(!c.lambda_grid.empty(), "lambda_grid must not be empty");
  for (double l : c.lambda_grid) require(l >= 0 && l <= 2, "lambda_grid entries must be in [0,2]");
  require(!c.t_grid.empty(), "t_grid must not be empty");
  for (int t : c.t_grid) require(t >= 1, "t_grid entries must be >= 1");
  for (double e : c.sweep_epsilons) require(e > 0, "sweep_epsilons entries must be > 0");
  require(c.workers >= 1, "workers must be >= 1");
  require(!c.out_dir.empty(), "out_dir must not be empty");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected 'key = value', got '" + line + "'", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = schema().find(key);
    if (it == schema().end()) throw ConfigError("unknown key '" + key + "'", line_no);
    if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'", line_no);
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no);
    it->second(cfg, value, line_no);
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path, 0);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

std::string config_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path, 0);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dpfl::cli
