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

#ifndef DPFL_CLI_CONFIG_HPP
#define DPFL_CLI_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace dpfl::cli {

/// Batch experiment description parsed from a `key = value` text file
/// ('#' comments, blank lines allowed). Unknown and duplicate keys are
/// schema errors with line numbers; lists are space-separated. The full
/// key reference lives in the README.
struct ExperimentConfig {
  // model
  std::string model = "quadratic";  // quadratic | mlr | mlp
  int classes = 10;
  int hidden = 16;

  // dataset
  std::string dataset = "synthetic-blr";  // synthetic-blr | synthetic-classification | idx-files
  int blr_samples_per_client = 8;
  int blr_dim = 2;
  double blr_rho = 1.0;
  double blr_zeta2 = 1.0;
  double blr_sigma2 = 1.0;
  int synth_samples = 2000;
  int synth_features = 20;
  double synth_class_sep = 2.0;
  std::string idx_images, idx_labels, idx_test_images, idx_test_labels;
  int idx_limit = 0;  // 0 = all; otherwise class-balanced subset size
  std::string partition = "iid";  // iid | label-shard
  int shards_per_client = 2;
  double holdout_fraction = 0.0;

  // training
  int n_clients = 2;
  int rounds = 10;
  double eta_g = 0.005;
  double eta_l = 0.005;
  double lambda = 0.1;
  std::uint64_t seed = 1;
  double epsilon = 10.0;  // "inf" accepted
  double delta = 0.01;
  double clip = 20.0;
  int local_epochs = 1;
  int minibatch = 0;

  // convergence-bound constants
  double mu = 1.0;
  double l_smooth = 1.0;
  double g0 = 1.0;
  double m_dist = 1.0;
  double psi1 = 1.0;
  double psi2 = 1.0;

  // analysis toggles and knobs
  bool analyze_bounds = false;
  bool analyze_fairness = false;
  bool analyze_optimize = false;
  bool analyze_oracle = false;
  long oracle_trials = 1000000;
  long t_max = 100;
  std::vector<double> lambda_grid = {0.0, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 2.0};
  std::vector<int> t_grid = {5, 10, 20, 30};

  // sweeps (empty = single run with `epsilon` / `seed`)
  std::vector<double> sweep_epsilons;
  std::vector<std::uint64_t> sweep_seeds;

  // output
  std::string out_dir = "out";
  int workers = 1;
};

/// Parses and validates; throws ConfigError with the offending line number.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

/// FNV-1a hash of the raw config bytes, for the run manifest.
std::string config_hash(const std::string& path);

}  // namespace dpfl::cli

#endif  // DPFL_CLI_CONFIG_HPP
