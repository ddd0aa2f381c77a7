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

#ifndef DPFL_CLI_RUNNER_HPP
#define DPFL_CLI_RUNNER_HPP

#include <optional>
#include <string>
#include <vector>

#include "dpfl/blr.hpp"
#include "dpfl/cli/config.hpp"
#include "dpfl/fedsim.hpp"
#include "dpfl/models.hpp"

namespace dpfl::cli {

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
};

/// Exit codes: 0 success, 2 configuration/input error, 3 numeric failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Executes one subcommand (train, bounds, fairness, optimize, tune, oracle,
/// gradcheck) against a config file and returns the process exit code.
/// Identical config + seed produce byte-identical outputs.
int run_command(const std::string& command, const std::string& config_path,
                const CliOverrides& overrides = {});

/// Materialized experiment inputs: model, per-client training data, optional
/// held-out data, and the generating linear-regression instance when the
/// dataset is synthetic-blr.
struct ExperimentData {
  LossModel model = LossModel::quadratic();
  std::vector<ClientDataset> train;
  std::vector<ClientDataset> eval;
  std::optional<blr::BlrInstance> instance;
};

ExperimentData build_experiment(const ExperimentConfig& cfg);

/// Everything a run produced that the figure-style series are derived from.
struct RunTrace {
  struct Entry {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    std::vector<fedsim::RoundLog> logs;
  };
  std::vector<Entry> entries;
  struct FairnessRow {
    long t;
    double lambda;
    double r;
  };
  std::vector<FairnessRow> fairness_vs_lambda;
  struct BoundRow {
    long t;
    double h;
    double h_low;
    double global;
  };
  std::vector<BoundRow> h_vs_t;
};

/// Writes the four plot-ready series (header-only when a view has no data):
///   series_metric_vs_round_per_epsilon.csv  (mean across seeds per epsilon)
///   series_metric_vs_round_per_lambda.csv
///   series_fairness_vs_lambda.csv
///   series_h_vs_T.csv
void emit_plot_series(const std::string& out_dir, const RunTrace& trace);

/// Per-round CSV: round,client,loss,accuracy,fairness. Each round emits one
/// row per client plus an aggregate row with client = -1 carrying the
/// fairness value (T*N + T rows total).
void write_rounds_csv(const std::string& path, const std::vector<fedsim::RoundLog>& logs);

}  // namespace dpfl::cli

#endif  // DPFL_CLI_RUNNER_HPP
