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

// Batch experiment front-end for the privacy-preserving personalized
// federated learning toolkit. All subcommands read one config file and write
// machine-readable CSV/JSON artifacts; there is no interactive mode.

#include <string>

#include <CLI11.hpp>

#include "dpfl/cli/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"differentially-private personalized federated learning toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  dpfl::cli::CliOverrides overrides;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"train", "run the training loop (plus any analyses toggled in the config)"},
      {"bounds", "evaluate the convergence bound, its linear floor, and the best T"},
      {"fairness", "closed-form fairness across the lambda grid"},
      {"optimize", "joint analytic search for (T*, lambda*)"},
      {"tune", "empirical alternating grid search on training runs"},
      {"oracle", "Monte-Carlo validation of the fairness closed form"},
      {"gradcheck", "finite-difference validation of model gradients"},
  };

  std::uint64_t seed_value = 0;
  std::string out_value;
  int workers_value = 0;

  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--seed", seed_value, "override the config seed");
    sub->add_option("--out", out_value, "override the output directory");
    sub->add_option("--workers", workers_value, "override the worker count");
  }

  CLI11_PARSE(app, argc, argv);

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) overrides.seed = seed_value;
  if (sub->count("--out")) overrides.out = out_value;
  if (sub->count("--workers")) overrides.workers = workers_value;

  return dpfl::cli::run_command(sub->get_name(), config_path, overrides);
}
