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

// Compares the serial reference implementations against the OpenMP kernels
// on a medium workload and prints the speedup. Results must agree exactly;
// any divergence is reported as a failure.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dpfl/fairness.hpp"
#include "dpfl/fedsim.hpp"
#include "dpfl/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int hardware_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

bool logs_equal(const std::vector<dpfl::fedsim::RoundLog>& a,
                const std::vector<dpfl::fedsim::RoundLog>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].global_model != b[i].global_model) return false;
    if (a[i].personalized_losses != b[i].personalized_losses) return false;
    if (a[i].empirical_fairness != b[i].empirical_fairness) return false;
  }
  return true;
}

}  // namespace

int main() {
  using namespace dpfl;
  const int workers = hardware_workers();
  std::printf("workers available: %d\n\n", workers);
  bool ok = true;

  {
    // Training: 20 clients, one-hidden-layer networks.
    const int n = 20, classes = 10, features = 64, per_client = 400;
    LossModel model = LossModel::mlp(48, classes);
    RandomSource rng = seeded_rng(7, stream::make(stream::kInit, 0));
    std::vector<ClientDataset> datasets;
    for (int c = 0; c < n; ++c) {
      ClientDataset ds;
      ds.features.resize(per_client, features);
      ds.labels.resize(per_client);
      for (int i = 0; i < per_client; ++i) {
        for (int j = 0; j < features; ++j) ds.features(i, j) = rng.normal();
        ds.labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_below(classes));
      }
      datasets.push_back(std::move(ds));
    }
    TrainingConfig config;
    config.n_clients = n;
    config.rounds = 30;
    config.lambda = 0.1;
    config.seed = 7;
    PrivacySpec privacy{10.0, 0.01, 20.0};

    fedsim::TrainOptions serial_opts;
    auto t0 = Clock::now();
    const auto serial_logs = fedsim::run_training_serial(config, privacy, model, datasets, serial_opts);
    const double t_serial = seconds_since(t0);

    fedsim::TrainOptions par_opts;
    par_opts.workers = workers;
    t0 = Clock::now();
    const auto par_logs = fedsim::run_training(config, privacy, model, datasets, par_opts);
    const double t_par = seconds_since(t0);

    const bool same = logs_equal(serial_logs, par_logs);
    ok = ok && same;
    std::printf("run_training   serial %.3fs  openmp %.3fs  speedup %.2fx  identical: %s\n",
                t_serial, t_par, t_serial / t_par, same ? "yes" : "NO");
  }

  {
    // Fairness oracle: 5 clients, 4 dimensions, 2M trials.
    fairness::FairnessParams fp;
    fp.n = 5;
    fp.d = 4;
    fp.b = 8;
    fp.rho = 1.0;
    fp.s1 = 0.05;
    fp.s2 = 0.2;
    fp.sigma_w2 = 0.5;
    fp.sigma_z2 = 0.8;
    RandomSource rng = seeded_rng(11, stream::make(stream::kBlr, 2));
    std::vector<ModelVector> u_hat;
    for (int c = 0; c < fp.n; ++c) u_hat.push_back(rng.gaussian(fp.d));
    const auto ac = fairness::alpha_coeffs(u_hat);
    fp.g1 = ac.g1;
    fp.g2 = ac.g2;

    const long trials = 2000000;
    auto t0 = Clock::now();
    const auto serial = fairness::mc_oracle_serial(0.5, fp, u_hat, trials, 11);
    const double t_serial = seconds_since(t0);
    t0 = Clock::now();
    const auto par = fairness::mc_oracle(0.5, fp, u_hat, trials, 11,
                                         fairness::McMode::kIndependent, workers);
    const double t_par = seconds_since(t0);

    const bool same = serial.estimate == par.estimate && serial.stderr_est == par.stderr_est;
    ok = ok && same;
    std::printf("mc_oracle      serial %.3fs  openmp %.3fs  speedup %.2fx  identical: %s\n",
                t_serial, t_par, t_serial / t_par, same ? "yes" : "NO");
  }

  if (!ok) {
    std::printf("\nFAIL: parallel kernels diverged from the serial reference\n");
    return 1;
  }
  return 0;
}
