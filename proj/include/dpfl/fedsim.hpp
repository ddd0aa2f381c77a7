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

#ifndef DPFL_FEDSIM_HPP
#define DPFL_FEDSIM_HPP

#include <span>
#include <vector>

#include "dpfl/dataset.hpp"
#include "dpfl/models.hpp"
#include "dpfl/rng.hpp"
#include "dpfl/types.hpp"

namespace dpfl::fedsim {

/// Per-round record: the aggregated (noisy) global model and the personalized
/// models' training losses, accuracies, and fairness.
struct RoundLog {
  int round = 0;
  ModelVector global_model;
  std::vector<double> personalized_losses;
  std::vector<double> accuracies;  // NaN entries for regression models
  double mean_personalized_loss = 0.0;
  double mean_accuracy = 0.0;  // NaN for regression models
  double empirical_fairness = 0.0;
  double global_train_loss = 0.0;  // mean local loss of the global model
  std::vector<ModelVector> personalized_models;  // only with record_personalized
};

/// One gradient-descent step of the local (FL) objective from the broadcast
/// model: u - eta_g * grad F(u).
ModelVector local_step(const ModelVector& u, const LossModel& model, const ClientDataset& data,
                       double eta_g);

/// One step of the personalized objective, pulled toward the broadcast global
/// model: p - eta_l * ((1 - lambda/2) grad F(p) + lambda (p - omega)).
ModelVector personalized_step(const ModelVector& p, const ModelVector& omega,
                              const LossModel& model, const ClientDataset& data, double eta_l,
                              double lambda);

/// Coordinate-wise arithmetic mean of the uploaded models.
ModelVector aggregate(const std::vector<ModelVector>& uploads);

/// Population variance (divide by N) of per-client personalized losses;
/// smaller is fairer.
double empirical_fairness(std::span<const double> losses);

struct TrainOptions {
  int workers = 1;       // OpenMP threads for the client loop
  int local_epochs = 1;  // gradient passes per round for both model families
  int minibatch = 0;     // 0 = full batch; otherwise samples per step
  /// Optional held-out datasets (same client count) used for accuracy;
  /// training data is always used for losses and fairness.
  const std::vector<ClientDataset>* eval_datasets = nullptr;
  /// Optional initial models; zero vectors by default.
  const ModelVector* global_init = nullptr;
  const std::vector<ModelVector>* personalized_init = nullptr;
  /// Copy each round's personalized models into the log (costs memory).
  bool record_personalized = false;
};

/// Runs T rounds of privacy-preserving personalized training: broadcast ->
/// local step -> clip -> perturb -> upload/aggregate, with the personalized
/// model updated against the same broadcast. Noise draws use one dedicated
/// stream per (client, round), so runs differing only in the privacy budget
/// share every other random decision. Deterministic for fixed seed regardless
/// of worker count (per-client streams, index-ordered aggregation).
///
/// Clients run in parallel with `options.workers` threads; the aggregation is
/// the synchronization barrier.
std::vector<RoundLog> run_training(const TrainingConfig& config, const PrivacySpec& privacy,
                                   const LossModel& model,
                                   const std::vector<ClientDataset>& datasets,
                                   const TrainOptions& options = {});

/// Plain single-loop reference of run_training, kept for validating the
/// parallel path; must produce bit-identical logs.
std::vector<RoundLog> run_training_serial(const TrainingConfig& config,
                                          const PrivacySpec& privacy, const LossModel& model,
                                          const std::vector<ClientDataset>& datasets,
                                          const TrainOptions& options = {});

}  // namespace dpfl::fedsim

#endif  // DPFL_FEDSIM_HPP
