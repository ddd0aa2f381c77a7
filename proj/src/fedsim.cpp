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

#include "dpfl/fedsim.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dpfl/dp.hpp"
#include "dpfl/errors.hpp"

namespace dpfl::fedsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ClientDataset sample_minibatch(const ClientDataset& data, int batch, RandomSource& rng) {
  ClientDataset out;
  out.features.resize(batch, data.dim());
  if (data.has_targets()) out.targets.resize(batch);
  if (data.has_labels()) out.labels.resize(static_cast<std::size_t>(batch));
  for (int r = 0; r < batch; ++r) {
    const auto i = static_cast<Eigen::Index>(rng.uniform_below(static_cast<std::uint64_t>(data.size())));
    out.features.row(r) = data.features.row(i);
    if (data.has_targets()) out.targets[r] = data.targets[i];
    if (data.has_labels()) out.labels[static_cast<std::size_t>(r)] = data.labels[static_cast<std::size_t>(i)];
  }
  return out;
}

struct ClientOutcome {
  ModelVector upload;
  double loss = 0.0;
  double accuracy = kNaN;
  bool failed = false;
  std::exception_ptr error;
};

}  // namespace

ModelVector local_step(const ModelVector& u, const LossModel& model, const ClientDataset& data,
                       double eta_g) {
  return u - eta_g * model.grad(u, data);
}

ModelVector personalized_step(const ModelVector& p, const ModelVector& omega,
                              const LossModel& model, const ClientDataset& data, double eta_l,
                              double lambda) {
  if (p.size() != omega.size()) throw ShapeError("personalized_step: model dimension mismatch");
  if (!(lambda >= 0 && lambda <= 2)) throw DomainError("personalized_step: lambda must be in [0,2]");
  return p - eta_l * ((1.0 - lambda / 2.0) * model.grad(p, data) + lambda * (p - omega));
}

ModelVector aggregate(const std::vector<ModelVector>& uploads) {
  if (uploads.empty()) throw DomainError("aggregate: no uploads");
  ModelVector sum = uploads[0];
  for (std::size_t i = 1; i < uploads.size(); ++i) {
    if (uploads[i].size() != sum.size()) throw ShapeError("aggregate: dimension mismatch");
    sum += uploads[i];
  }
  return sum / static_cast<double>(uploads.size());
}

double empirical_fairness(std::span<const double> losses) {
  if (losses.empty()) throw DomainError("empirical_fairness: no losses");
  const double n = static_cast<double>(losses.size());
  const double mean = std::accumulate(losses.begin(), losses.end(), 0.0) / n;
  double var = 0.0;
  for (double l : losses) var += (l - mean) * (l - mean);
  return var / n;
}

namespace {

std::vector<RoundLog> run_impl(const TrainingConfig& config, const PrivacySpec& privacy,
                               const LossModel& model, const std::vector<ClientDataset>& datasets,
                               const TrainOptions& options, bool parallel) {
  config.validate();
  privacy.validate();
  if (static_cast<int>(datasets.size()) != config.n_clients) {
    throw ShapeError("run_training: dataset count does not match n_clients");
  }
  for (const auto& ds : datasets) {
    ds.validate();
    if (ds.size() != datasets[0].size()) {
      throw DomainError("run_training: client datasets must share one size");
    }
    if (ds.dim() != datasets[0].dim()) {
      throw ShapeError("run_training: client datasets must share one feature width");
    }
  }
  if (options.eval_datasets && options.eval_datasets->size() != datasets.size()) {
    throw ShapeError("run_training: eval dataset count does not match n_clients");
  }

  const int n = config.n_clients;
  const int t_total = config.rounds;
  const int dim = model.param_dim(datasets[0].dim());
  const int epochs = std::max(1, options.local_epochs);

  double sigma_u = 0.0;
  if (t_total >= 1) {
    const double delta_s = dp::sensitivity(privacy.clip_c, datasets[0].size());
    sigma_u = dp::calibrate(delta_s, t_total, n, privacy.epsilon, privacy.delta).sigma_u;
  }

  ModelVector global = options.global_init ? *options.global_init : ModelVector::Zero(dim);
  if (global.size() != dim) throw ShapeError("run_training: bad global initialization size");
  check_model_vector(global, "run_training initial global");

  std::vector<ModelVector> personalized;
  if (options.personalized_init) {
    if (static_cast<int>(options.personalized_init->size()) != n) {
      throw ShapeError("run_training: bad personalized initialization count");
    }
    personalized = *options.personalized_init;
    for (const auto& p : personalized) {
      if (p.size() != dim) throw ShapeError("run_training: bad personalized initialization size");
    }
  } else {
    personalized.assign(static_cast<std::size_t>(n), ModelVector::Zero(dim));
  }

  std::vector<RoundLog> logs;
  logs.reserve(static_cast<std::size_t>(t_total));

  for (int t = 0; t < t_total; ++t) {
    std::vector<ClientOutcome> outcomes(static_cast<std::size_t>(n));

    auto client_body = [&](int c) {
      const auto cu = static_cast<std::size_t>(c);
      const ClientDataset& data = datasets[cu];
      ClientOutcome& out = outcomes[cu];

      RandomSource data_rng =
          seeded_rng(config.seed, stream::make(stream::kData, static_cast<std::uint64_t>(c),
                                               static_cast<std::uint64_t>(t)));
      auto batch_view = [&]() -> ClientDataset {
        return sample_minibatch(data, options.minibatch, data_rng);
      };

      ModelVector u = global;  // line 4: local model restarts from the broadcast
      for (int e = 0; e < epochs; ++e) {
        u = options.minibatch > 0 ? local_step(u, model, batch_view(), config.eta_g)
                                  : local_step(u, model, data, config.eta_g);
      }
      u = dp::clip_model(u, privacy.clip_c);
      RandomSource noise_rng =
          seeded_rng(config.seed, stream::make(stream::kNoise, static_cast<std::uint64_t>(c),
                                               static_cast<std::uint64_t>(t)));
      out.upload = dp::perturb(u, sigma_u, noise_rng);

      ModelVector p = personalized[cu];
      for (int e = 0; e < epochs; ++e) {
        p = options.minibatch > 0
                ? personalized_step(p, global, model, batch_view(), config.eta_l, config.lambda)
                : personalized_step(p, global, model, data, config.eta_l, config.lambda);
      }
      personalized[cu] = p;

      if (!out.upload.allFinite() || !p.allFinite()) {
        out.failed = true;
        return;
      }
      out.loss = model.loss(p, data);
      if (model.is_classifier()) {
        const ClientDataset& eval =
            options.eval_datasets ? (*options.eval_datasets)[cu] : data;
        out.accuracy = model.accuracy(p, eval);
      }
      if (!std::isfinite(out.loss)) out.failed = true;
    };

    // Exceptions may not escape the parallel region; capture and rethrow.
    auto client_work = [&](int c) {
      try {
        client_body(c);
      } catch (...) {
        outcomes[static_cast<std::size_t>(c)].error = std::current_exception();
      }
    };

    if (parallel && options.workers > 1) {
#ifdef _OPENMP
#pragma omp parallel for num_threads(options.workers) schedule(static)
      for (int c = 0; c < n; ++c) client_work(c);
#else
      for (int c = 0; c < n; ++c) client_work(c);
#endif
    } else {
      for (int c = 0; c < n; ++c) client_work(c);
    }

    for (int c = 0; c < n; ++c) {
      if (outcomes[static_cast<std::size_t>(c)].error) {
        std::rethrow_exception(outcomes[static_cast<std::size_t>(c)].error);
      }
    }
    for (int c = 0; c < n; ++c) {
      if (outcomes[static_cast<std::size_t>(c)].failed) {
        throw NumericFailure("run_training: non-finite model at round " + std::to_string(t) +
                                 ", client " + std::to_string(c),
                             t, c);
      }
    }

    std::vector<ModelVector> uploads;
    uploads.reserve(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) uploads.push_back(std::move(outcomes[static_cast<std::size_t>(c)].upload));
    global = aggregate(uploads);
    if (!global.allFinite()) {
      throw NumericFailure("run_training: non-finite aggregate at round " + std::to_string(t), t, -1);
    }

    RoundLog log;
    log.round = t;
    log.global_model = global;
    log.personalized_losses.resize(static_cast<std::size_t>(n));
    log.accuracies.resize(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
      log.personalized_losses[static_cast<std::size_t>(c)] = outcomes[static_cast<std::size_t>(c)].loss;
      log.accuracies[static_cast<std::size_t>(c)] = outcomes[static_cast<std::size_t>(c)].accuracy;
    }
    log.mean_personalized_loss =
        std::accumulate(log.personalized_losses.begin(), log.personalized_losses.end(), 0.0) /
        static_cast<double>(n);
    log.mean_accuracy =
        model.is_classifier()
            ? std::accumulate(log.accuracies.begin(), log.accuracies.end(), 0.0) / static_cast<double>(n)
            : kNaN;
    log.empirical_fairness = empirical_fairness(log.personalized_losses);

    std::vector<double> glosses(static_cast<std::size_t>(n));
    auto gloss_work = [&](int c) {
      glosses[static_cast<std::size_t>(c)] = model.loss(global, datasets[static_cast<std::size_t>(c)]);
    };
    if (parallel && options.workers > 1) {
#ifdef _OPENMP
#pragma omp parallel for num_threads(options.workers) schedule(static)
      for (int c = 0; c < n; ++c) gloss_work(c);
#else
      for (int c = 0; c < n; ++c) gloss_work(c);
#endif
    } else {
      for (int c = 0; c < n; ++c) gloss_work(c);
    }
    log.global_train_loss =
        std::accumulate(glosses.begin(), glosses.end(), 0.0) / static_cast<double>(n);

    if (options.record_personalized) log.personalized_models = personalized;

    logs.push_back(std::move(log));
  }

  return logs;
}

}  // namespace

std::vector<RoundLog> run_training(const TrainingConfig& config, const PrivacySpec& privacy,
                                   const LossModel& model,
                                   const std::vector<ClientDataset>& datasets,
                                   const TrainOptions& options) {
  return run_impl(config, privacy, model, datasets, options, /*parallel=*/true);
}

std::vector<RoundLog> run_training_serial(const TrainingConfig& config,
                                          const PrivacySpec& privacy, const LossModel& model,
                                          const std::vector<ClientDataset>& datasets,
                                          const TrainOptions& options) {
  return run_impl(config, privacy, model, datasets, options, /*parallel=*/false);
}

}  // namespace dpfl::fedsim
