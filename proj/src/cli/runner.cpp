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

#include "dpfl/cli/runner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "dpfl/bounds.hpp"
#include "dpfl/cli/csv.hpp"
#include "dpfl/cli/idx.hpp"
#include "dpfl/dp.hpp"
#include "dpfl/fairness.hpp"
#include "dpfl/lambdaopt.hpp"

namespace dpfl::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

namespace fs = std::filesystem;
using nlohmann::json;

TrainingConfig training_config(const ExperimentConfig& cfg) {
  TrainingConfig tc;
  tc.n_clients = cfg.n_clients;
  tc.rounds = cfg.rounds;
  tc.eta_g = cfg.eta_g;
  tc.eta_l = cfg.eta_l;
  tc.lambda = cfg.lambda;
  tc.seed = cfg.seed;
  return tc;
}

PrivacySpec privacy_spec(const ExperimentConfig& cfg) {
  return PrivacySpec{cfg.epsilon, cfg.delta, cfg.clip};
}

AssumptionParams assumption_params(const ExperimentConfig& cfg) {
  return AssumptionParams{cfg.mu, cfg.l_smooth, cfg.g0, cfg.m_dist, cfg.psi1, cfg.psi2};
}

LossModel make_model(const ExperimentConfig& cfg) {
  if (cfg.model == "quadratic") return LossModel::quadratic();
  if (cfg.model == "mlr") return LossModel::mlr(cfg.classes);
  return LossModel::mlp(cfg.hidden, cfg.classes);
}

ClientDataset synth_classification(const ExperimentConfig& cfg) {
  RandomSource rng = seeded_rng(cfg.seed, stream::make(stream::kInit, 1));
  const int k = cfg.classes;
  const int f = cfg.synth_features;
  Eigen::MatrixXd centers(k, f);
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < f; ++j) centers(c, j) = cfg.synth_class_sep * rng.normal();
  }
  ClientDataset full;
  full.features.resize(cfg.synth_samples, f);
  full.labels.resize(static_cast<std::size_t>(cfg.synth_samples));
  for (int i = 0; i < cfg.synth_samples; ++i) {
    const int label = i % k;
    for (int j = 0; j < f; ++j) full.features(i, j) = centers(label, j) + rng.normal();
    full.labels[static_cast<std::size_t>(i)] = label;
  }
  return full;
}

// Class-balanced prefix subset: floor(limit/classes) samples per label in
// file order.
ClientDataset balanced_subset(const ClientDataset& full, int limit) {
  std::map<int, int> quota_used;
  int distinct = 0;
  {
    std::map<int, int> counts;
    for (int l : full.labels) ++counts[l];
    distinct = static_cast<int>(counts.size());
  }
  const int per_class = std::max(1, limit / std::max(1, distinct));
  std::vector<int> keep;
  for (int i = 0; i < full.size(); ++i) {
    const int l = full.labels[static_cast<std::size_t>(i)];
    if (quota_used[l] < per_class) {
      ++quota_used[l];
      keep.push_back(i);
    }
  }
  ClientDataset out;
  out.features.resize(static_cast<Eigen::Index>(keep.size()), full.dim());
  out.labels.resize(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = full.features.row(keep[r]);
    out.labels[r] = full.labels[static_cast<std::size_t>(keep[r])];
  }
  return out;
}

void split_holdout(std::vector<ClientDataset>& train, std::vector<ClientDataset>& eval,
                   double fraction) {
  if (fraction <= 0.0) return;
  eval.clear();
  for (auto& ds : train) {
    const int held = static_cast<int>(std::floor(fraction * ds.size()));
    if (held < 1 || ds.size() - held < 1) {
      throw ConfigError("holdout_fraction leaves an empty train or eval split", 0);
    }
    const int kept = ds.size() - held;
    ClientDataset ev;
    ev.features = ds.features.bottomRows(held);
    if (ds.has_labels()) {
      ev.labels.assign(ds.labels.end() - held, ds.labels.end());
      ds.labels.resize(static_cast<std::size_t>(kept));
    }
    if (ds.has_targets()) {
      ev.targets = ds.targets.tail(held);
      ds.targets = ds.targets.head(kept).eval();
    }
    ds.features = ds.features.topRows(kept).eval();
    eval.push_back(std::move(ev));
  }
}

PartitionScheme partition_scheme(const ExperimentConfig& cfg) {
  return cfg.partition == "iid" ? PartitionScheme::iid()
                                : PartitionScheme::label_shard(cfg.shards_per_client);
}

}  // namespace

ExperimentData build_experiment(const ExperimentConfig& cfg) {
  ExperimentData data;
  data.model = make_model(cfg);

  if (cfg.dataset == "synthetic-blr") {
    blr::BlrParams params{cfg.n_clients, cfg.blr_samples_per_client, cfg.blr_dim,
                          cfg.blr_rho,   cfg.blr_zeta2,              cfg.blr_sigma2};
    RandomSource rng = seeded_rng(cfg.seed, stream::make(stream::kBlr, 0));
    blr::BlrInstance inst = blr::generate_instance(params, ModelVector::Zero(cfg.blr_dim), rng);
    for (int c = 0; c < cfg.n_clients; ++c) {
      ClientDataset ds;
      ds.features = inst.designs[static_cast<std::size_t>(c)];
      ds.targets = inst.observations[static_cast<std::size_t>(c)];
      data.train.push_back(std::move(ds));
    }
    data.instance = std::move(inst);
    return data;
  }

  ClientDataset full;
  if (cfg.dataset == "synthetic-classification") {
    full = synth_classification(cfg);
  } else {
    full = read_idx(cfg.idx_images, cfg.idx_labels);
    if (cfg.idx_limit > 0) full = balanced_subset(full, cfg.idx_limit);
  }

  RandomSource prng = seeded_rng(cfg.seed, stream::make(stream::kPartition, 0));
  data.train = partition_dataset(full, cfg.n_clients, partition_scheme(cfg), prng);
  split_holdout(data.train, data.eval, cfg.holdout_fraction);

  if (cfg.dataset == "idx-files" && !cfg.idx_test_images.empty()) {
    ClientDataset test = read_idx(cfg.idx_test_images, cfg.idx_test_labels);
    RandomSource trng = seeded_rng(cfg.seed, stream::make(stream::kPartition, 1));
    data.eval = partition_dataset(test, cfg.n_clients, PartitionScheme::iid(), trng);
  }
  return data;
}

void write_rounds_csv(const std::string& path, const std::vector<fedsim::RoundLog>& logs) {
  CsvWriter csv(path, {"round", "client", "loss", "accuracy", "fairness"});
  for (const auto& log : logs) {
    for (std::size_t c = 0; c < log.personalized_losses.size(); ++c) {
      csv.row({fmt(log.round), fmt(static_cast<int>(c)), fmt(log.personalized_losses[c]),
               fmt(log.accuracies[c]), ""});
    }
    csv.row({fmt(log.round), "-1", fmt(log.mean_personalized_loss), fmt(log.mean_accuracy),
             fmt(log.empirical_fairness)});
  }
}

namespace {

// Rows keyed (group, round) averaged across seeds.
void emit_grouped_metric_series(const std::string& path,
                                const std::vector<RunTrace::Entry>& entries,
                                bool group_by_lambda) {
  CsvWriter csv(path, {group_by_lambda ? "lambda" : "epsilon", "round", "mean_loss",
                       "mean_accuracy", "fairness"});
  std::map<double, std::map<int, std::array<double, 4>>> acc;  // group -> round -> sums+count
  for (const auto& e : entries) {
    const double group = group_by_lambda ? e.lambda : e.epsilon;
    for (const auto& log : e.logs) {
      auto& cell = acc[group][log.round];
      cell[0] += log.mean_personalized_loss;
      cell[1] += log.mean_accuracy;
      cell[2] += log.empirical_fairness;
      cell[3] += 1.0;
    }
  }
  for (const auto& [group, rounds] : acc) {
    for (const auto& [round, cell] : rounds) {
      csv.row({fmt(group), fmt(round), fmt(cell[0] / cell[3]), fmt(cell[1] / cell[3]),
               fmt(cell[2] / cell[3])});
    }
  }
}

}  // namespace

void emit_plot_series(const std::string& out_dir, const RunTrace& trace) {
  fs::create_directories(out_dir);

  std::vector<RunTrace::Entry> eps_entries;
  std::vector<RunTrace::Entry> lambda_entries;
  {
    std::map<double, int> lambdas, epsilons;
    for (const auto& e : trace.entries) {
      ++lambdas[e.lambda];
      ++epsilons[e.epsilon];
    }
    for (const auto& e : trace.entries) {
      if (lambdas.size() <= 1) eps_entries.push_back(e);
      if (epsilons.size() <= 1 && lambdas.size() > 1) lambda_entries.push_back(e);
    }
  }
  emit_grouped_metric_series(out_dir + "/series_metric_vs_round_per_epsilon.csv", eps_entries,
                             false);
  emit_grouped_metric_series(out_dir + "/series_metric_vs_round_per_lambda.csv", lambda_entries,
                             true);

  {
    CsvWriter csv(out_dir + "/series_fairness_vs_lambda.csv", {"T", "lambda", "R"});
    for (const auto& row : trace.fairness_vs_lambda) {
      csv.row({fmt(row.t), fmt(row.lambda), fmt(row.r)});
    }
  }
  {
    CsvWriter csv(out_dir + "/series_h_vs_T.csv", {"T", "h", "h_low", "global_bound"});
    for (const auto& row : trace.h_vs_t) {
      csv.row({fmt(row.t), fmt(row.h), fmt(row.h_low), fmt(row.global)});
    }
  }
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path);
  out << text;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& hash,
                    const std::string& command) {
  json j;
  j["artifact_version"] = kVersion;
  j["command"] = command;
  j["config_hash"] = hash;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  write_text(cfg.out_dir + "/manifest.json", j.dump(2) + "\n");
}

double delta_s_of(const ExperimentConfig& cfg, const ExperimentData& data) {
  return dp::sensitivity(cfg.clip, data.train.at(0).size());
}

json final_metrics(const std::vector<fedsim::RoundLog>& logs) {
  json j;
  if (logs.empty()) {
    j["rounds"] = 0;
    return j;
  }
  const auto& last = logs.back();
  j["rounds"] = static_cast<int>(logs.size());
  j["mean_personalized_loss"] = last.mean_personalized_loss;
  j["mean_accuracy"] = fmt(last.mean_accuracy);
  j["fairness"] = last.empirical_fairness;
  j["global_train_loss"] = last.global_train_loss;
  return j;
}

struct EntrySpec {
  double epsilon;
  std::uint64_t seed;
};

std::vector<fedsim::RoundLog> run_one(const ExperimentConfig& base, double epsilon,
                                      std::uint64_t seed, double lambda, int rounds, int workers) {
  ExperimentConfig cfg = base;
  cfg.epsilon = epsilon;
  cfg.seed = seed;
  cfg.lambda = lambda;
  cfg.rounds = rounds;
  ExperimentData data = build_experiment(cfg);
  fedsim::TrainOptions opts;
  opts.workers = workers;
  opts.local_epochs = cfg.local_epochs;
  opts.minibatch = cfg.minibatch;
  if (!data.eval.empty()) opts.eval_datasets = &data.eval;
  return fedsim::run_training(training_config(cfg), privacy_spec(cfg), data.model, data.train,
                              opts);
}

// ---- analyses shared by `train` toggles and the dedicated subcommands ----

json bounds_analysis(const ExperimentConfig& cfg, const ExperimentData& data, RunTrace& trace) {
  const int d = data.model.param_dim(data.train.at(0).dim());
  const bounds::BoundParams bp =
      bounds::derive_constants(assumption_params(cfg), training_config(cfg), privacy_spec(cfg), d,
                               delta_s_of(cfg, data));
  const bounds::LinearLowerBound lb = bounds::lower_bound(bp, cfg.lambda);
  for (long t = 0; t <= cfg.t_max; ++t) {
    trace.h_vs_t.push_back(
        {t, bounds::h(bp, t, cfg.lambda), lb.h0 + lb.slope * static_cast<double>(t),
         bounds::global_bound(bp, t)});
  }
  const bounds::SearchTResult st = bounds::search_T(bp, cfg.lambda);

  json j;
  j["heuristic"] = !bp.assumptions_hold;
  j["eps_l"] = bp.eps_l;
  j["eps_g"] = bp.eps_g;
  j["phi_l"] = bp.phi_l;
  j["t_star"] = st.t_star;
  j["h_star"] = st.h_star;
  j["t_prime"] = fmt(st.t_prime);
  j["unbounded_improvement"] = st.unbounded_improvement;
  return j;
}

json fairness_analysis(const ExperimentConfig& cfg, const ExperimentData& data, RunTrace& trace) {
  if (!data.instance) {
    throw ConfigError("fairness analysis requires dataset = synthetic-blr", 0);
  }
  const auto& inst = *data.instance;
  const double delta_s = delta_s_of(cfg, data);

  json per_t = json::array();
  for (int t : cfg.t_grid) {
    const double sigma_z =
        dp::calibrate(delta_s, t, cfg.n_clients, cfg.epsilon, cfg.delta).sigma_z;
    const fairness::FairnessParams fp =
        fairness::make_fairness_params(inst.params, inst.u_hat, sigma_z * sigma_z);
    for (double lambda : cfg.lambda_grid) {
      trace.fairness_vs_lambda.push_back({t, lambda, fairness::fairness_R(lambda, fp)});
    }
    json row;
    row["T"] = t;
    row["sigma_z2"] = sigma_z * sigma_z;
    const bool unique = lambdaopt::uniqueness_condition(cfg.clip, fp.d, fp.n, fp.s1);
    row["unique"] = unique;
    try {
      const auto roots = lambdaopt::solve_alpha0(lambdaopt::expand_cubic(fp), unique);
      if (roots.primary) {
        row["lambda_star"] =
            lambdaopt::alpha0_to_lambda(*roots.primary, static_cast<double>(fp.b), fp.rho);
      }
    } catch (const DegenerateError&) {
      row["lambda_star"] = nullptr;  // flat fairness in lambda
    }
    per_t.push_back(row);
  }
  json j;
  j["per_T"] = per_t;
  return j;
}

json optimize_analysis(const ExperimentConfig& cfg, const ExperimentData& data) {
  if (!data.instance) {
    throw ConfigError("joint optimization requires dataset = synthetic-blr", 0);
  }
  const auto& inst = *data.instance;
  const int d = data.model.param_dim(data.train.at(0).dim());
  const bounds::BoundParams bp =
      bounds::derive_constants(assumption_params(cfg), training_config(cfg), privacy_spec(cfg), d,
                               delta_s_of(cfg, data));
  const fairness::FairnessParams fp = fairness::make_fairness_params(inst.params, inst.u_hat, 0.0);
  const lambdaopt::JointSearchResult res = lambdaopt::joint_search(bp, fp, cfg.t_max);

  CsvWriter csv(cfg.out_dir + "/optimize_trace.csv", {"T", "lambda", "h", "R"});
  for (const auto& row : res.trace) {
    csv.row({fmt(row.t), fmt(row.lambda), fmt(row.h), fmt(row.r)});
  }

  json j;
  j["t_star"] = res.t_star;
  j["lambda_star"] = res.lambda_star;
  j["h_star"] = res.h_star;
  j["r_star"] = res.r_star;
  j["unique"] = res.unique;
  j["cubic_solves"] = res.cubic_solves;
  return j;
}

json oracle_analysis(const ExperimentConfig& cfg, const ExperimentData& data) {
  if (!data.instance) {
    throw ConfigError("the fairness oracle requires dataset = synthetic-blr", 0);
  }
  const auto& inst = *data.instance;
  const int rounds = std::max(1, cfg.rounds);
  const double sigma_z =
      dp::calibrate(delta_s_of(cfg, data), rounds, cfg.n_clients, cfg.epsilon, cfg.delta).sigma_z;
  const fairness::FairnessParams fp =
      fairness::make_fairness_params(inst.params, inst.u_hat, sigma_z * sigma_z);

  CsvWriter csv(cfg.out_dir + "/oracle.csv",
                {"lambda", "closed_form", "mc_independent", "stderr_independent", "z_independent",
                 "mc_correlated", "stderr_correlated"});
  double worst_z = 0.0;
  for (double lambda : cfg.lambda_grid) {
    const double closed = fairness::fairness_R(lambda, fp);
    const auto ind = fairness::mc_oracle(lambda, fp, inst.u_hat, cfg.oracle_trials, cfg.seed,
                                         fairness::McMode::kIndependent, cfg.workers);
    const auto cor = fairness::mc_oracle(lambda, fp, inst.u_hat, cfg.oracle_trials, cfg.seed,
                                         fairness::McMode::kCorrelated, cfg.workers);
    const double z =
        ind.stderr_est > 0 ? std::abs(ind.estimate - closed) / ind.stderr_est : 0.0;
    worst_z = std::max(worst_z, z);
    csv.row({fmt(lambda), fmt(closed), fmt(ind.estimate), fmt(ind.stderr_est), fmt(z),
             fmt(cor.estimate), fmt(cor.stderr_est)});
  }
  json j;
  j["trials"] = cfg.oracle_trials;
  j["max_abs_z_independent"] = worst_z;
  return j;
}

// ---- subcommands ----

int train_command(const ExperimentConfig& cfg, const std::string& hash) {
  const std::vector<double> eps_list =
      cfg.sweep_epsilons.empty() ? std::vector<double>{cfg.epsilon} : cfg.sweep_epsilons;
  const std::vector<std::uint64_t> seed_list =
      cfg.sweep_seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : cfg.sweep_seeds;

  std::vector<EntrySpec> specs;
  for (double e : eps_list) {
    for (std::uint64_t s : seed_list) specs.push_back({e, s});
  }

  RunTrace trace;
  trace.entries.resize(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());

  const bool parallel_entries = specs.size() > 1 && cfg.workers > 1;
  const int inner_workers = parallel_entries ? 1 : cfg.workers;

#ifdef _OPENMP
#pragma omp parallel for num_threads(cfg.workers) schedule(dynamic) if (parallel_entries)
#endif
  for (long i = 0; i < static_cast<long>(specs.size()); ++i) {
    try {
      auto& entry = trace.entries[static_cast<std::size_t>(i)];
      entry.epsilon = specs[static_cast<std::size_t>(i)].epsilon;
      entry.seed = specs[static_cast<std::size_t>(i)].seed;
      entry.lambda = cfg.lambda;
      entry.logs = run_one(cfg, entry.epsilon, entry.seed, cfg.lambda, cfg.rounds, inner_workers);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }

  fs::create_directories(cfg.out_dir);
  json entries_json = json::array();
  for (const auto& entry : trace.entries) {
    const std::string sub =
        cfg.out_dir + "/eps" + fmt(entry.epsilon) + "_seed" + std::to_string(entry.seed);
    fs::create_directories(sub);
    write_rounds_csv(sub + "/rounds.csv", entry.logs);
    json je;
    je["epsilon"] = fmt(entry.epsilon);
    je["seed"] = entry.seed;
    je["lambda"] = entry.lambda;
    je["final"] = final_metrics(entry.logs);
    entries_json.push_back(je);
  }

  json summary;
  summary["command"] = "train";
  summary["seed"] = cfg.seed;
  summary["entries"] = entries_json;

  ExperimentData base_data = build_experiment(cfg);
  if (cfg.analyze_bounds) summary["bounds"] = bounds_analysis(cfg, base_data, trace);
  if (cfg.analyze_fairness) summary["fairness"] = fairness_analysis(cfg, base_data, trace);
  if (cfg.analyze_optimize) summary["optimize"] = optimize_analysis(cfg, base_data);
  if (cfg.analyze_oracle) summary["oracle"] = oracle_analysis(cfg, base_data);

  emit_plot_series(cfg.out_dir, trace);
  write_text(cfg.out_dir + "/summary.json", summary.dump(2) + "\n");
  write_manifest(cfg, hash, "train");
  return kExitOk;
}

int analysis_command(const ExperimentConfig& cfg, const std::string& hash,
                     const std::string& which) {
  fs::create_directories(cfg.out_dir);
  ExperimentData data = build_experiment(cfg);
  RunTrace trace;
  json summary;
  summary["command"] = which;
  summary["seed"] = cfg.seed;
  if (which == "bounds") summary["bounds"] = bounds_analysis(cfg, data, trace);
  if (which == "fairness") summary["fairness"] = fairness_analysis(cfg, data, trace);
  if (which == "optimize") summary["optimize"] = optimize_analysis(cfg, data);
  if (which == "oracle") summary["oracle"] = oracle_analysis(cfg, data);
  emit_plot_series(cfg.out_dir, trace);
  write_text(cfg.out_dir + "/summary.json", summary.dump(2) + "\n");
  write_manifest(cfg, hash, which);
  return kExitOk;
}

int tune_command(const ExperimentConfig& cfg, const std::string& hash) {
  fs::create_directories(cfg.out_dir);

  auto objective = [&](int t, double lambda) -> double {
    try {
      const auto logs = run_one(cfg, cfg.epsilon, cfg.seed, lambda, t, cfg.workers);
      return logs.empty() ? std::numeric_limits<double>::quiet_NaN()
                          : logs.back().mean_personalized_loss;
    } catch (const NumericFailure&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  const lambdaopt::AlternatingResult res =
      lambdaopt::empirical_alternating_search(objective, cfg.t_grid, cfg.lambda_grid);

  {
    CsvWriter csv(cfg.out_dir + "/tune_trace.csv", {"T", "lambda", "objective"});
    for (const auto& row : res.trace) csv.row({fmt(row.t), fmt(row.lambda), fmt(row.value)});
  }

  // Metric-vs-round view at the tuned T across the lambda grid.
  RunTrace trace;
  for (double lambda : cfg.lambda_grid) {
    RunTrace::Entry entry;
    entry.epsilon = cfg.epsilon;
    entry.seed = cfg.seed;
    entry.lambda = lambda;
    entry.logs = run_one(cfg, cfg.epsilon, cfg.seed, lambda, res.t_star, cfg.workers);
    trace.entries.push_back(std::move(entry));
  }
  emit_plot_series(cfg.out_dir, trace);

  json summary;
  summary["command"] = "tune";
  summary["seed"] = cfg.seed;
  summary["tune"] = {{"t_star", res.t_star},
                     {"lambda_star", res.lambda_star},
                     {"objective", res.objective},
                     {"sweeps", res.sweeps},
                     {"evaluations", res.trace.size()}};
  write_text(cfg.out_dir + "/summary.json", summary.dump(2) + "\n");
  write_manifest(cfg, hash, "tune");
  return kExitOk;
}

int gradcheck_command(const ExperimentConfig& cfg) {
  struct Check {
    const char* name;
    LossModel model;
    double threshold;
  };
  const std::vector<Check> checks = {
      {"quadratic", LossModel::quadratic(), 1e-7},
      {"mlr", LossModel::mlr(3), 1e-5},
      {"mlp", LossModel::mlp(5, 3), 1e-4},
  };

  bool ok = true;
  for (const auto& check : checks) {
    RandomSource rng = seeded_rng(cfg.seed, stream::make(stream::kInit, 7));
    const int b = 12, f = 4;
    ClientDataset data;
    data.features.resize(b, f);
    for (int i = 0; i < b; ++i) {
      for (int j = 0; j < f; ++j) data.features(i, j) = rng.normal();
    }
    if (check.model.is_classifier()) {
      data.labels.resize(b);
      for (int i = 0; i < b; ++i) {
        data.labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_below(3));
      }
    } else {
      data.targets = rng.gaussian(b);
    }

    double worst = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
      const ModelVector w = rng.gaussian(check.model.param_dim(f), 0.5);
      worst = std::max(worst, finite_diff_check(check.model, w, data, 1e-5));
    }
    const bool pass = worst < check.threshold;
    ok = ok && pass;
    std::cout << "gradcheck " << check.name << ": max_rel_err=" << fmt(worst)
              << " threshold=" << fmt(check.threshold) << (pass ? " PASS" : " FAIL") << "\n";
  }
  return ok ? kExitOk : kExitNumeric;
}

}  // namespace

int run_command(const std::string& command, const std::string& config_path,
                const CliOverrides& overrides) {
  try {
    ExperimentConfig cfg = parse_config(config_path);
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.out) cfg.out_dir = *overrides.out;
    if (overrides.workers) {
      if (*overrides.workers < 1) throw ConfigError("--workers must be >= 1", 0);
      cfg.workers = *overrides.workers;
    }
    const std::string hash = config_hash(config_path);

    if (command == "train") return train_command(cfg, hash);
    if (command == "bounds" || command == "fairness" || command == "optimize" ||
        command == "oracle") {
      return analysis_command(cfg, hash, command);
    }
    if (command == "tune") return tune_command(cfg, hash);
    if (command == "gradcheck") return gradcheck_command(cfg);
    throw ConfigError("unknown command '" + command + "'", 0);
  } catch (const ConfigError& e) {
    std::cerr << "config error";
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure";
    if (e.round() >= 0) std::cerr << " (round " << e.round() << ", client " << e.client() << ")";
    std::cerr << ": " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace dpfl::cli
