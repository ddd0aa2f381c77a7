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

#ifndef DPFL_FAIRNESS_HPP
#define DPFL_FAIRNESS_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "dpfl/blr.hpp"
#include "dpfl/types.hpp"

namespace dpfl::fairness {

/// Inputs of the closed-form fairness measure R(lambda) for the linear
/// regression testbed. s1/s2 weight the own-versus-others estimate mixture,
/// g1/g2 are the heterogeneity moments of a fixed estimate snapshot, and
/// sigma_w2/sigma_z2 are the posterior-scatter and DP-noise variances.
struct FairnessParams {
  double s1 = 0.1;
  double s2 = 0.1;  // always 1/N
  double g1 = 0.0;
  double g2 = 0.0;
  double sigma_w2 = 1.0;
  double sigma_z2 = 0.0;
  int n = 2;
  int d = 1;
  int b = 4;
  double rho = 1.0;

  void validate() const {
    if (n < 1 || d < 1 || b < 1) throw DomainError("FairnessParams: n, d, b must be >= 1");
    if (!(sigma_w2 >= 0)) throw DomainError("FairnessParams: sigma_w2 must be >= 0");
    if (!(sigma_z2 >= 0)) throw DomainError("FairnessParams: sigma_z2 must be >= 0");
    if (!(g1 >= 0) || !(g2 >= 0)) throw DomainError("FairnessParams: g1, g2 must be >= 0");
    if (!(rho > 0)) throw DomainError("FairnessParams: rho must be > 0");
  }
};

/// Mixing coefficient b*lambda / ((2-lambda)*rho + b*lambda): how much the
/// personalized optimum leans on the shared model. Strictly increasing,
/// alpha0(0)=0, alpha0(2)=1.
double alpha0(double lambda, double b, double rho);

/// alpha1(lambda) = S1 - S2 * alpha0(lambda); zero exactly at alpha0 = N*S1.
double alpha1(double lambda, const FairnessParams& fp);

/// Variance of each deviation coordinate: sigma_w^2 + alpha0^2 sigma_z^2/N^2.
double sigma_b2(double lambda, const FairnessParams& fp);

struct AlphaCoeffs {
  Eigen::MatrixXd alpha;  // N x d, alpha_nl = (N-1) u_hat_nl - sum_{m!=n} u_hat_ml
  double g1 = 0.0;        // sum_l (1/N) sum_n alpha_nl^2
  double g2 = 0.0;        // (1/N) sum_n (sum_l alpha_nl^2)^2
};

AlphaCoeffs alpha_coeffs(const std::vector<ModelVector>& u_hat);

/// Closed-form fairness (variance of squared deviations across clients):
///   R = 2 d sigma_B^4 + 4 sigma_B^2 alpha1^2 G1 + alpha1^4 (G2 - G1^2).
/// Lower is fairer. Increasing in sigma_z^2 for every lambda > 0.
double fairness_R(double lambda, const FairnessParams& fp);

/// Builds FairnessParams from a generated instance snapshot and a DP noise
/// variance: S1 = sigma^2/(N(sigma^2 + rho zeta^2)), S2 = 1/N, G1/G2 from the
/// estimates, sigma_w2 from the posterior form.
FairnessParams make_fairness_params(const blr::BlrParams& params,
                                    const std::vector<ModelVector>& u_hat, double sigma_z2);

enum class McMode {
  kIndependent,  // B_nl i.i.d. N(0, sigma_B^2) per client and coordinate
  kCorrelated,   // shared aggregate-noise term across clients, same marginals
};

struct McResult {
  double estimate = 0.0;
  double stderr_est = 0.0;
  long trials = 0;
};

/// Monte-Carlo check of fairness_R. With A_nl = alpha1 * alpha_nl fixed and
/// B drawn per mode, each trial produces X_n = ||A_n + B_n||^2; the estimate
/// is mean[(1/N) sum X^2] - (mean[(1/N) sum X])^2, i.e. second moments taken
/// before the across-client square, matching the closed form's expectation
/// model. Standard error via the delta method on the two trial means.
///
/// Runs trial blocks in parallel (per-block streams, index-ordered
/// reduction); results are bit-identical for any worker count.
McResult mc_oracle(double lambda, const FairnessParams& fp, const std::vector<ModelVector>& u_hat,
                   long trials, std::uint64_t seed, McMode mode = McMode::kIndependent,
                   int workers = 1);

/// Single-loop reference of mc_oracle, kept for validating the parallel path.
McResult mc_oracle_serial(double lambda, const FairnessParams& fp,
                          const std::vector<ModelVector>& u_hat, long trials, std::uint64_t seed,
                          McMode mode = McMode::kIndependent);

}  // namespace dpfl::fairness

#endif  // DPFL_FAIRNESS_HPP
