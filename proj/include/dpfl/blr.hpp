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

#ifndef DPFL_BLR_HPP
#define DPFL_BLR_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "dpfl/rng.hpp"
#include "dpfl/types.hpp"

namespace dpfl::blr {

/// Synthetic Bayesian linear-regression world. Designs satisfy X^T X = rho*I
/// exactly, client optima scatter around the shared optimum with prior
/// variance zeta2, and observations carry noise variance sigma2.
struct BlrParams {
  int n = 2;        // clients
  int b = 4;        // samples per client
  int d = 2;        // dimension
  double rho = 1.0;
  double zeta2 = 1.0;
  double sigma2 = 1.0;

  void validate() const {
    if (n < 1) throw DomainError("BlrParams: need at least one client");
    if (b < d) throw DomainError("BlrParams: need b >= d for an orthogonal design");
    if (!(rho > 0)) throw DomainError("BlrParams: rho must be > 0");
    if (!(zeta2 >= 0)) throw DomainError("BlrParams: zeta2 must be >= 0");
    if (!(sigma2 > 0)) throw DomainError("BlrParams: sigma2 must be > 0");
  }
};

struct BlrInstance {
  BlrParams params;
  ModelVector omega_star;              // shared optimum used for synthesis
  std::vector<ModelVector> u_star;     // per-client optima omega_star + tau_n
  std::vector<Eigen::MatrixXd> designs;      // X_n, b x d
  std::vector<Eigen::VectorXd> observations; // Y_n = X_n u_star_n + nu_n
  std::vector<ModelVector> u_hat;      // least-squares estimates
};

/// Random b x d matrix with X^T X = rho * I_d (orthonormalized Gaussian
/// columns scaled by sqrt(rho)).
Eigen::MatrixXd make_design(int b, int d, double rho, RandomSource& rng);

/// Draws tau_n ~ N(0, zeta2 I), nu_n ~ N(0, sigma2 I), builds designs,
/// observations, and least-squares estimates.
BlrInstance generate_instance(const BlrParams& params, const ModelVector& omega_star,
                              RandomSource& rng);

/// Least-squares estimate (X^T X)^{-1} X^T Y.
ModelVector estimate_local(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Minimizer of the pooled loss: sum_n (X^T X)^{-1} X_n^T X_n u_hat_n; the
/// mean of the u_hat under orthogonal designs.
ModelVector global_optimum(const BlrInstance& instance);

/// Closed-form optimal personalized models when the shared model is built
/// from noisy uploads u_hat_n + z_n:
///   b/((2-lambda)rho + b*lambda) * [ ((2-lambda)rho/b + lambda/N) u_hat_n
///     + (lambda/N) sum_{m != n} u_hat_m + (lambda/N) sum_m z_m ].
std::vector<ModelVector> perturbed_personalized_optimum(const BlrInstance& instance, double lambda,
                                                        const std::vector<ModelVector>& noise);

/// Variance of the per-client posterior scatter:
///   sigma_w^2 = ( (N-1)/(sigma^2/rho + N zeta^2) + rho/sigma^2 )^{-1}.
double sigma_w2(const BlrParams& params);

struct MixtureCoefficients {
  double coef_self;
  double coef_other;
};

/// Coefficients of the posterior mean of the true local optimum given all
/// estimates: coef_self * u_hat_n + coef_other * sum_{m != n} u_hat_m.
MixtureCoefficients local_opt_mixture(const BlrParams& params);

/// JSON round-trip for oracle replay.
std::string to_json(const BlrInstance& instance);
BlrInstance from_json(const std::string& text);
void save_instance(const BlrInstance& instance, const std::string& path);
BlrInstance load_instance(const std::string& path);

}  // namespace dpfl::blr

#endif  // DPFL_BLR_HPP
