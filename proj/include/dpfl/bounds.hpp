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

#ifndef DPFL_BOUNDS_HPP
#define DPFL_BOUNDS_HPP

#include <variant>

#include "dpfl/types.hpp"

namespace dpfl::bounds {

/// Inputs plus derived scalars of the convergence bounds. The contraction
/// factors are
///   eps_l = 1 - eta_l*((1 - lambda/2)*mu + lambda) + eta_l
///   eps_g = 1 - 2*mu*eta_g + mu*eta_g^2*L
/// with gradient-scale G, personalization coupling beta, and per-round DP
/// penalty phi_l = delta_s^2 * L * d * ln(1/delta) / (N^2 eps^2). The
/// lambda-dependent scalars stored here are derived at `lambda`; evaluators
/// accept a different lambda and re-derive on the fly.
struct BoundParams {
  AssumptionParams assumption;
  double eta_g = 0.0;
  double eta_l = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  double clip_c = 0.0;
  double delta_s = 0.0;
  int n = 1;
  int d = 1;

  double eps_l = 0.0;
  double eps_g = 0.0;
  double g_const = 0.0;
  double beta = 0.0;
  double phi_l = 0.0;
  double phi = 0.0;

  /// False when eta_g > 2/L or mu <= (2-2*lambda)/(2-lambda); bounds are
  /// still evaluable but only heuristic.
  bool assumptions_hold = true;
};

/// Computes every derived scalar. Precondition violations produce a
/// warning-tagged result (assumptions_hold = false), not an error.
BoundParams derive_constants(const AssumptionParams& assumption, const TrainingConfig& config,
                             const PrivacySpec& privacy, int d, double delta_s);

/// FL convergence upper bound after t rounds:
///   eps_g^t * Psi1 + (1 - eps_g^t) * phi * t / (N eps^2).
double global_bound(const BoundParams& bp, long t);

/// Personalized-model convergence upper bound h(T, lambda) after T
/// aggregations. Uses the distinct-contraction closed form when
/// |eps_l - eps_g| > 1e-9 and the equal-contraction form otherwise (the
/// distinct form divides by eps_l - eps_g). h(0, lambda) = Psi2 exactly.
double h(const BoundParams& bp, long t, double lambda);
double h(const BoundParams& bp, long t);

/// Coefficient view h(T) = (H1 + H2 T) eps_l^T + (H3 + H4 T) eps_g^T
///                         + H5 T + H6.
struct Branch1Coeffs {
  double h1, h2, h3, h4, h5, h6;
  double eps_l, eps_g;
};

/// Equal-contraction view h(T) = (c1 + c2 T + c3 T^2) eps_l^T
///                               + slope T + offset.
/// slope and offset are the eps_g -> eps_l limits of H5 and H6.
struct Branch2Coeffs {
  double c1, c2, c3, slope, offset;
  double eps_l;
};

using HCoeffs = std::variant<Branch1Coeffs, Branch2Coeffs>;

/// Reorganizes h into the coefficient view and checks the signs the case
/// analysis guarantees (H5, H6 >= 0; c3 <= 0); violations throw
/// InternalConsistencyError (parameters outside the analyzed regime).
HCoeffs h_coeffs(const BoundParams& bp, double lambda);

double reconstruct_h(const HCoeffs& coeffs, long t);

/// Linear floor h(T) >= h0 + slope*T for all T >= 0, built by folding each
/// sign-definite term to its analytic minimum (c*T*eps^T is minimal at
/// T = -1/ln eps, c*T^2*eps^T at T = -2/ln eps).
struct LinearLowerBound {
  double h0;
  double slope;
};

LinearLowerBound lower_bound(const BoundParams& bp, double lambda);

struct SearchTResult {
  long t_star = 0;
  double h_star = 0.0;
  /// Upper limit of the search window: h(T) > h(0) for all T > t_prime.
  double t_prime = 0.0;
  /// True when the floor has no positive slope (no DP penalty), so no finite
  /// window exists and the scan stopped at the cap.
  bool unbounded_improvement = false;
  /// True when the window exceeded the cap and was truncated.
  bool capped = false;
};

/// Integer minimizer of h over [0, t_prime] with t_prime =
/// (h(0) - h0)/slope; unit-step scan. Returns t_star = 0 when no
/// aggregation helps (t_prime <= 0).
SearchTResult search_T(const BoundParams& bp, double lambda, long t_cap = 100000);

}  // namespace dpfl::bounds

#endif  // DPFL_BOUNDS_HPP
