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

#include "dpfl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpfl/errors.hpp"

namespace dpfl::bounds {

namespace {

constexpr double kBranchTol = 1e-9;  // |eps_l - eps_g| below this: equal branch
constexpr double kPoleTol = 1e-9;    // |eps - 1| below this: series fallback

// Per-lambda scalars; eps_g and phi_l do not depend on lambda.
struct LambdaView {
  double eps_l;
  double g_const;
  double beta;
};

double eps_l_of(const AssumptionParams& a, double eta_l, double lambda) {
  return 1.0 - eta_l * ((1.0 - lambda / 2.0) * a.mu + lambda) + eta_l;
}

double g_of(const AssumptionParams& a, double lambda) {
  const double base = (1.0 - lambda / 2.0) * a.g0 + lambda * (a.g0 / a.mu + a.m_dist);
  return base * base;
}

double beta_of(const AssumptionParams& a, double eta_l, double lambda) {
  return (4.0 * eta_l * eta_l + 2.0 * eta_l) * lambda * lambda / a.mu;
}

LambdaView view_of(const BoundParams& bp, double lambda) {
  if (!(lambda >= 0 && lambda <= 2)) throw DomainError("bounds: lambda must be in [0,2]");
  return LambdaView{eps_l_of(bp.assumption, bp.eta_l, lambda), g_of(bp.assumption, lambda),
                    beta_of(bp.assumption, bp.eta_l, lambda)};
}

// sum_{x=0}^{t-1} eps^x, with a series expansion near eps = 1.
double geom_sum(double eps, long t) {
  if (t <= 0) return 0.0;
  const double td = static_cast<double>(t);
  const double delta = eps - 1.0;
  if (std::abs(delta) < kPoleTol) {
    return td + delta * td * (td - 1.0) / 2.0 + delta * delta * td * (td - 1.0) * (td - 2.0) / 6.0;
  }
  return (std::pow(eps, static_cast<double>(t)) - 1.0) / delta;
}

// sum_{x=0}^{t-2} eps_l^x * geom_sum(eps_g, t-1-x); the accumulated per-round
// noise weight of the distinct-contraction bound.
double noise_weight_distinct(double eps_l, double eps_g, long t) {
  if (t < 2) return 0.0;
  if (std::abs(eps_g - 1.0) < kPoleTol) {
    double total = 0.0;
    double pl = 1.0;
    for (long x = 0; x <= t - 2; ++x) {
      total += pl * geom_sum(eps_g, t - 1 - x);
      pl *= eps_l;
    }
    return total;
  }
  const double dsum_prev =
      (std::pow(eps_l, static_cast<double>(t - 1)) - std::pow(eps_g, static_cast<double>(t - 1))) /
      (eps_l - eps_g);
  return (eps_g * dsum_prev - geom_sum(eps_l, t - 1)) / (eps_g - 1.0);
}

// sum_{x=0}^{t-2} eps^x * geom_sum(eps, t-1-x); equal-contraction variant.
double noise_weight_equal(double eps, long t) {
  if (t < 2) return 0.0;
  if (std::abs(eps - 1.0) < kPoleTol) {
    double total = 0.0;
    double p = 1.0;
    for (long x = 0; x <= t - 2; ++x) {
      total += p * geom_sum(eps, t - 1 - x);
      p *= eps;
    }
    return total;
  }
  const double td = static_cast<double>(t);
  return ((td - 1.0) * std::pow(eps, td - 1.0) - geom_sum(eps, t - 1)) / (eps - 1.0);
}

void check_sign(double value, double floor, const char* what) {
  if (value < floor) {
    throw InternalConsistencyError(std::string("h_coeffs: ") + what +
                                   " violates the case analysis; parameters outside regime");
  }
}

// Analytic minimum of c * T * eps^T over real T >= 0 for c < 0.
double fold_linear_term(double c, double eps) {
  if (c >= 0.0) return 0.0;
  if (!(eps > 0.0 && eps < 1.0)) {
    throw InternalConsistencyError("lower_bound: no linear floor without contraction");
  }
  const double t_min = -1.0 / std::log(eps);
  return c * t_min * std::exp(-1.0);
}

// Analytic minimum of c * T^2 * eps^T over real T >= 0 for c < 0.
double fold_quadratic_term(double c, double eps) {
  if (c >= 0.0) return 0.0;
  if (!(eps > 0.0 && eps < 1.0)) {
    throw InternalConsistencyError("lower_bound: no quadratic floor without contraction");
  }
  const double t_min = -2.0 / std::log(eps);
  return c * t_min * t_min * std::exp(-2.0);
}

}  // namespace

BoundParams derive_constants(const AssumptionParams& assumption, const TrainingConfig& config,
                             const PrivacySpec& privacy, int d, double delta_s) {
  assumption.validate();
  config.validate();
  privacy.validate();
  if (d < 1) throw DomainError("derive_constants: dimension must be >= 1");
  if (!(delta_s >= 0)) throw DomainError("derive_constants: sensitivity must be >= 0");

  BoundParams bp;
  bp.assumption = assumption;
  bp.eta_g = config.eta_g;
  bp.eta_l = config.eta_l;
  bp.lambda = config.lambda;
  bp.epsilon = privacy.epsilon;
  bp.delta = privacy.delta;
  bp.clip_c = privacy.clip_c;
  bp.delta_s = delta_s;
  bp.n = config.n_clients;
  bp.d = d;

  bp.eps_l = eps_l_of(assumption, config.eta_l, config.lambda);
  bp.eps_g = 1.0 - 2.0 * assumption.mu * config.eta_g +
             assumption.mu * config.eta_g * config.eta_g * assumption.l_smooth;
  bp.g_const = g_of(assumption, config.lambda);
  bp.beta = beta_of(assumption, config.eta_l, config.lambda);

  const double log_term = std::log(1.0 / privacy.delta);
  const double nn = static_cast<double>(config.n_clients);
  const double eps2 = privacy.epsilon * privacy.epsilon;
  bp.phi_l = delta_s * delta_s * assumption.l_smooth * static_cast<double>(d) * log_term /
             (nn * nn * eps2);
  bp.phi = assumption.l_smooth * assumption.l_smooth * delta_s * delta_s * log_term / assumption.mu;

  bp.assumptions_hold = assumption.holds_for(config.eta_g, config.lambda) && bp.eps_l < 1.0;
  return bp;
}

double global_bound(const BoundParams& bp, long t) {
  if (t < 0) throw DomainError("global_bound: t must be >= 0");
  if (t == 0) return bp.assumption.psi1;
  const double egt = std::pow(bp.eps_g, static_cast<double>(t));
  const double noise =
      bp.phi * static_cast<double>(t) / (static_cast<double>(bp.n) * bp.epsilon * bp.epsilon);
  return egt * bp.assumption.psi1 + (1.0 - egt) * noise;
}

double h(const BoundParams& bp, long t, double lambda) {
  if (t < 0) throw DomainError("h: t must be >= 0");
  if (t == 0) return bp.assumption.psi2;

  const LambdaView v = view_of(bp, lambda);
  const double eps_l = v.eps_l;
  const double eps_g = bp.eps_g;
  const double psi1 = bp.assumption.psi1;
  const double psi2 = bp.assumption.psi2;
  const double td = static_cast<double>(t);
  const double elt = std::pow(eps_l, td);

  const double drift = bp.eta_l * bp.eta_l * (1.0 + lambda * lambda) * v.g_const * geom_sum(eps_l, t);

  double coupled;
  if (std::abs(eps_l - eps_g) > kBranchTol) {
    const double dsum = (elt - std::pow(eps_g, td)) / (eps_l - eps_g);
    coupled = v.beta * (psi1 * dsum + bp.phi_l * td * noise_weight_distinct(eps_l, eps_g, t));
  } else {
    coupled = v.beta * (psi1 * td * std::pow(eps_l, td - 1.0) +
                        bp.phi_l * td * noise_weight_equal(eps_l, t));
  }
  return elt * psi2 + drift + coupled;
}

double h(const BoundParams& bp, long t) { return h(bp, t, bp.lambda); }

HCoeffs h_coeffs(const BoundParams& bp, double lambda) {
  const LambdaView v = view_of(bp, lambda);
  const double eps_l = v.eps_l;
  const double eps_g = bp.eps_g;
  // The reorganized coefficients divide by 1 - eps; without contraction the
  // case analysis does not apply.
  if (eps_l >= 1.0 - 1e-12 || eps_g >= 1.0 - 1e-12) {
    throw InternalConsistencyError("h_coeffs: contraction factors must stay below 1");
  }
  const double psi1 = bp.assumption.psi1;
  const double psi2 = bp.assumption.psi2;
  const double drift_scale = bp.eta_l * bp.eta_l * (1.0 + lambda * lambda) * v.g_const;

  if (std::abs(eps_l - eps_g) > kBranchTol) {
    Branch1Coeffs c{};
    c.eps_l = eps_l;
    c.eps_g = eps_g;
    const double gap = eps_l - eps_g;
    c.h6 = drift_scale / (1.0 - eps_l);
    c.h1 = psi2 + v.beta * psi1 / gap - c.h6;
    c.h2 = -v.beta * bp.phi_l / ((1.0 - eps_l) * gap);
    c.h3 = -v.beta * psi1 / gap;
    c.h4 = v.beta * bp.phi_l / ((1.0 - eps_g) * gap);
    c.h5 = v.beta * bp.phi_l / ((1.0 - eps_g) * (1.0 - eps_l));
    check_sign(c.h5, -1e-12, "H5 < 0");
    check_sign(c.h6, -1e-12, "H6 < 0");
    return c;
  }

  Branch2Coeffs c{};
  c.eps_l = eps_l;
  const double one_minus = 1.0 - eps_l;
  c.offset = drift_scale / one_minus;
  c.c1 = psi2 - c.offset;
  c.c2 = (v.beta / eps_l) * (psi1 - eps_l * bp.phi_l / (one_minus * one_minus));
  c.c3 = -v.beta * bp.phi_l / (eps_l * one_minus);
  c.slope = v.beta * bp.phi_l / (one_minus * one_minus);
  check_sign(-c.c3, -1e-12, "c3 > 0");
  check_sign(c.slope, -1e-12, "slope < 0");
  check_sign(c.offset, -1e-12, "offset < 0");
  return c;
}

double reconstruct_h(const HCoeffs& coeffs, long t) {
  const double td = static_cast<double>(t);
  if (std::holds_alternative<Branch1Coeffs>(coeffs)) {
    const auto& c = std::get<Branch1Coeffs>(coeffs);
    return (c.h1 + c.h2 * td) * std::pow(c.eps_l, td) +
           (c.h3 + c.h4 * td) * std::pow(c.eps_g, td) + c.h5 * td + c.h6;
  }
  const auto& c = std::get<Branch2Coeffs>(coeffs);
  return (c.c1 + c.c2 * td + c.c3 * td * td) * std::pow(c.eps_l, td) + c.slope * td + c.offset;
}

LinearLowerBound lower_bound(const BoundParams& bp, double lambda) {
  const HCoeffs coeffs = h_coeffs(bp, lambda);
  if (std::holds_alternative<Branch1Coeffs>(coeffs)) {
    const auto& c = std::get<Branch1Coeffs>(coeffs);
    const double h0 = std::min(c.h1, 0.0) + fold_linear_term(c.h2, c.eps_l) + std::min(c.h3, 0.0) +
                      fold_linear_term(c.h4, c.eps_g) + c.h6;
    return {h0, c.h5};
  }
  const auto& c = std::get<Branch2Coeffs>(coeffs);
  const double h0 = std::min(c.c1, 0.0) + fold_linear_term(c.c2, c.eps_l) +
                    fold_quadratic_term(c.c3, c.eps_l) + c.offset;
  return {h0, c.slope};
}

SearchTResult search_T(const BoundParams& bp, double lambda, long t_cap) {
  if (t_cap < 0) throw DomainError("search_T: cap must be >= 0");
  const LinearLowerBound lb = lower_bound(bp, lambda);
  const double h0_val = bp.assumption.psi2;  // h(0, lambda)

  SearchTResult res;
  long hi;
  if (lb.slope <= 0.0) {
    res.unbounded_improvement = true;
    res.t_prime = std::numeric_limits<double>::infinity();
    hi = t_cap;
  } else {
    res.t_prime = (h0_val - lb.h0) / lb.slope;
    if (res.t_prime <= 0.0) {
      res.t_star = 0;
      res.h_star = h0_val;
      return res;
    }
    hi = static_cast<long>(std::ceil(res.t_prime));
    if (hi > t_cap) {
      res.capped = true;
      hi = t_cap;
    }
  }

  res.t_star = 0;
  res.h_star = h0_val;
  for (long t = 1; t <= hi; ++t) {
    const double val = h(bp, t, lambda);
    if (val < res.h_star) {
      res.h_star = val;
      res.t_star = t;
    }
  }
  return res;
}

}  // namespace dpfl::bounds
