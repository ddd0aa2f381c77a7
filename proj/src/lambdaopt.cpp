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

#include "dpfl/lambdaopt.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dpfl/errors.hpp"

namespace dpfl::lambdaopt {

bool uniqueness_condition(double clip_c, int d, int n, double s1) {
  if (!(s1 > 0)) throw DomainError("uniqueness_condition: S1 must be > 0");
  if (d < 1 || n < 1) throw DomainError("uniqueness_condition: d and n must be >= 1");
  return clip_c < std::sqrt(static_cast<double>(d)) / (2.0 * static_cast<double>(n) * s1);
}

double stationarity_lhs(double a0, const fairness::FairnessParams& fp) {
  const double nn = static_cast<double>(fp.n);
  const double s = fp.sigma_z2 / (nn * nn);
  const double a1 = fp.s1 - fp.s2 * a0;
  const double dg = fp.g2 - fp.g1 * fp.g1;
  return 4.0 * fp.d * s * a0 + 8.0 * fp.g1 * s * a1 * a1 * a0 -
         8.0 * fp.s2 * fp.g1 * (fp.sigma_w2 + a0 * a0 * s) * a1 - 4.0 * fp.s2 * dg * a1 * a1 * a1;
}

double stationarity_objective(double a0, const fairness::FairnessParams& fp) {
  const double nn = static_cast<double>(fp.n);
  const double s = fp.sigma_z2 / (nn * nn);
  const double sb2 = fp.sigma_w2 + a0 * a0 * s;
  const double a1 = fp.s1 - fp.s2 * a0;
  const double a1sq = a1 * a1;
  return 2.0 * fp.d * sb2 + 4.0 * sb2 * a1sq * fp.g1 + a1sq * a1sq * (fp.g2 - fp.g1 * fp.g1);
}

CubicProblem expand_cubic(const fairness::FairnessParams& fp) {
  fp.validate();
  const double nn = static_cast<double>(fp.n);
  const double s = fp.sigma_z2 / (nn * nn);
  const double s1 = fp.s1;
  const double s2 = fp.s2;
  const double g1 = fp.g1;
  const double dg = fp.g2 - fp.g1 * fp.g1;
  const double dd = static_cast<double>(fp.d);

  CubicProblem p;
  p.fp = fp;
  p.c3 = 16.0 * s * g1 * s2 * s2 + 4.0 * s2 * s2 * s2 * s2 * dg;
  p.c2 = -24.0 * s * g1 * s1 * s2 - 12.0 * s2 * s2 * s2 * dg * s1;
  p.c1 = 4.0 * dd * s + 8.0 * s * g1 * s1 * s1 + 8.0 * s2 * s2 * g1 * fp.sigma_w2 +
         12.0 * s2 * s2 * dg * s1 * s1;
  p.c0 = -8.0 * s2 * g1 * fp.sigma_w2 * s1 - 4.0 * s2 * dg * s1 * s1 * s1;

  const double scale =
      std::max({std::abs(p.c3), std::abs(p.c2), std::abs(p.c1), std::abs(p.c0)});
  p.degenerate = scale < 1e-300;
  return p;
}

namespace {

double eval_cubic(const CubicProblem& p, double x) {
  return ((p.c3 * x + p.c2) * x + p.c1) * x + p.c0;
}

double eval_cubic_deriv(const CubicProblem& p, double x) {
  return (3.0 * p.c3 * x + 2.0 * p.c2) * x + p.c1;
}

void polish_root(const CubicProblem& p, double& x) {
  for (int i = 0; i < 3; ++i) {
    const double f = eval_cubic(p, x);
    const double fp_ = eval_cubic_deriv(p, x);
    if (fp_ == 0.0) break;
    const double step = f / fp_;
    if (!std::isfinite(step)) break;
    x -= step;
  }
}

std::vector<double> real_roots(const CubicProblem& p) {
  const double scale =
      std::max({std::abs(p.c3), std::abs(p.c2), std::abs(p.c1), std::abs(p.c0)});

  std::vector<double> roots;
  if (std::abs(p.c3) < 1e-14 * scale) {
    // Degree dropped; fall back to the quadratic / linear cases.
    const double a = p.c2, b = p.c1, c = p.c0;
    if (std::abs(a) < 1e-14 * scale) {
      if (std::abs(b) > 0.0) roots.push_back(-c / b);
    } else {
      const double disc = b * b - 4.0 * a * c;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        // Citardauq form keeps the smaller root accurate.
        const double q = -0.5 * (b + (b >= 0 ? sq : -sq));
        roots.push_back(q / a);
        if (q != 0.0) roots.push_back(c / q);
        if (roots.size() == 1 && disc == 0.0) roots.push_back(roots[0]);
      }
    }
  } else {
    const double a = p.c2 / p.c3;
    const double b = p.c1 / p.c3;
    const double c = p.c0 / p.c3;
    const double shift = a / 3.0;
    const double q = b - a * a / 3.0;                       // depressed: y^3 + q y + r
    const double r = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double disc = r * r / 4.0 + q * q * q / 27.0;

    if (disc > 1e-30 * (1.0 + r * r)) {
      const double sq = std::sqrt(disc);
      const double u = std::cbrt(-r / 2.0 + sq);
      const double v = std::cbrt(-r / 2.0 - sq);
      roots.push_back(u + v - shift);
    } else if (q >= -1e-300) {
      // q ~ 0 and disc <= 0 force r ~ 0: (near-)triple root.
      roots.push_back(std::cbrt(-r) - shift);
    } else {
      // Three real roots; trigonometric form avoids complex cancellation.
      const double m = 2.0 * std::sqrt(-q / 3.0);
      const double arg = std::clamp(3.0 * r / (q * m), -1.0, 1.0);
      const double theta = std::acos(arg);
      for (int k = 0; k < 3; ++k) {
        roots.push_back(m * std::cos((theta - 2.0 * M_PI * k) / 3.0) - shift);
      }
    }
  }

  for (double& x : roots) polish_root(p, x);
  std::sort(roots.begin(), roots.end());
  std::vector<double> unique_roots;
  for (double x : roots) {
    if (unique_roots.empty() || std::abs(x - unique_roots.back()) > 1e-9 * (1.0 + std::abs(x))) {
      unique_roots.push_back(x);
    }
  }
  return unique_roots;
}

}  // namespace

Alpha0Roots solve_alpha0(const CubicProblem& problem, bool uniqueness_asserted) {
  if (problem.degenerate) {
    throw DegenerateError("solve_alpha0: identically-zero stationarity polynomial");
  }
  Alpha0Roots out;
  out.roots = real_roots(problem);

  std::vector<double> inside;
  for (double x : out.roots) {
    if (x >= -1e-12 && x <= 1.0 + 1e-12) inside.push_back(std::clamp(x, 0.0, 1.0));
  }
  if (inside.size() == 1) out.primary = inside[0];
  if (uniqueness_asserted && inside.size() != 1) {
    throw InternalConsistencyError("solve_alpha0: expected exactly one root in [0,1], found " +
                                   std::to_string(inside.size()));
  }
  return out;
}

double alpha0_to_lambda(double a0, double b, double rho) {
  if (!(a0 >= 0.0 && a0 <= 1.0)) throw DomainError("alpha0_to_lambda: alpha0 must be in [0,1]");
  return 2.0 * rho * a0 / ((1.0 - a0) * b + rho * a0);
}

double lambda_to_alpha0(double lambda, double b, double rho) {
  return fairness::alpha0(lambda, b, rho);
}

JointSearchResult joint_search(const bounds::BoundParams& bp,
                               const fairness::FairnessParams& fp_base, long t_max) {
  if (t_max < 1) throw DomainError("joint_search: t_max must be >= 1");
  fp_base.validate();

  const double log_term = std::log(1.0 / bp.delta);
  JointSearchResult res;
  res.h_star = std::numeric_limits<double>::infinity();

  for (long t = 1; t <= t_max; ++t) {
    fairness::FairnessParams fp = fp_base;
    const double sigma_z = bp.delta_s * std::sqrt(2.0 * static_cast<double>(t) * log_term) / bp.epsilon;
    fp.sigma_z2 = sigma_z * sigma_z;

    const bool unique = uniqueness_condition(bp.clip_c, fp.d, fp.n, fp.s1);
    res.unique = res.unique && unique;

    const Alpha0Roots roots = solve_alpha0(expand_cubic(fp), unique);
    ++res.cubic_solves;

    std::vector<double> candidates;
    if (roots.primary) {
      candidates.push_back(*roots.primary);
    } else {
      for (double x : roots.roots) {
        if (x >= -1e-12 && x <= 1.0 + 1e-12) candidates.push_back(std::clamp(x, 0.0, 1.0));
      }
    }

    for (double a0 : candidates) {
      JointCandidate cand;
      cand.t = t;
      cand.alpha0 = a0;
      cand.lambda = alpha0_to_lambda(a0, static_cast<double>(fp.b), fp.rho);
      cand.h = bounds::h(bp, t, cand.lambda);
      cand.r = fairness::fairness_R(cand.lambda, fp);
      res.trace.push_back(cand);
      if (cand.h < res.h_star) {
        res.h_star = cand.h;
        res.t_star = cand.t;
        res.lambda_star = cand.lambda;
        res.r_star = cand.r;
      }
    }
  }
  return res;
}

AlternatingResult empirical_alternating_search(
    const std::function<double(int, double)>& objective, const std::vector<int>& t_grid,
    const std::vector<double>& lambda_grid) {
  if (t_grid.empty() || lambda_grid.empty()) {
    throw DomainError("empirical_alternating_search: empty grid");
  }

  AlternatingResult res;
  std::map<std::pair<std::size_t, std::size_t>, double> cache;

  auto eval = [&](std::size_t ti, std::size_t li) {
    const auto key = std::make_pair(ti, li);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const double v = objective(t_grid[ti], lambda_grid[li]);
    res.trace.push_back({t_grid[ti], lambda_grid[li], v});
    if (!std::isfinite(v)) {
      throw AlternatingAbort("empirical_alternating_search: non-finite objective at T=" +
                                 std::to_string(t_grid[ti]) + ", lambda=" +
                                 std::to_string(lambda_grid[li]),
                             res.trace);
    }
    cache.emplace(key, v);
    return v;
  };

  std::size_t ti = 0, li = 0;
  double current = eval(ti, li);

  const int max_sweeps = static_cast<int>(t_grid.size() * lambda_grid.size()) + 2;
  bool changed = true;
  while (changed && res.sweeps < max_sweeps) {
    ++res.sweeps;
    changed = false;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      const double v = eval(i, li);
      if (v < current) {  // strict: ties keep the current point
        current = v;
        ti = i;
        changed = true;
      }
    }
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
      const double v = eval(ti, i);
      if (v < current) {
        current = v;
        li = i;
        changed = true;
      }
    }
  }

  res.t_star = t_grid[ti];
  res.lambda_star = lambda_grid[li];
  res.objective = current;
  return res;
}

}  // namespace dpfl::lambdaopt
