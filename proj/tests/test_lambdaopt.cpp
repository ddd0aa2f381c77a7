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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "dpfl/fedsim.hpp"
#include "dpfl/lambdaopt.hpp"
#include "dpfl/rng.hpp"

using namespace dpfl;

namespace {

// Bisection oracle on the unexpanded stationarity expression; valid under
// the uniqueness condition because the expression is then strictly
// increasing across its single sign change in [0,1].
double bisect_stationary_point(const fairness::FairnessParams& fp) {
  double lo = 0.0, hi = 1.0;
  REQUIRE(lambdaopt::stationarity_lhs(lo, fp) < 0.0);
  REQUIRE(lambdaopt::stationarity_lhs(hi, fp) > 0.0);
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    (lambdaopt::stationarity_lhs(mid, fp) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct ConditionedDraw {
  fairness::FairnessParams fp;
  double clip;
};

// Random fairness parameters with the clipping threshold strictly inside the
// uniqueness region and estimates clipped to that threshold.
ConditionedDraw conditioned_draw(RandomSource& rng) {
  blr::BlrParams bp;
  bp.n = 2 + static_cast<int>(rng.uniform_below(6));
  bp.d = 1 + static_cast<int>(rng.uniform_below(4));
  bp.b = bp.d + static_cast<int>(rng.uniform_below(6));
  bp.rho = 0.3 + rng.uniform01() * 2.5;
  bp.zeta2 = 0.05 + rng.uniform01() * 2.0;
  bp.sigma2 = 0.2 + rng.uniform01() * 2.0;

  const double s1 = bp.sigma2 / (bp.n * (bp.sigma2 + bp.rho * bp.zeta2));
  const double limit = std::sqrt(static_cast<double>(bp.d)) / (2.0 * bp.n * s1);
  const double clip = (0.2 + 0.7 * rng.uniform01()) * limit;

  std::vector<ModelVector> u_hat;
  for (int c = 0; c < bp.n; ++c) {
    ModelVector u = rng.gaussian(bp.d, clip / 2.0);
    if (u.norm() > clip) u *= clip / u.norm();
    u_hat.push_back(std::move(u));
  }
  auto fp = fairness::make_fairness_params(bp, u_hat, 0.1 + rng.uniform01() * 3.0);
  return {fp, clip};
}

}  // namespace

TEST_CASE("uniqueness condition boundary cases") {
  CHECK(lambdaopt::uniqueness_condition(1e-9, 4, 2, 0.25));
  // d=4, N=2, S1=0.25: threshold sqrt(4)/(2*2*0.25) = 2.
  CHECK(lambdaopt::uniqueness_condition(1.9, 4, 2, 0.25));
  CHECK_FALSE(lambdaopt::uniqueness_condition(2.0, 4, 2, 0.25));  // strict inequality
  CHECK_FALSE(lambdaopt::uniqueness_condition(2.1, 4, 2, 0.25));
}

TEST_CASE("expanded polynomial reproduces the unexpanded expression") {
  RandomSource rng = seeded_rng(1, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto draw = conditioned_draw(rng);
    const auto cubic = lambdaopt::expand_cubic(draw.fp);
    for (double a0 : {0.0, 0.5, 1.0}) {
      const double direct = lambdaopt::stationarity_lhs(a0, draw.fp);
      const double poly = ((cubic.c3 * a0 + cubic.c2) * a0 + cubic.c1) * a0 + cubic.c0;
      CHECK(poly == doctest::Approx(direct).epsilon(1e-10));
    }
    for (int i = 0; i < 20; ++i) {
      const double a0 = rng.uniform01();
      const double direct = lambdaopt::stationarity_lhs(a0, draw.fp);
      const double poly = ((cubic.c3 * a0 + cubic.c2) * a0 + cubic.c1) * a0 + cubic.c0;
      CHECK(poly == doctest::Approx(direct).epsilon(1e-10));
    }
  }
}

TEST_CASE("stationarity_lhs is the derivative of stationarity_objective") {
  RandomSource rng = seeded_rng(2, 0);
  const auto draw = conditioned_draw(rng);
  const double h = 1e-6;
  for (double a0 = 0.05; a0 < 1.0; a0 += 0.1) {
    const double fd = (lambdaopt::stationarity_objective(a0 + h, draw.fp) -
                       lambdaopt::stationarity_objective(a0 - h, draw.fp)) /
                      (2.0 * h);
    CHECK(lambdaopt::stationarity_lhs(a0, draw.fp) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("homogeneous noiseless parameters give a degenerate polynomial") {
  fairness::FairnessParams fp;
  fp.n = 3;
  fp.d = 2;
  fp.b = 4;
  fp.rho = 1.0;
  fp.s1 = 0.2;
  fp.s2 = 1.0 / 3.0;
  fp.g1 = 0.0;
  fp.g2 = 0.0;
  fp.sigma_w2 = 0.5;
  fp.sigma_z2 = 0.0;
  const auto cubic = lambdaopt::expand_cubic(fp);
  CHECK(cubic.degenerate);
  CHECK_THROWS_AS(lambdaopt::solve_alpha0(cubic), DegenerateError);
}

TEST_CASE("boundary signs under the uniqueness condition") {
  RandomSource rng = seeded_rng(3, 0);
  for (int rep = 0; rep < 50; ++rep) {
    const auto draw = conditioned_draw(rng);
    REQUIRE(lambdaopt::uniqueness_condition(draw.clip, draw.fp.d, draw.fp.n, draw.fp.s1));
    CHECK(lambdaopt::stationarity_lhs(0.0, draw.fp) < 0.0);
    CHECK(lambdaopt::stationarity_lhs(1.0, draw.fp) > 0.0);
  }
}

TEST_CASE("constructed factorization is recovered exactly") {
  // (x - 0.3)(x - 5)(x + 2) = x^3 - 3.3 x^2 - 9.1 x + 3.
  lambdaopt::CubicProblem p;
  p.c3 = 1.0;
  p.c2 = -3.3;
  p.c1 = -9.1;
  p.c0 = 3.0;
  const auto roots = lambdaopt::solve_alpha0(p);
  REQUIRE(roots.roots.size() == 3);
  CHECK(roots.roots[0] == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(roots.roots[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(roots.roots[2] == doctest::Approx(5.0).epsilon(1e-12));
  REQUIRE(roots.primary.has_value());
  CHECK(*roots.primary == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("closed-form roots match the bisection oracle") {
  RandomSource rng = seeded_rng(4, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const auto draw = conditioned_draw(rng);
    const auto roots = lambdaopt::solve_alpha0(lambdaopt::expand_cubic(draw.fp), true);
    REQUIRE(roots.primary.has_value());
    const double reference = bisect_stationary_point(draw.fp);
    CHECK(std::abs(*roots.primary - reference) < 1e-10);
  }
}

TEST_CASE("alpha0 and lambda are mutually inverse") {
  RandomSource rng = seeded_rng(5, 0);
  for (int i = 0; i < 100; ++i) {
    const double b = 1.0 + rng.uniform01() * 9.0;
    const double rho = 0.2 + rng.uniform01() * 4.0;
    const double lambda = rng.uniform01() * 2.0;
    const double a0 = lambdaopt::lambda_to_alpha0(lambda, b, rho);
    CHECK(lambdaopt::alpha0_to_lambda(a0, b, rho) == doctest::Approx(lambda).epsilon(1e-12));
  }
  CHECK(lambdaopt::alpha0_to_lambda(0.0, 4, 1.0) == doctest::Approx(0.0));
  CHECK(lambdaopt::alpha0_to_lambda(1.0, 4, 1.0) == doctest::Approx(2.0));
  CHECK(lambdaopt::alpha0_to_lambda(0.5, 2.0, 2.0) == doctest::Approx(1.0));  // b = rho
}

TEST_CASE("optimal lambda decreases as the noise grows") {
  RandomSource rng = seeded_rng(6, 0);
  for (int rep = 0; rep < 10; ++rep) {
    auto draw = conditioned_draw(rng);
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 50; ++i) {
      draw.fp.sigma_z2 = 0.05 + 0.4 * i;
      const auto roots = lambdaopt::solve_alpha0(lambdaopt::expand_cubic(draw.fp), true);
      const double lambda_star =
          lambdaopt::alpha0_to_lambda(*roots.primary, static_cast<double>(draw.fp.b), draw.fp.rho);
      CHECK(lambda_star <= prev + 1e-12);
      prev = lambda_star;
    }
  }
}

TEST_CASE("the stationary point is a local minimum of the solved objective") {
  RandomSource rng = seeded_rng(7, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto draw = conditioned_draw(rng);
    const auto roots = lambdaopt::solve_alpha0(lambdaopt::expand_cubic(draw.fp), true);
    const double lambda_star =
        lambdaopt::alpha0_to_lambda(*roots.primary, static_cast<double>(draw.fp.b), draw.fp.rho);
    auto objective_at = [&](double lambda) {
      const double a0 =
          lambdaopt::lambda_to_alpha0(std::clamp(lambda, 0.0, 2.0), draw.fp.b, draw.fp.rho);
      return lambdaopt::stationarity_objective(a0, draw.fp);
    };
    const double at_star = objective_at(lambda_star);
    CHECK(at_star <= objective_at(0.99 * lambda_star) + 1e-12);
    CHECK(at_star <= objective_at(std::min(2.0, 1.01 * lambda_star)) + 1e-12);
  }
}

namespace {

struct JointSetup {
  bounds::BoundParams bp;
  fairness::FairnessParams fp;
};

JointSetup joint_setup(RandomSource& rng, double epsilon) {
  const auto draw = conditioned_draw(rng);

  AssumptionParams a;
  a.mu = 2.0 + rng.uniform01();
  a.l_smooth = a.mu + rng.uniform01();
  a.g0 = 0.5;
  a.m_dist = 0.5;
  a.psi1 = 1.0;
  a.psi2 = 1.0;
  TrainingConfig c;
  c.n_clients = draw.fp.n;
  c.eta_g = 0.3 / a.l_smooth;
  c.eta_l = 0.2 / a.mu;
  c.lambda = 0.5;
  PrivacySpec p{epsilon, 0.01, draw.clip};
  const double delta_s = 2.0 * draw.clip / draw.fp.b;
  return {bounds::derive_constants(a, c, p, draw.fp.d, delta_s), draw.fp};
}

}  // namespace

TEST_CASE("joint search: one cubic solve per T and a single-T trace") {
  RandomSource rng = seeded_rng(8, 0);
  const JointSetup setup = joint_setup(rng, 5.0);
  const auto res = lambdaopt::joint_search(setup.bp, setup.fp, 1);
  CHECK(res.cubic_solves == 1);
  CHECK(res.t_star == 1);
  CHECK(res.trace.size() == 1);

  const auto res30 = lambdaopt::joint_search(setup.bp, setup.fp, 30);
  CHECK(res30.cubic_solves == 30);
}

TEST_CASE("joint search matches a dense grid oracle") {
  RandomSource rng = seeded_rng(9, 0);
  const JointSetup setup = joint_setup(rng, 3.0);
  const long t_max = 20;
  const auto res = lambdaopt::joint_search(setup.bp, setup.fp, t_max);
  REQUIRE(static_cast<long>(res.trace.size()) == t_max);

  // Dense-grid brute force: per T pick the grid lambda closest to the
  // constraint root, then take the argmin of h. Snapping perturbs h by up to
  // `slack`, which bounds how far the two minima may drift apart.
  const int grid_n = 501;
  const double cell = 2.0 / (grid_n - 1.0);
  const double log_term = std::log(1.0 / setup.bp.delta);
  double best_h = std::numeric_limits<double>::infinity();
  double slack = 0.0;
  for (long t = 1; t <= t_max; ++t) {
    fairness::FairnessParams fp = setup.fp;
    const double sigma_z =
        setup.bp.delta_s * std::sqrt(2.0 * static_cast<double>(t) * log_term) / setup.bp.epsilon;
    fp.sigma_z2 = sigma_z * sigma_z;
    const double root = bisect_stationary_point(fp);
    const double lambda_root =
        lambdaopt::alpha0_to_lambda(root, static_cast<double>(fp.b), fp.rho);
    double closest = 0.0;
    double dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_n; ++i) {
      const double lambda = 2.0 * i / (grid_n - 1.0);
      if (std::abs(lambda - lambda_root) < dist) {
        dist = std::abs(lambda - lambda_root);
        closest = lambda;
      }
    }
    CHECK(std::abs(res.trace[static_cast<std::size_t>(t - 1)].lambda - closest) <= 1.01 * cell);
    const double hv = bounds::h(setup.bp, t, closest);
    slack = std::max(slack, std::abs(hv - bounds::h(setup.bp, t, lambda_root)));
    best_h = std::min(best_h, hv);
  }
  CHECK(std::abs(res.h_star - best_h) <= 2.0 * slack + 1e-12);
}

TEST_CASE("noise-free regime: lambda* flat in T and T* consistent with search_T") {
  RandomSource rng = seeded_rng(10, 0);
  const JointSetup setup = joint_setup(rng, 1e6);
  const long t_max = 40;
  const auto res = lambdaopt::joint_search(setup.bp, setup.fp, t_max);

  double lo = 2.0, hi = 0.0;
  for (const auto& row : res.trace) {
    lo = std::min(lo, row.lambda);
    hi = std::max(hi, row.lambda);
  }
  CHECK(hi - lo < 1e-3);  // sigma_z barely moves, so the root barely moves

  const auto st = bounds::search_T(setup.bp, res.lambda_star, t_max);
  CHECK(st.t_star == res.t_star);
}

TEST_CASE("alternating search converges on a separable bowl") {
  std::vector<int> t_grid;
  for (int t = 1; t <= 12; ++t) t_grid.push_back(t);
  const std::vector<double> lambda_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  auto objective = [](int t, double lambda) {
    return (t - 5.0) * (t - 5.0) + 10.0 * (lambda - 0.5) * (lambda - 0.5);
  };
  const auto res = lambdaopt::empirical_alternating_search(objective, t_grid, lambda_grid);
  CHECK(res.t_star == 5);
  CHECK(res.lambda_star == doctest::Approx(0.5));
}

TEST_CASE("lambda-independent objectives terminate after two sweeps") {
  const std::vector<int> t_grid{1, 2, 3, 4, 5};
  const std::vector<double> lambda_grid{0.0, 1.0, 2.0};
  auto objective = [](int t, double) { return (t - 3.0) * (t - 3.0); };
  const auto res = lambdaopt::empirical_alternating_search(objective, t_grid, lambda_grid);
  CHECK(res.t_star == 3);
  CHECK(res.sweeps == 2);
}

TEST_CASE("non-finite objectives abort with the evaluations so far") {
  const std::vector<int> t_grid{1, 2, 3};
  const std::vector<double> lambda_grid{0.0, 1.0};
  auto objective = [](int t, double) {
    return t == 2 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
  };
  try {
    lambdaopt::empirical_alternating_search(objective, t_grid, lambda_grid);
    FAIL("expected AlternatingAbort");
  } catch (const lambdaopt::AlternatingAbort& e) {
    CHECK(!e.trace().empty());
  }
}

TEST_CASE("the tuned grid point is a two-coordinate local minimum") {
  // Small but real objective surface with a unique basin.
  auto objective = [](int t, double lambda) {
    return std::abs(t - 6.0) * 0.3 + (lambda - 0.5) * (lambda - 0.5) + 0.05 * lambda * t;
  };
  const std::vector<int> t_grid{2, 4, 6, 8};
  const std::vector<double> lambda_grid{0.0, 0.5, 1.0, 2.0};
  const auto res = lambdaopt::empirical_alternating_search(objective, t_grid, lambda_grid);

  const double at_star = objective(res.t_star, res.lambda_star);
  for (int t : t_grid) CHECK(at_star <= objective(t, res.lambda_star) + 1e-12);
  for (double l : lambda_grid) CHECK(at_star <= objective(res.t_star, l) + 1e-12);
}

TEST_CASE("tuning real training runs lands on a grid-local minimum") {
  // Quadratic clients under a loose privacy budget; the objective is the
  // final mean personalized training loss.
  RandomSource rng = seeded_rng(11, 0);
  blr::BlrParams params{4, 8, 3, 1.0, 1.0, 0.5};
  const auto inst = blr::generate_instance(params, ModelVector::Zero(3), rng);
  std::vector<ClientDataset> data;
  for (int c = 0; c < params.n; ++c) {
    ClientDataset ds;
    ds.features = inst.designs[static_cast<std::size_t>(c)];
    ds.targets = inst.observations[static_cast<std::size_t>(c)];
    data.push_back(std::move(ds));
  }
  const LossModel model = LossModel::quadratic();
  auto objective = [&](int t, double lambda) {
    TrainingConfig cfg;
    cfg.n_clients = params.n;
    cfg.rounds = t;
    cfg.eta_g = 0.05;
    cfg.eta_l = 0.05;
    cfg.lambda = lambda;
    cfg.seed = 5;
    const auto logs =
        fedsim::run_training(cfg, PrivacySpec{100.0, 0.01, 50.0}, model, data);
    return logs.back().mean_personalized_loss;
  };

  const std::vector<int> t_grid{5, 10, 20};
  const std::vector<double> lambda_grid{0.0, 0.1, 0.5, 1.0};
  const auto res = lambdaopt::empirical_alternating_search(objective, t_grid, lambda_grid);

  // No single-coordinate grid move improves the objective.
  const double at_star = objective(res.t_star, res.lambda_star);
  for (int t : t_grid) CHECK(at_star <= objective(t, res.lambda_star) + 1e-12);
  for (double l : lambda_grid) CHECK(at_star <= objective(res.t_star, l) + 1e-12);
}
