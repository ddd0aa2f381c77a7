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

#include "dpfl/fairness.hpp"

#include <cmath>

#include "dpfl/errors.hpp"

namespace dpfl::fairness {

double alpha0(double lambda, double b, double rho) {
  if (!(lambda >= 0 && lambda <= 2)) throw DomainError("alpha0: lambda must be in [0,2]");
  const double denom = (2.0 - lambda) * rho + b * lambda;
  if (denom <= 0) throw DomainError("alpha0: degenerate b/rho combination");
  return b * lambda / denom;
}

double alpha1(double lambda, const FairnessParams& fp) {
  return fp.s1 - fp.s2 * alpha0(lambda, static_cast<double>(fp.b), fp.rho);
}

double sigma_b2(double lambda, const FairnessParams& fp) {
  const double a0 = alpha0(lambda, static_cast<double>(fp.b), fp.rho);
  const double nn = static_cast<double>(fp.n);
  return fp.sigma_w2 + a0 * a0 * fp.sigma_z2 / (nn * nn);
}

AlphaCoeffs alpha_coeffs(const std::vector<ModelVector>& u_hat) {
  if (u_hat.empty()) throw DomainError("alpha_coeffs: need at least one estimate");
  const auto n = static_cast<Eigen::Index>(u_hat.size());
  const Eigen::Index d = u_hat[0].size();

  ModelVector total = ModelVector::Zero(d);
  for (const auto& u : u_hat) {
    if (u.size() != d) throw ShapeError("alpha_coeffs: estimate dimension mismatch");
    total += u;
  }

  AlphaCoeffs out;
  out.alpha.resize(n, d);
  for (Eigen::Index c = 0; c < n; ++c) {
    // (N-1) u_n - sum_{m != n} u_m == N u_n - sum_m u_m
    out.alpha.row(c) =
        (static_cast<double>(n) * u_hat[static_cast<std::size_t>(c)] - total).transpose();
  }

  double g1 = 0.0;
  double g2 = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    const double row_sq = out.alpha.row(c).squaredNorm();
    g1 += row_sq;
    g2 += row_sq * row_sq;
  }
  out.g1 = g1 / static_cast<double>(n);
  out.g2 = g2 / static_cast<double>(n);
  return out;
}

double fairness_R(double lambda, const FairnessParams& fp) {
  fp.validate();
  const double sb2 = sigma_b2(lambda, fp);
  const double a1 = alpha1(lambda, fp);
  const double a1sq = a1 * a1;
  return 2.0 * fp.d * sb2 * sb2 + 4.0 * sb2 * a1sq * fp.g1 + a1sq * a1sq * (fp.g2 - fp.g1 * fp.g1);
}

FairnessParams make_fairness_params(const blr::BlrParams& params,
                                    const std::vector<ModelVector>& u_hat, double sigma_z2) {
  params.validate();
  if (static_cast<int>(u_hat.size()) != params.n) {
    throw ShapeError("make_fairness_params: estimate count does not match n");
  }
  const double nn = static_cast<double>(params.n);
  const AlphaCoeffs ac = alpha_coeffs(u_hat);

  FairnessParams fp;
  fp.s1 = params.sigma2 / (nn * (params.sigma2 + params.rho * params.zeta2));
  fp.s2 = 1.0 / nn;
  fp.g1 = ac.g1;
  fp.g2 = ac.g2;
  fp.sigma_w2 = blr::sigma_w2(params);
  fp.sigma_z2 = sigma_z2;
  fp.n = params.n;
  fp.d = params.d;
  fp.b = params.b;
  fp.rho = params.rho;
  return fp;
}

namespace {

struct BlockSums {
  double q = 0.0;   // (1/N) sum_n X_n^2 per trial
  double m = 0.0;   // (1/N) sum_n X_n per trial
  double qq = 0.0;
  double mm = 0.0;
  double qm = 0.0;
};

constexpr long kBlockSize = 8192;

BlockSums run_block(const Eigen::MatrixXd& a, double sigma_b, double sigma_w, double shared_scale,
                    double sigma_z, McMode mode, long count, RandomSource rng) {
  const auto n = a.rows();
  const auto d = a.cols();
  BlockSums sums;
  Eigen::VectorXd shared(d);
  for (long t = 0; t < count; ++t) {
    double sum_x = 0.0;
    double sum_x2 = 0.0;
    if (mode == McMode::kCorrelated) {
      for (Eigen::Index l = 0; l < d; ++l) shared[l] = sigma_z * rng.normal();
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      double x = 0.0;
      for (Eigen::Index l = 0; l < d; ++l) {
        const double b = mode == McMode::kIndependent
                             ? sigma_b * rng.normal()
                             : shared_scale * shared[l] - sigma_w * rng.normal();
        const double v = a(c, l) + b;
        x += v * v;
      }
      sum_x += x;
      sum_x2 += x * x;
    }
    const double q = sum_x2 / static_cast<double>(n);
    const double m = sum_x / static_cast<double>(n);
    sums.q += q;
    sums.m += m;
    sums.qq += q * q;
    sums.mm += m * m;
    sums.qm += q * m;
  }
  return sums;
}

McResult oracle_impl(double lambda, const FairnessParams& fp,
                     const std::vector<ModelVector>& u_hat, long trials, std::uint64_t seed,
                     McMode mode, int workers, bool parallel) {
  fp.validate();
  if (trials < 10000) throw InsufficientTrialsError("mc_oracle: need at least 10^4 trials");
  if (static_cast<int>(u_hat.size()) != fp.n) {
    throw ShapeError("mc_oracle: estimate count does not match n");
  }

  const AlphaCoeffs ac = alpha_coeffs(u_hat);
  const double a1 = alpha1(lambda, fp);
  const Eigen::MatrixXd a = a1 * ac.alpha;

  const double a0 = alpha0(lambda, static_cast<double>(fp.b), fp.rho);
  const double sigma_b = std::sqrt(sigma_b2(lambda, fp));
  const double sigma_w = std::sqrt(fp.sigma_w2);
  const double sigma_z = std::sqrt(fp.sigma_z2);
  const double shared_scale = a0 / static_cast<double>(fp.n);

  const long nblocks = (trials + kBlockSize - 1) / kBlockSize;
  std::vector<BlockSums> partial(static_cast<std::size_t>(nblocks));

  auto block_work = [&](long i) {
    const long lo = i * kBlockSize;
    const long count = std::min(kBlockSize, trials - lo);
    partial[static_cast<std::size_t>(i)] =
        run_block(a, sigma_b, sigma_w, shared_scale, sigma_z, mode, count,
                  seeded_rng(seed, stream::make(stream::kOracle, static_cast<std::uint64_t>(i))));
  };

  if (parallel && workers > 1) {
#ifdef _OPENMP
#pragma omp parallel for num_threads(workers) schedule(static)
    for (long i = 0; i < nblocks; ++i) block_work(i);
#else
    for (long i = 0; i < nblocks; ++i) block_work(i);
#endif
  } else {
    for (long i = 0; i < nblocks; ++i) block_work(i);
  }

  BlockSums total;
  for (const BlockSums& s : partial) {
    total.q += s.q;
    total.m += s.m;
    total.qq += s.qq;
    total.mm += s.mm;
    total.qm += s.qm;
  }

  const double tn = static_cast<double>(trials);
  const double mean_q = total.q / tn;
  const double mean_m = total.m / tn;
  const double bessel = tn > 1 ? tn / (tn - 1.0) : 1.0;
  const double var_q = std::max(0.0, (total.qq / tn - mean_q * mean_q) * bessel);
  const double var_m = std::max(0.0, (total.mm / tn - mean_m * mean_m) * bessel);
  const double cov_qm = (total.qm / tn - mean_q * mean_m) * bessel;

  McResult res;
  res.trials = trials;
  // E[mean_m^2] = (E m)^2 + var(m)/trials; subtract the plug-in bias.
  res.estimate = mean_q - mean_m * mean_m + var_m / tn;
  const double var_est =
      var_q / tn + 4.0 * mean_m * mean_m * var_m / tn - 4.0 * mean_m * cov_qm / tn;
  res.stderr_est = std::sqrt(std::max(0.0, var_est));
  return res;
}

}  // namespace

McResult mc_oracle(double lambda, const FairnessParams& fp, const std::vector<ModelVector>& u_hat,
                   long trials, std::uint64_t seed, McMode mode, int workers) {
  return oracle_impl(lambda, fp, u_hat, trials, seed, mode, workers, /*parallel=*/true);
}

McResult mc_oracle_serial(double lambda, const FairnessParams& fp,
                          const std::vector<ModelVector>& u_hat, long trials, std::uint64_t seed,
                          McMode mode) {
  return oracle_impl(lambda, fp, u_hat, trials, seed, mode, 1, /*parallel=*/false);
}

}  // namespace dpfl::fairness
