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

#include "dpfl/blr.hpp"

#include <cmath>
#include <fstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "dpfl/errors.hpp"

namespace dpfl::blr {

Eigen::MatrixXd make_design(int b, int d, double rho, RandomSource& rng) {
  if (d < 1) throw DomainError("make_design: dimension must be >= 1");
  if (b < d) throw DomainError("make_design: infeasible, need b >= d");
  if (!(rho > 0)) throw DomainError("make_design: rho must be > 0");

  Eigen::MatrixXd g(b, d);
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(b, d);
  return std::sqrt(rho) * thin_q;
}

ModelVector estimate_local(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw ShapeError("estimate_local: X/Y row mismatch");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols()) throw SingularError("estimate_local: rank-deficient design");
  return qr.solve(y);
}

BlrInstance generate_instance(const BlrParams& params, const ModelVector& omega_star,
                              RandomSource& rng) {
  params.validate();
  if (omega_star.size() != params.d) throw ShapeError("generate_instance: omega_star dimension");

  BlrInstance inst;
  inst.params = params;
  inst.omega_star = omega_star;
  inst.u_star.reserve(static_cast<std::size_t>(params.n));
  inst.designs.reserve(static_cast<std::size_t>(params.n));
  inst.observations.reserve(static_cast<std::size_t>(params.n));
  inst.u_hat.reserve(static_cast<std::size_t>(params.n));

  const double zeta = std::sqrt(params.zeta2);
  const double sigma = std::sqrt(params.sigma2);
  for (int c = 0; c < params.n; ++c) {
    ModelVector u = omega_star + rng.gaussian(params.d, zeta);
    Eigen::MatrixXd x = make_design(params.b, params.d, params.rho, rng);
    Eigen::VectorXd y = x * u + rng.gaussian(params.b, sigma);
    inst.u_star.push_back(std::move(u));
    inst.u_hat.push_back(estimate_local(x, y));
    inst.designs.push_back(std::move(x));
    inst.observations.push_back(std::move(y));
  }
  return inst;
}

ModelVector global_optimum(const BlrInstance& instance) {
  const int d = instance.params.d;
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (std::size_t c = 0; c < instance.designs.size(); ++c) {
    const Eigen::MatrixXd gram = instance.designs[c].transpose() * instance.designs[c];
    xtx += gram;
    rhs += gram * instance.u_hat[c];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xtx);
  if (qr.rank() < d) throw SingularError("global_optimum: singular pooled design");
  return qr.solve(rhs);
}

std::vector<ModelVector> perturbed_personalized_optimum(const BlrInstance& instance, double lambda,
                                                        const std::vector<ModelVector>& noise) {
  if (!(lambda >= 0 && lambda <= 2)) {
    throw DomainError("perturbed_personalized_optimum: lambda must be in [0,2]");
  }
  const auto& p = instance.params;
  if (static_cast<int>(noise.size()) != p.n) {
    throw ShapeError("perturbed_personalized_optimum: need one noise vector per client");
  }

  ModelVector u_sum = ModelVector::Zero(p.d);
  for (const auto& u : instance.u_hat) u_sum += u;
  ModelVector z_sum = ModelVector::Zero(p.d);
  for (const auto& z : noise) {
    if (z.size() != p.d) throw ShapeError("perturbed_personalized_optimum: noise dimension");
    z_sum += z;
  }

  const double bb = static_cast<double>(p.b);
  const double nn = static_cast<double>(p.n);
  const double front = bb / ((2.0 - lambda) * p.rho + bb * lambda);
  const double coef_self = (2.0 - lambda) * p.rho / bb + lambda / nn;

  std::vector<ModelVector> result;
  result.reserve(static_cast<std::size_t>(p.n));
  for (int c = 0; c < p.n; ++c) {
    const ModelVector& u_n = instance.u_hat[static_cast<std::size_t>(c)];
    result.push_back(front *
                     (coef_self * u_n + (lambda / nn) * (u_sum - u_n) + (lambda / nn) * z_sum));
  }
  return result;
}

double sigma_w2(const BlrParams& params) {
  params.validate();
  const double nn = static_cast<double>(params.n);
  return 1.0 /
         ((nn - 1.0) / (params.sigma2 / params.rho + nn * params.zeta2) + params.rho / params.sigma2);
}

MixtureCoefficients local_opt_mixture(const BlrParams& params) {
  const double w2 = sigma_w2(params);
  const double nn = static_cast<double>(params.n);
  return MixtureCoefficients{
      w2 * params.rho / params.sigma2,
      w2 * params.rho / (params.sigma2 + nn * params.zeta2 * params.rho),
  };
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) throw FormatError("instance JSON: empty matrix");
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index jj = 0; jj < cols; ++jj) m(i, jj) = j.at(i).at(jj).get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
  return v;
}

}  // namespace

std::string to_json(const BlrInstance& instance) {
  nlohmann::json j;
  j["n"] = instance.params.n;
  j["b"] = instance.params.b;
  j["d"] = instance.params.d;
  j["rho"] = instance.params.rho;
  j["zeta2"] = instance.params.zeta2;
  j["sigma2"] = instance.params.sigma2;
  j["omega_star"] = vector_to_json(instance.omega_star);
  j["u_star"] = nlohmann::json::array();
  j["u_hat"] = nlohmann::json::array();
  j["designs"] = nlohmann::json::array();
  j["observations"] = nlohmann::json::array();
  for (int c = 0; c < instance.params.n; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    j["u_star"].push_back(vector_to_json(instance.u_star[cu]));
    j["u_hat"].push_back(vector_to_json(instance.u_hat[cu]));
    j["designs"].push_back(matrix_to_json(instance.designs[cu]));
    j["observations"].push_back(vector_to_json(instance.observations[cu]));
  }
  return j.dump(2);
}

BlrInstance from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("instance JSON: ") + e.what());
  }
  try {
    BlrInstance inst;
    inst.params.n = j.at("n").get<int>();
    inst.params.b = j.at("b").get<int>();
    inst.params.d = j.at("d").get<int>();
    inst.params.rho = j.at("rho").get<double>();
    inst.params.zeta2 = j.at("zeta2").get<double>();
    inst.params.sigma2 = j.at("sigma2").get<double>();
    inst.params.validate();
    inst.omega_star = vector_from_json(j.at("omega_star"));
    for (int c = 0; c < inst.params.n; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      inst.u_star.push_back(vector_from_json(j.at("u_star").at(cu)));
      inst.u_hat.push_back(vector_from_json(j.at("u_hat").at(cu)));
      inst.designs.push_back(matrix_from_json(j.at("designs").at(cu)));
      inst.observations.push_back(vector_from_json(j.at("observations").at(cu)));
    }
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("instance JSON: ") + e.what());
  }
}

void save_instance(const BlrInstance& instance, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("save_instance: cannot open " + path);
  out << to_json(instance) << '\n';
}

BlrInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("load_instance: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

}  // namespace dpfl::blr
