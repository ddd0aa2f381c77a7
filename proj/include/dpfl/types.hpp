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

#ifndef DPFL_TYPES_HPP
#define DPFL_TYPES_HPP

#include <cstdint>

#include <Eigen/Core>

#include "dpfl/errors.hpp"

namespace dpfl {

/// Dense real parameter vector. Holds global, local, and personalized models
/// and their noisy/optimal variants alike; entries must stay finite.
using ModelVector = Eigen::VectorXd;

inline void check_model_vector(const ModelVector& v, const char* what) {
  if (v.size() == 0) throw ShapeError(std::string(what) + ": empty parameter vector");
  if (!v.allFinite()) throw NumericFailure(std::string(what) + ": non-finite entry");
}

/// (epsilon, delta) differential-privacy requirement plus the model clipping
/// threshold C. epsilon may be +infinity (no noise).
struct PrivacySpec {
  double epsilon = 10.0;
  double delta = 0.01;
  double clip_c = 20.0;

  void validate() const {
    if (!(epsilon > 0)) throw DomainError("PrivacySpec: epsilon must be > 0");
    if (!(delta > 0 && delta < 1)) throw DomainError("PrivacySpec: delta must be in (0,1)");
    if (!(clip_c > 0)) throw DomainError("PrivacySpec: clipping threshold must be > 0");
  }
};

struct TrainingConfig {
  int n_clients = 1;
  int rounds = 0;
  double eta_g = 0.005;   // local-model (global objective) learning rate
  double eta_l = 0.005;   // personalized-model learning rate
  double lambda = 0.1;    // weighting between personalization (0) and FL (2)
  std::uint64_t seed = 1;

  void validate() const {
    if (n_clients < 1) throw DomainError("TrainingConfig: need at least one client");
    if (rounds < 0) throw DomainError("TrainingConfig: rounds must be >= 0");
    if (!(eta_g > 0)) throw DomainError("TrainingConfig: eta_g must be > 0");
    if (!(eta_l > 0)) throw DomainError("TrainingConfig: eta_l must be > 0");
    if (!(lambda >= 0 && lambda <= 2)) throw DomainError("TrainingConfig: lambda must be in [0,2]");
  }
};

/// Strong-convexity/smoothness constants and initial-gap terms that feed the
/// convergence bounds: mu-strong convexity, L-smoothness, gradient-norm bound
/// G0, optima-distance bound M, initial global loss gap Psi1, and initial
/// personalized squared distance Psi2.
struct AssumptionParams {
  double mu = 1.0;
  double l_smooth = 1.0;
  double g0 = 1.0;
  double m_dist = 1.0;
  double psi1 = 1.0;
  double psi2 = 1.0;

  void validate() const {
    if (!(mu > 0)) throw DomainError("AssumptionParams: mu must be > 0");
    if (!(l_smooth >= mu)) throw DomainError("AssumptionParams: L must be >= mu");
    if (g0 < 0 || m_dist < 0 || psi1 < 0 || psi2 < 0) {
      throw DomainError("AssumptionParams: G0, M, Psi1, Psi2 must be >= 0");
    }
  }

  /// eta_g <= 2/L and mu > (2-2*lambda)/(2-lambda); violations downgrade the
  /// bounds to heuristic rather than erroring.
  bool holds_for(double eta_g, double lambda) const {
    if (eta_g > 2.0 / l_smooth) return false;
    if (lambda < 2.0 && !(mu * (2.0 - lambda) > 2.0 - 2.0 * lambda)) return false;
    return true;
  }
};

}  // namespace dpfl

#endif  // DPFL_TYPES_HPP
