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

#include "dpfl/dp.hpp"

#include <cmath>

#include "dpfl/errors.hpp"

namespace dpfl::dp {

double sensitivity(double clip_c, int dataset_size) {
  if (!(clip_c >= 0)) throw DomainError("sensitivity: clipping threshold must be >= 0");
  if (dataset_size < 1) throw DomainError("sensitivity: dataset size must be >= 1");
  return 2.0 * clip_c / static_cast<double>(dataset_size);
}

NoiseCalibration calibrate(double delta_s, int t_rounds, int n, double eps, double delta) {
  if (!(delta_s >= 0)) throw DomainError("calibrate: sensitivity must be >= 0");
  if (t_rounds < 1) throw DomainError("calibrate: need at least one round");
  if (n < 1) throw DomainError("calibrate: need at least one client");
  if (!(eps > 0)) throw DomainError("calibrate: epsilon must be > 0");
  if (!(delta > 0 && delta < 1)) throw DomainError("calibrate: delta must be in (0,1)");

  const double log_term = std::log(1.0 / delta);
  const double t = static_cast<double>(t_rounds);
  const double clients = static_cast<double>(n);

  NoiseCalibration cal;
  cal.delta_s = delta_s;
  cal.sigma_u = delta_s * std::sqrt(2.0 * t * clients * log_term) / (eps * clients);
  cal.sigma_z = delta_s * std::sqrt(2.0 * t * log_term) / eps;
  return cal;
}

ModelVector clip_model(const ModelVector& v, double clip_c) {
  if (!(clip_c > 0)) throw DomainError("clip_model: clipping threshold must be > 0");
  const double norm = v.norm();
  if (norm <= clip_c) return v;
  return v * (clip_c / norm);
}

ModelVector perturb(const ModelVector& v, double sigma_u, RandomSource& rng) {
  if (!(sigma_u >= 0)) throw DomainError("perturb: sigma_u must be >= 0");
  if (sigma_u == 0.0) return v;
  return v + rng.gaussian(static_cast<int>(v.size()), sigma_u);
}

}  // namespace dpfl::dp
