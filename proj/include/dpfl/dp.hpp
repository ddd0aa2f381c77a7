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

#ifndef DPFL_DP_HPP
#define DPFL_DP_HPP

#include "dpfl/rng.hpp"
#include "dpfl/types.hpp"

namespace dpfl::dp {

/// Calibrated Gaussian-mechanism noise levels. sigma_u is the per-client
/// standard deviation, sigma_z the standard deviation of the summed noise on
/// the aggregate; sigma_z^2 = N * sigma_u^2 by construction.
struct NoiseCalibration {
  double delta_s = 0.0;
  double sigma_u = 0.0;
  double sigma_z = 0.0;
};

/// L2 sensitivity of one client's local training under sample replacement
/// with clipping threshold `clip_c`: 2*C/|D_n|.
double sensitivity(double clip_c, int dataset_size);

/// Noise standard deviations guaranteeing (eps, delta)-DP over `t_rounds`
/// uploads from each of `n` clients:
///   sigma_u = delta_s * sqrt(2*T*N*ln(1/delta)) / (eps*N)
///   sigma_z = delta_s * sqrt(2*T*ln(1/delta)) / eps
/// The full T is budgeted up front; halting early only under-spends it.
NoiseCalibration calibrate(double delta_s, int t_rounds, int n, double eps, double delta);

/// Norm clipping: v / max(1, ||v||/C). Inputs already inside the ball are
/// returned bit-identically.
ModelVector clip_model(const ModelVector& v, double clip_c);

/// Adds i.i.d. per-coordinate Gaussian noise of standard deviation sigma_u;
/// sigma_u = 0 returns the input unchanged.
ModelVector perturb(const ModelVector& v, double sigma_u, RandomSource& rng);

}  // namespace dpfl::dp

#endif  // DPFL_DP_HPP
