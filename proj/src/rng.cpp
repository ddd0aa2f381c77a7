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

#include "dpfl/rng.hpp"

#include <cmath>

#include "dpfl/errors.hpp"

namespace dpfl {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Murmur3 64-bit finalizer: full-avalanche mixing.
std::uint64_t fmix64(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xFF51AFD7ED558CCDULL;
  k ^= k >> 33;
  k *= 0xC4CEB9FE1A85EC53ULL;
  k ^= k >> 33;
  return k;
}

}  // namespace

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = fmix64(seed + kGolden);
  const std::uint64_t b = fmix64(stream + 0xD1B54A32D192ED03ULL);
  state_ = fmix64(a ^ (b + kGolden + (a << 6) + (a >> 2)));
}

std::uint64_t RandomSource::next_u64() {
  state_ += kGolden;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double RandomSource::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomSource::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  cached_ = r * std::sin(theta);
  has_cached_ = true;
  return r * std::cos(theta);
}

double RandomSource::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

Eigen::VectorXd RandomSource::gaussian(int d, double stddev) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = stddev * normal();
  return v;
}

std::uint64_t RandomSource::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw DomainError("uniform_below: bound must be positive");
  const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

RandomSource seeded_rng(std::uint64_t seed, std::uint64_t stream_id) {
  return RandomSource(seed, stream_id);
}

namespace stream {

std::uint64_t make(std::uint64_t purpose, std::uint64_t a, std::uint64_t b) {
  if (a >= (1ULL << 28) || b >= (1ULL << 28)) {
    throw DomainError("stream::make: index exceeds 2^28");
  }
  return (purpose << 56) | (a << 28) | b;
}

}  // namespace stream

}  // namespace dpfl
