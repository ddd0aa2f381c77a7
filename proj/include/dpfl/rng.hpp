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

#ifndef DPFL_RNG_HPP
#define DPFL_RNG_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace dpfl {

/// Deterministic, platform-independent random stream (SplitMix64 core with
/// Box-Muller normals). A (seed, stream) pair fully determines the sequence;
/// distinct streams are statistically independent. std:: distributions are
/// deliberately avoided: their output is implementation-defined, and every
/// emitted metric must be bit-reproducible across platforms and thread counts.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform01();

  /// Standard normal draw.
  double normal();
  double normal(double mean, double stddev);

  /// Vector of d independent N(0, stddev^2) draws.
  Eigen::VectorXd gaussian(int d, double stddev = 1.0);

  /// Unbiased uniform integer in [0, bound); bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound);

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

/// Independent reproducible stream; identical (seed, stream_id) pairs yield
/// identical sequences across runs and across parallel execution.
RandomSource seeded_rng(std::uint64_t seed, std::uint64_t stream_id);

/// Stream-id namespace so concurrent consumers never collide. `purpose`
/// separates noise, data shuffling, initialization, etc.; `a` and `b` are
/// typically (client, round) and must stay below 2^28.
namespace stream {

inline constexpr std::uint64_t kPartition = 1;
inline constexpr std::uint64_t kNoise = 2;
inline constexpr std::uint64_t kData = 3;
inline constexpr std::uint64_t kInit = 4;
inline constexpr std::uint64_t kBlr = 5;
inline constexpr std::uint64_t kOracle = 6;

std::uint64_t make(std::uint64_t purpose, std::uint64_t a = 0, std::uint64_t b = 0);

}  // namespace stream

}  // namespace dpfl

#endif  // DPFL_RNG_HPP
