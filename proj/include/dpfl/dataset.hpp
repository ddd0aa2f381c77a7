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

#ifndef DPFL_DATASET_HPP
#define DPFL_DATASET_HPP

#include <vector>

#include <Eigen/Core>

#include "dpfl/errors.hpp"
#include "dpfl/rng.hpp"

namespace dpfl {

/// A client's local samples: one feature row per sample plus either real
/// regression targets, integer class labels, or both.
struct ClientDataset {
  Eigen::MatrixXd features;  // b x d, one row per sample
  Eigen::VectorXd targets;   // real targets (size b or 0)
  std::vector<int> labels;   // class labels (size b or 0)

  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  bool has_targets() const { return targets.size() == features.rows() && size() > 0; }
  bool has_labels() const {
    return static_cast<Eigen::Index>(labels.size()) == features.rows() && size() > 0;
  }

  void validate() const {
    if (size() < 1) throw DomainError("ClientDataset: need at least one sample");
    if (!has_targets() && !has_labels()) {
      throw DomainError("ClientDataset: neither targets nor labels present");
    }
  }
};

struct PartitionScheme {
  enum class Kind { kIid, kLabelShard };
  Kind kind = Kind::kIid;
  int shards_per_client = 2;

  static PartitionScheme iid() { return {Kind::kIid, 0}; }
  static PartitionScheme label_shard(int k) { return {Kind::kLabelShard, k}; }
};

/// Splits `full` into n disjoint client datasets of identical size
/// floor(size/n); surplus samples are dropped so every client weight is
/// exactly 1/n. iid draws a random permutation; label-shard sorts by label
/// and hands each client `k` contiguous shards, which concentrates labels
/// per client (non-IID heterogeneity).
std::vector<ClientDataset> partition_dataset(const ClientDataset& full, int n,
                                             const PartitionScheme& scheme, RandomSource& rng);

}  // namespace dpfl

#endif  // DPFL_DATASET_HPP
