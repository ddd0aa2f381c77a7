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

#include "dpfl/dataset.hpp"

#include <algorithm>
#include <numeric>

namespace dpfl {

namespace {

ClientDataset take_rows(const ClientDataset& full, const std::vector<int>& idx) {
  ClientDataset out;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), full.dim());
  if (full.has_targets()) out.targets.resize(static_cast<Eigen::Index>(idx.size()));
  if (full.has_labels()) out.labels.resize(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = full.features.row(idx[r]);
    if (full.has_targets()) out.targets[static_cast<Eigen::Index>(r)] = full.targets[idx[r]];
    if (full.has_labels()) out.labels[r] = full.labels[static_cast<std::size_t>(idx[r])];
  }
  return out;
}

}  // namespace

std::vector<ClientDataset> partition_dataset(const ClientDataset& full, int n,
                                             const PartitionScheme& scheme, RandomSource& rng) {
  full.validate();
  if (n < 1) throw DomainError("partition_dataset: need at least one client");
  if (full.size() < n) throw DomainError("partition_dataset: fewer samples than clients");

  const int per_client = full.size() / n;

  std::vector<std::vector<int>> assignment(static_cast<std::size_t>(n));

  if (scheme.kind == PartitionScheme::Kind::kIid) {
    std::vector<int> perm(static_cast<std::size_t>(full.size()));
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    for (int c = 0; c < n; ++c) {
      assignment[static_cast<std::size_t>(c)].assign(
          perm.begin() + static_cast<long>(c) * per_client,
          perm.begin() + static_cast<long>(c + 1) * per_client);
    }
  } else {
    if (!full.has_labels()) {
      throw DomainError("partition_dataset: label-shard scheme requires labels");
    }
    const int k = scheme.shards_per_client;
    if (k < 1) throw DomainError("partition_dataset: shards_per_client must be >= 1");

    std::vector<int> order(static_cast<std::size_t>(full.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return full.labels[static_cast<std::size_t>(a)] <
                                                full.labels[static_cast<std::size_t>(b)]; });

    // Each client owns k shard slots; the slot sizes within one client sum to
    // exactly per_client so partitions stay equally sized even when
    // per_client is not divisible by k.
    const int base = per_client / k;
    const int extra = per_client % k;  // first `extra` slots get one more
    struct Slot {
      int client;
      int size;
    };
    std::vector<Slot> slots;
    slots.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
    for (int c = 0; c < n; ++c) {
      for (int s = 0; s < k; ++s) {
        slots.push_back({c, base + (s < extra ? 1 : 0)});
      }
    }
    rng.shuffle(slots);

    std::size_t cursor = 0;
    for (const Slot& slot : slots) {
      auto& rows = assignment[static_cast<std::size_t>(slot.client)];
      rows.insert(rows.end(), order.begin() + static_cast<long>(cursor),
                  order.begin() + static_cast<long>(cursor) + slot.size);
      cursor += static_cast<std::size_t>(slot.size);
    }
  }

  std::vector<ClientDataset> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) out.push_back(take_rows(full, assignment[static_cast<std::size_t>(c)]));
  return out;
}

}  // namespace dpfl
