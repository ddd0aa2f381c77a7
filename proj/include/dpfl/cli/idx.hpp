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

#ifndef DPFL_CLI_IDX_HPP
#define DPFL_CLI_IDX_HPP

#include <string>

#include "dpfl/dataset.hpp"

namespace dpfl::cli {

/// Parses a big-endian IDX image/label file pair (magic 0x00000803 for
/// u8[n][rows][cols] images, 0x00000801 for u8[n] labels). Pixels are
/// flattened row-major and scaled to [0,1]; image and label counts must
/// match. Malformed magics, truncated payloads, and count mismatches raise
/// FormatError naming the offending bytes.
ClientDataset read_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace dpfl::cli

#endif  // DPFL_CLI_IDX_HPP
