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

#include "dpfl/cli/idx.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <vector>

#include "dpfl/errors.hpp"

namespace dpfl::cli {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("idx: cannot open " + path);
  return std::vector<unsigned char>((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
}

std::uint32_t read_u32(const std::vector<unsigned char>& buf, std::size_t offset,
                       const std::string& path) {
  if (offset + 4 > buf.size()) {
    throw FormatError("idx: " + path + " truncated at offset " + std::to_string(offset));
  }
  return (static_cast<std::uint32_t>(buf[offset]) << 24) |
         (static_cast<std::uint32_t>(buf[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(buf[offset + 2]) << 8) |
         static_cast<std::uint32_t>(buf[offset + 3]);
}

[[noreturn]] void bad_magic(std::uint32_t got, std::uint32_t want, const std::string& path) {
  char msg[160];
  std::snprintf(msg, sizeof(msg), "idx: %s has magic 0x%08X, expected 0x%08X", path.c_str(), got,
                want);
  throw FormatError(msg);
}

}  // namespace

ClientDataset read_idx(const std::string& images_path, const std::string& labels_path) {
  const std::vector<unsigned char> img = read_file(images_path);
  const std::uint32_t img_magic = read_u32(img, 0, images_path);
  if (img_magic != kImagesMagic) bad_magic(img_magic, kImagesMagic, images_path);
  const std::uint32_t count = read_u32(img, 4, images_path);
  const std::uint32_t rows = read_u32(img, 8, images_path);
  const std::uint32_t cols = read_u32(img, 12, images_path);
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  if (img.size() != 16 + static_cast<std::size_t>(count) * pixels) {
    throw FormatError("idx: " + images_path + " payload size does not match header (" +
                      std::to_string(img.size() - 16) + " bytes for " + std::to_string(count) +
                      " images of " + std::to_string(pixels) + " pixels)");
  }

  const std::vector<unsigned char> lab = read_file(labels_path);
  const std::uint32_t lab_magic = read_u32(lab, 0, labels_path);
  if (lab_magic != kLabelsMagic) bad_magic(lab_magic, kLabelsMagic, labels_path);
  const std::uint32_t lab_count = read_u32(lab, 4, labels_path);
  if (lab.size() != 8 + static_cast<std::size_t>(lab_count)) {
    throw FormatError("idx: " + labels_path + " payload size does not match header");
  }
  if (lab_count != count) {
    throw FormatError("idx: image count " + std::to_string(count) + " != label count " +
                      std::to_string(lab_count));
  }
  if (count == 0 || pixels == 0) throw FormatError("idx: empty dataset");

  ClientDataset out;
  out.features.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
  out.labels.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t base = 16 + static_cast<std::size_t>(i) * pixels;
    for (std::size_t p = 0; p < pixels; ++p) {
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) =
          static_cast<double>(img[base + p]) / 255.0;
    }
    out.labels[i] = static_cast<int>(lab[8 + i]);
  }
  return out;
}

}  // namespace dpfl::cli
