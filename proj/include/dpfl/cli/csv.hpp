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

#ifndef DPFL_CLI_CSV_HPP
#define DPFL_CLI_CSV_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace dpfl::cli {

/// Locale-independent numeric formatting (std::to_chars): shortest
/// representation that round-trips, '.' decimal point, "inf"/"nan" literals.
std::string fmt(double v);
std::string fmt(long v);
std::string fmt(int v);
std::string fmt(std::uint64_t v);

/// Minimal CSV emitter: header row, UTF-8, '\n' line endings, fixed column
/// order. Values are written as passed; callers format numbers with fmt().
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& values);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace dpfl::cli

#endif  // DPFL_CLI_CSV_HPP
