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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "dpfl/cli/config.hpp"
#include "dpfl/cli/csv.hpp"
#include "dpfl/cli/idx.hpp"
#include "dpfl/cli/runner.hpp"

using namespace dpfl;
namespace fs = std::filesystem;

namespace {

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void push_u32(std::vector<unsigned char>& v, std::uint32_t x) {
  v.push_back(static_cast<unsigned char>((x >> 24) & 0xFF));
  v.push_back(static_cast<unsigned char>((x >> 16) & 0xFF));
  v.push_back(static_cast<unsigned char>((x >> 8) & 0xFF));
  v.push_back(static_cast<unsigned char>(x & 0xFF));
}

// Two 2x2 images with pixel values 0..7, labels {3, 7}.
void write_idx_fixture(const std::string& images, const std::string& labels) {
  std::vector<unsigned char> img;
  push_u32(img, 0x00000803);
  push_u32(img, 2);
  push_u32(img, 2);
  push_u32(img, 2);
  for (unsigned char p = 0; p < 8; ++p) img.push_back(p);
  write_bytes(images, img);

  std::vector<unsigned char> lab;
  push_u32(lab, 0x00000801);
  push_u32(lab, 2);
  lab.push_back(3);
  lab.push_back(7);
  write_bytes(labels, lab);
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

const char* kBlrConfig =
    "# minimal linear-regression world\n"
    "model = quadratic\n"
    "dataset = synthetic-blr\n"
    "n_clients = 3\n"
    "blr_samples_per_client = 4\n"
    "blr_dim = 2\n"
    "rounds = 5\n"
    "epsilon = 10\n"
    "seed = 9\n";

}  // namespace

TEST_CASE("config parsing: values, comments, lists") {
  const auto cfg = cli::parse_config_text(
      "model = mlr\n"
      "classes = 4\n"
      "dataset = synthetic-classification\n"
      "synth_samples = 200\n"
      "synth_features = 6\n"
      "n_clients = 5   # trailing comment\n"
      "rounds = 3\n"
      "epsilon = inf\n"
      "lambda_grid = 0 0.5 2\n"
      "sweep_seeds = 1 2 3\n");
  CHECK(cfg.model == "mlr");
  CHECK(cfg.classes == 4);
  CHECK(cfg.n_clients == 5);
  CHECK(std::isinf(cfg.epsilon));
  CHECK(cfg.lambda_grid == std::vector<double>{0.0, 0.5, 2.0});
  CHECK(cfg.sweep_seeds == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("config schema violations carry line numbers") {
  try {
    cli::parse_config_text("model = mlr\nnot_a_key = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
  }
  try {
    cli::parse_config_text("rounds = 5\nrounds = 6\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);  // duplicate key
  }
  try {
    cli::parse_config_text("rounds = soon\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 1);  // type error
  }
  CHECK_THROWS_AS(cli::parse_config_text("lambda = 3\n"), ConfigError);    // range
  CHECK_THROWS_AS(cli::parse_config_text("model = cnn\n"), ConfigError);   // enum
  CHECK_THROWS_AS(cli::parse_config_text("dataset = idx-files\nmodel = mlr\n"), ConfigError);
}

TEST_CASE("idx fixture parses to scaled features and labels") {
  write_idx_fixture("t_images.idx", "t_labels.idx");
  const ClientDataset ds = cli::read_idx("t_images.idx", "t_labels.idx");
  CHECK(ds.size() == 2);
  CHECK(ds.dim() == 4);
  CHECK(ds.features(0, 0) == doctest::Approx(0.0));
  CHECK(ds.features(0, 3) == doctest::Approx(3.0 / 255.0));
  CHECK(ds.features(1, 0) == doctest::Approx(4.0 / 255.0));
  CHECK(ds.labels == std::vector<int>{3, 7});
  fs::remove("t_images.idx");
  fs::remove("t_labels.idx");
}

TEST_CASE("idx rejects bad magic, truncation, and count mismatches") {
  // Labels magic passed where images are expected.
  std::vector<unsigned char> lab;
  push_u32(lab, 0x00000801);
  push_u32(lab, 1);
  lab.push_back(0);
  write_bytes("t_bad.idx", lab);
  CHECK_THROWS_AS(cli::read_idx("t_bad.idx", "t_bad.idx"), FormatError);
  try {
    cli::read_idx("t_bad.idx", "t_bad.idx");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("0x00000801") != std::string::npos);
    CHECK(std::string(e.what()).find("0x00000803") != std::string::npos);
  }
  fs::remove("t_bad.idx");

  write_idx_fixture("t_images.idx", "t_labels.idx");

  // Truncated image payload.
  std::string img = read_file("t_images.idx");
  write_text("t_trunc.idx", img.substr(0, img.size() - 3));
  CHECK_THROWS_AS(cli::read_idx("t_trunc.idx", "t_labels.idx"), FormatError);
  fs::remove("t_trunc.idx");

  // Count mismatch.
  std::vector<unsigned char> one;
  push_u32(one, 0x00000801);
  push_u32(one, 1);
  one.push_back(0);
  write_bytes("t_one.idx", one);
  CHECK_THROWS_AS(cli::read_idx("t_images.idx", "t_one.idx"), FormatError);
  fs::remove("t_one.idx");
  fs::remove("t_images.idx");
  fs::remove("t_labels.idx");
}

TEST_CASE("build_experiment materializes each dataset kind") {
  cli::ExperimentConfig cfg;
  cfg.dataset = "synthetic-blr";
  cfg.n_clients = 3;
  const auto blr_data = cli::build_experiment(cfg);
  CHECK(blr_data.train.size() == 3);
  CHECK(blr_data.instance.has_value());
  CHECK(blr_data.train[0].has_targets());

  cli::ExperimentConfig cls;
  cls.model = "mlr";
  cls.dataset = "synthetic-classification";
  cls.classes = 4;
  cls.synth_samples = 120;
  cls.synth_features = 5;
  cls.n_clients = 4;
  cls.holdout_fraction = 0.25;
  const auto cls_data = cli::build_experiment(cls);
  CHECK(cls_data.train.size() == 4);
  CHECK(cls_data.eval.size() == 4);
  CHECK(cls_data.train[0].size() == 23);  // 30 per client, 7 held out
  CHECK(cls_data.eval[0].size() == 7);
}

TEST_CASE("train run writes outputs with the documented row count, reruns byte-identically") {
  write_text("t_cfg.conf", std::string(kBlrConfig) + "out_dir = t_out_a\n");
  REQUIRE(cli::run_command("train", "t_cfg.conf") == cli::kExitOk);

  CHECK(fs::exists("t_out_a/summary.json"));
  CHECK(fs::exists("t_out_a/manifest.json"));
  CHECK(fs::exists("t_out_a/series_metric_vs_round_per_epsilon.csv"));
  const std::string rounds_csv = read_file("t_out_a/eps10_seed9/rounds.csv");
  // header + T*N client rows + T aggregate rows = 1 + 5*3 + 5.
  CHECK(count_lines(rounds_csv) == 21);

  write_text("t_cfg_b.conf", std::string(kBlrConfig) + "out_dir = t_out_b\n");
  REQUIRE(cli::run_command("train", "t_cfg_b.conf") == cli::kExitOk);
  CHECK(read_file("t_out_b/eps10_seed9/rounds.csv") == rounds_csv);
  CHECK(read_file("t_out_b/summary.json") == read_file("t_out_a/summary.json"));

  // Every numeric cell round-trips: parse then re-format gives the same text.
  std::istringstream in(rounds_csv);
  std::string line;
  std::getline(in, line);  // header
  int cells = 0;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      if (cell.empty()) continue;
      if (cell.find('.') != std::string::npos || cell.find('e') != std::string::npos ||
          cell == "nan" || cell == "inf") {
        CHECK(cli::fmt(std::stod(cell)) == cell);
      } else {
        CHECK(cli::fmt(std::stol(cell)) == cell);
      }
      ++cells;
    }
  }
  CHECK(cells > 0);

  fs::remove_all("t_out_a");
  fs::remove_all("t_out_b");
  fs::remove("t_cfg.conf");
  fs::remove("t_cfg_b.conf");
}

TEST_CASE("epsilon sweeps write one entry directory per budget") {
  write_text("t_sweep.conf", std::string(kBlrConfig) +
                                 "out_dir = t_out_sweep\n"
                                 "sweep_epsilons = 1 100\n"
                                 "sweep_seeds = 9 10\n"
                                 "workers = 2\n");
  REQUIRE(cli::run_command("train", "t_sweep.conf") == cli::kExitOk);
  CHECK(fs::exists("t_out_sweep/eps1_seed9/rounds.csv"));
  CHECK(fs::exists("t_out_sweep/eps1_seed10/rounds.csv"));
  CHECK(fs::exists("t_out_sweep/eps100_seed9/rounds.csv"));
  CHECK(fs::exists("t_out_sweep/eps100_seed10/rounds.csv"));
  const std::string series = read_file("t_out_sweep/series_metric_vs_round_per_epsilon.csv");
  CHECK(count_lines(series) == 1 + 2 * 5);  // header + per-epsilon per-round means
  fs::remove_all("t_out_sweep");
  fs::remove("t_sweep.conf");
}

TEST_CASE("schema violations exit 2, numeric blowups exit 3") {
  write_text("t_bad.conf", "model = quadratic\nbogus = 1\n");
  CHECK(cli::run_command("train", "t_bad.conf") == cli::kExitConfig);
  CHECK(cli::run_command("definitely-not-a-command", "t_bad.conf") == cli::kExitConfig);
  fs::remove("t_bad.conf");

  CHECK(cli::run_command("train", "t_missing.conf") == cli::kExitConfig);

  write_text("t_nan.conf",
             "model = quadratic\n"
             "dataset = synthetic-blr\n"
             "n_clients = 3\n"
             "blr_samples_per_client = 4\n"
             "blr_dim = 2\n"
             "epsilon = 10\n"
             "out_dir = t_out_nan\n"
             "eta_l = 1e9\n"
             "lambda = 0.5\n"
             "rounds = 80\n");
  CHECK(cli::run_command("train", "t_nan.conf") == cli::kExitNumeric);
  fs::remove_all("t_out_nan");
  fs::remove("t_nan.conf");
}

TEST_CASE("analysis subcommands produce their artifacts") {
  write_text("t_an.conf", std::string(kBlrConfig) +
                              "out_dir = t_out_an\n"
                              "t_max = 10\n"
                              "t_grid = 2 5\n"
                              "lambda_grid = 0 0.5 1 2\n"
                              "oracle_trials = 20000\n"
                              "mu = 2.5\n"
                              "l_smooth = 3\n");

  REQUIRE(cli::run_command("bounds", "t_an.conf") == cli::kExitOk);
  const std::string h_series = read_file("t_out_an/series_h_vs_T.csv");
  CHECK(count_lines(h_series) == 1 + 11);  // header + T in 0..10

  REQUIRE(cli::run_command("fairness", "t_an.conf") == cli::kExitOk);
  const std::string f_series = read_file("t_out_an/series_fairness_vs_lambda.csv");
  CHECK(count_lines(f_series) == 1 + 2 * 4);  // header + |t_grid| * |lambda_grid|

  REQUIRE(cli::run_command("optimize", "t_an.conf") == cli::kExitOk);
  CHECK(fs::exists("t_out_an/optimize_trace.csv"));

  REQUIRE(cli::run_command("oracle", "t_an.conf") == cli::kExitOk);
  CHECK(fs::exists("t_out_an/oracle.csv"));

  REQUIRE(cli::run_command("gradcheck", "t_an.conf") == cli::kExitOk);

  fs::remove_all("t_out_an");
  fs::remove("t_an.conf");
}

TEST_CASE("tune runs the alternating search end to end") {
  write_text("t_tune.conf", std::string(kBlrConfig) +
                                "out_dir = t_out_tune\n"
                                "t_grid = 2 4\n"
                                "lambda_grid = 0 1\n");
  REQUIRE(cli::run_command("tune", "t_tune.conf") == cli::kExitOk);
  CHECK(fs::exists("t_out_tune/tune_trace.csv"));
  CHECK(fs::exists("t_out_tune/summary.json"));
  const std::string series = read_file("t_out_tune/series_metric_vs_round_per_lambda.csv");
  CHECK(count_lines(series) > 1);  // per-lambda trajectories at the tuned T
  fs::remove_all("t_out_tune");
  fs::remove("t_tune.conf");
}

TEST_CASE("empty traces emit header-only series files") {
  cli::emit_plot_series("t_out_empty", cli::RunTrace{});
  for (const char* name :
       {"series_metric_vs_round_per_epsilon.csv", "series_metric_vs_round_per_lambda.csv",
        "series_fairness_vs_lambda.csv", "series_h_vs_T.csv"}) {
    const std::string text = read_file(std::string("t_out_empty/") + name);
    CHECK(count_lines(text) == 1);
  }
  fs::remove_all("t_out_empty");
}

TEST_CASE("h series respects the floor invariant") {
  write_text("t_hb.conf",
             "model = quadratic\n"
             "dataset = synthetic-blr\n"
             "n_clients = 3\n"
             "blr_samples_per_client = 4\n"
             "blr_dim = 2\n"
             "rounds = 5\n"
             "seed = 9\n"
             "out_dir = t_out_hb\n"
             "t_max = 50\n"
             "mu = 2.5\n"
             "l_smooth = 3\n"
             "epsilon = 5\n");
  REQUIRE(cli::run_command("bounds", "t_hb.conf") == cli::kExitOk);
  std::istringstream in(read_file("t_out_hb/series_h_vs_T.csv"));
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string t_s, h_s, low_s;
    std::getline(row, t_s, ',');
    std::getline(row, h_s, ',');
    std::getline(row, low_s, ',');
    CHECK(std::stod(h_s) >= std::stod(low_s) - 1e-9);
  }
  fs::remove_all("t_out_hb");
  fs::remove("t_hb.conf");
}
