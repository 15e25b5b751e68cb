// Copyright 2026 The qcoord Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "qcoord/error.hpp"
#include "qcoord/plot.hpp"
#include "qcoord/runs.hpp"

using namespace qcoord;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "qcoord_test_runs" / name;
  fs::remove_all(dir);
  return dir;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("local dimension defaults per game") {
  CHECK(default_local_dim("chsh") == 2);
  CHECK(default_local_dim("ghz") == 2);
  CHECK(default_local_dim("rendezvous-tetra") == 3);
  CHECK(default_local_dim("rendezvous-cube") == 3);
  CHECK(default_local_dim("rendezvous:graph.txt") == 3);
  CHECK(default_game_config("rendezvous-cube").local_dim == 3);
}

TEST_CASE("sweep grids") {
  const auto g = parse_sweep("5.5:9.0:0.25");
  REQUIRE(g.size() == 15);
  CHECK(g.front() == 5.5);
  CHECK(g.back() == doctest::Approx(9.0));
  CHECK(parse_sweep("1:1:0.5") == std::vector<double>{1.0});
  CHECK(parse_sweep("0:1:0.1").size() == 11);
  for (const char* bad : {"5.5", "5.5:9", "5.5:9:0", "9:5.5:0.25", "a:b:c", "1:2:0.5x"})
    CHECK_THROWS_AS(parse_sweep(bad), Error);
}

TEST_CASE("svg charts are well formed and skip non-finite points") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const PlotSeries series[] = {{"a<b", {0, 1, 2, 3}, {0.5, nan, 0.7, 0.9}}, {"flat", {0, 3}, {1, 1}}};
  std::ostringstream out;
  write_svg_line_chart(series, {"t & u", "x", "y"}, out);
  const std::string svg = out.str();
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(count(svg, "<polyline") == 2);
  CHECK(svg.find("a&lt;b") != std::string::npos);
  CHECK(svg.find("t &amp; u") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
  std::ostringstream again;
  write_svg_line_chart(series, {"t & u", "x", "y"}, again);
  CHECK(again.str() == svg);

  std::ostringstream empty;
  write_svg_line_chart({}, {"", "", ""}, empty);
  CHECK(empty.str().find("</svg>") != std::string::npos);
}

TEST_CASE("parallel_for visits every index and rethrows") {
  std::vector<int> hits(50, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::count(hits.begin(), hits.end(), 1) == 50);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) fail(ErrorCode::Divergence, "boom");
                               }),
                  Error);
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}

TEST_CASE("multi-seed game runs do not depend on the worker count and files are reproducible") {
  GameTrainConfig cfg = default_game_config("chsh");
  cfg.steps = 30;
  cfg.batch_size = 64;
  const auto seeds = seed_range(3, 4);
  const auto serial = run_game_seeds("chsh", RendezvousAnswers::EdgeIndex, cfg, seeds, 1);
  const auto threaded = run_game_seeds("chsh", RendezvousAnswers::EdgeIndex, cfg, seeds, 3);
  REQUIRE(serial.runs.size() == 4);
  CHECK(serial.classical == 0.75);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(serial.runs[i].seed == 3 + i);
    CHECK(serial.runs[i].result.best_win == threaded.runs[i].result.best_win);
    CHECK(serial.runs[i].result.records.size() == 30);
  }

  const auto a = fresh_dir("a"), b = fresh_dir("b");
  write_game_report(serial, {a, true});
  write_game_report(threaded, {b, true});
  for (const char* f : {"summary.csv", "seed_3/train.csv", "seed_3/checkpoint.json", "seed_6/train.svg"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(slurp(a / "summary.csv").rfind("seed,best_win,best_step,classical,advantage_pct\n", 0) == 0);
  CHECK(count(slurp(a / "summary.csv"), "\n") == 5);
  CHECK_THROWS_AS(run_game_seeds("chsh", RendezvousAnswers::EdgeIndex, cfg, {}, 1), Error);
}

TEST_CASE("table reproduction produces eight cells") {
  Table1Options opts;
  opts.seeds = seed_range(0, 2);
  opts.steps = 2;
  const auto dir = fresh_dir("table");
  const auto cells = reproduce_table1(opts, {dir, false});
  REQUIRE(cells.size() == 8);
  for (const auto& c : cells) {
    CHECK(c.runs == 2);
    CHECK(c.worst_advantage_pct >= 0.0);
    CHECK(c.worst_advantage_pct <= c.mean_advantage_pct + 1e-12);
  }
  const std::string csv = slurp(dir / "table1.csv");
  CHECK(count(csv, "\n") == 9);
  CHECK(csv.find("rendezvous-cube,0.2,") != std::string::npos);
  CHECK(fs::exists(dir / "ghz" / "alpha_0.2" / "summary.csv"));
  const std::string text = slurp(dir / "table1.txt");
  CHECK(text == format_table1(cells));
  CHECK(count(text, "%") == 8 + 1);
}

TEST_CASE("queue curve csv") {
  std::vector<QueueEvalRecord> curve{{10, 1.5, 0.1, 5.0, 0.2, 0.3}};
  std::ostringstream out;
  write_queue_curve_csv(curve, out);
  CHECK(out.str() == "update,throughput,throughput_stderr,mean_wait,wait_stderr,lagrange\n10,1.5,0.10000000000000001,5,"
                     "0.20000000000000001,0.29999999999999999\n");
}
