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

/// @file Multi-seed run orchestration and the canned reproduction runs.
///
/// Results never depend on the worker count: each seed owns its RNG stream
/// and files are written from the calling thread after all workers finish.

#pragma once

#include <cstdint>
#include <functional>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qcoord/games.hpp"
#include "qcoord/mappo.hpp"
#include "qcoord/reinforce.hpp"

namespace qcoord {

/// Per-agent Hilbert dimension used when none is given: 2 for chsh and ghz,
/// 3 for rendezvous games.
std::size_t default_local_dim(const std::string& game);
GameTrainConfig default_game_config(const std::string& game);

/// Empty dir means nothing is written.
struct RunOutput {
  std::filesystem::path dir;
  bool plot = false;
};

struct SeedRun {
  std::uint64_t seed = 0;
  GameTrainResult result;
  double advantage_pct = 0.0;
};

struct GameRunReport {
  std::string game;
  RendezvousAnswers answers = RendezvousAnswers::EdgeIndex;
  GameTrainConfig config;
  double classical = 0.0;
  double quantum_reference = 0.0;
  std::vector<SeedRun> runs;

  double worst_advantage_pct() const;
  double best_win() const;
};

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions are
/// rethrown on the caller (lowest index first).
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// One training run per seed; cfg.seed is replaced by each entry of `seeds`.
/// `done` is called once per finished seed, serialized, in completion order.
GameRunReport run_game_seeds(const std::string& game, RendezvousAnswers answers, const GameTrainConfig& cfg,
                             std::span<const std::uint64_t> seeds, std::size_t workers = 1,
                             const std::function<void(const SeedRun&)>& done = {});

/// seed_<s>/train.csv, seed_<s>/checkpoint.json, seed_<s>/train.svg (when
/// plotting) and summary.csv.
void write_game_report(const GameRunReport& report, const RunOutput& out);
void write_game_summary_csv(const GameRunReport& report, std::ostream& out);

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count);

struct Table1Options {
  std::vector<std::string> games{"chsh", "ghz", "rendezvous-tetra", "rendezvous-cube"};
  std::vector<double> alphas{0.0, 0.2};
  std::vector<std::uint64_t> seeds = seed_range(0, 10);
  std::size_t steps = 5000;
  std::size_t workers = 1;
};

struct Table1Cell {
  std::string game;
  double alpha = 0.0;
  std::size_t runs = 0;
  double worst_advantage_pct = 0.0;
  double mean_advantage_pct = 0.0;
  double best_win = 0.0;
  std::size_t zero_runs = 0;  // runs with no advantage over classical
};

/// Trains every game x alpha cell. Per-cell run files go under
/// <dir>/<game>/alpha_<a>/, the table to table1.csv and table1.txt.
std::vector<Table1Cell> reproduce_table1(const Table1Options& opts, const RunOutput& out,
                                         const std::function<void(const Table1Cell&)>& done = {});
void write_table1_csv(std::span<const Table1Cell> cells, std::ostream& out);
std::string format_table1(std::span<const Table1Cell> cells);

struct ComparisonOptions {
  std::vector<double> limits{5.5};
  std::size_t initial_runs = 1;
  std::size_t eval_episodes = 20;
  std::size_t eval_steps = 20000;
  std::size_t workers = 1;
};

struct CoordinatorComparison {
  std::vector<SweepPoint> quantum;
  std::vector<SweepPoint> classical;
};

/// Sweeps both coordinator kinds over the same limits and seeds. Writes
/// quantum.csv, classical.csv, each sweep under quantum/ and classical/, and
/// comparison.svg when plotting. Progress may be called from two threads.
CoordinatorComparison compare_coordinators(const MappoConfig& cfg, const ComparisonOptions& opts,
                                           const RunOutput& out,
                                           const std::function<void(CoordinatorKind, const QueueEvalRecord&)>& progress = {});

/// sweep.csv plus point_<i>/curve.csv, point_<i>/checkpoint.json and
/// point_<i>/curve.svg when plotting.
void write_sweep_outputs(std::span<const SweepPoint> points, const MappoConfig& cfg, const RunOutput& out);

/// Columns: update,throughput,throughput_stderr,mean_wait,wait_stderr,lagrange.
void write_queue_curve_csv(std::span<const QueueEvalRecord> curve, std::ostream& out);

/// Inclusive grid a, a+step, ..., up to b (with a small tolerance).
std::vector<double> parse_sweep(const std::string& spec);

/// Creates parent directories; Io error on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace qcoord
