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

#include "qcoord/runs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "qcoord/checkpoint.hpp"
#include "qcoord/error.hpp"
#include "qcoord/plot.hpp"

namespace qcoord {

namespace fs = std::filesystem;

std::size_t default_local_dim(const std::string& game) {
  if (game.rfind("rendezvous", 0) == 0) return 3;
  return 2;
}

GameTrainConfig default_game_config(const std::string& game) {
  GameTrainConfig cfg;
  cfg.local_dim = default_local_dim(game);
  return cfg;
}

double GameRunReport::worst_advantage_pct() const {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& r : runs) worst = std::min(worst, r.advantage_pct);
  return runs.empty() ? std::numeric_limits<double>::quiet_NaN() : worst;
}

double GameRunReport::best_win() const {
  double best = 0.0;
  for (const auto& r : runs) best = std::max(best, r.result.best_win);
  return best;
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  std::vector<std::exception_ptr> errors(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = first + i;
  return seeds;
}

GameRunReport run_game_seeds(const std::string& game, RendezvousAnswers answers, const GameTrainConfig& cfg,
                             std::span<const std::uint64_t> seeds, std::size_t workers,
                             const std::function<void(const SeedRun&)>& done) {
  cfg.validate();
  require(!seeds.empty(), ErrorCode::InvalidArgument, "at least one seed is required");
  const NonlocalGame g = make_game(game, answers);
  GameRunReport report;
  report.game = game;
  report.answers = answers;
  report.config = cfg;
  report.classical = classical_optimum(g).value;
  report.quantum_reference = quantum_reference_value(game);
  report.runs.resize(seeds.size());
  std::mutex mutex;
  parallel_for(seeds.size(), workers, [&](std::size_t i) {
    GameTrainConfig c = cfg;
    c.seed = seeds[i];
    auto& run = report.runs[i];
    run.seed = seeds[i];
    run.result = train_game(g, c);
    run.advantage_pct = std::isfinite(report.quantum_reference)
                            ? quantum_advantage_pct(run.result.best_win, report.classical, report.quantum_reference)
                            : std::numeric_limits<double>::quiet_NaN();
    if (done) {
      std::lock_guard lock(mutex);
      done(run);
    }
  });
  return report;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  require(!ec, ErrorCode::Io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(f), ErrorCode::Io, "cannot open " + path.string() + " for writing");
  f << text;
  f.close();
  require(!f.fail(), ErrorCode::Io, "write failed: " + path.string());
}

void write_game_summary_csv(const GameRunReport& report, std::ostream& out) {
  out << "seed,best_win,best_step,classical,advantage_pct\n";
  const auto old = out.precision(10);
  for (const auto& r : report.runs)
    out << r.seed << ',' << r.result.best_win << ',' << r.result.best_step << ',' << report.classical << ','
        << r.advantage_pct << '\n';
  out.precision(old);
}

void write_game_report(const GameRunReport& report, const RunOutput& out) {
  if (out.dir.empty()) return;
  for (const auto& r : report.runs) {
    const fs::path dir = out.dir / ("seed_" + std::to_string(r.seed));
    std::ostringstream csv;
    write_train_csv(r.result.records, csv);
    write_text_file(dir / "train.csv", csv.str());
    GameCheckpoint ckpt;
    ckpt.game = report.game;
    ckpt.answers = report.answers;
    ckpt.config = report.config;
    ckpt.config.seed = r.seed;
    ckpt.step = r.result.best_step;
    ckpt.params = r.result.best;
    write_text_file(dir / "checkpoint.json", checkpoint_to_string(ckpt));
    if (out.plot) {
      PlotSeries win{"win probability", {}, {}}, classical{"classical optimum", {}, {}};
      for (const auto& rec : r.result.records) {
        win.x.push_back(static_cast<double>(rec.step));
        win.y.push_back(rec.win_prob);
      }
      if (!r.result.records.empty()) {
        classical.x = {win.x.front(), win.x.back()};
        classical.y = {report.classical, report.classical};
      }
      const PlotSeries series[] = {win, classical};
      std::ostringstream svg;
      write_svg_line_chart(series, {report.game + " seed " + std::to_string(r.seed), "step", "win probability"}, svg);
      write_text_file(dir / "train.svg", svg.str());
    }
  }
  std::ostringstream summary;
  write_game_summary_csv(report, summary);
  write_text_file(out.dir / "summary.csv", summary.str());
}

namespace {

std::string alpha_tag(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "alpha_%g", alpha);
  return buf;
}

}  // namespace

std::vector<Table1Cell> reproduce_table1(const Table1Options& opts, const RunOutput& out,
                                         const std::function<void(const Table1Cell&)>& done) {
  require(!opts.games.empty() && !opts.alphas.empty(), ErrorCode::InvalidArgument, "empty table");
  std::vector<Table1Cell> cells;
  for (const auto& game : opts.games)
    for (double alpha : opts.alphas) {
      GameTrainConfig cfg = default_game_config(game);
      cfg.entropy_coef = alpha;
      cfg.steps = opts.steps;
      const GameRunReport report = run_game_seeds(game, RendezvousAnswers::EdgeIndex, cfg, opts.seeds, opts.workers);
      if (!out.dir.empty()) write_game_report(report, {out.dir / game / alpha_tag(alpha), out.plot});
      Table1Cell cell;
      cell.game = game;
      cell.alpha = alpha;
      cell.runs = report.runs.size();
      cell.worst_advantage_pct = report.worst_advantage_pct();
      cell.best_win = report.best_win();
      double sum = 0.0;
      for (const auto& r : report.runs) {
        sum += r.advantage_pct;
        if (!(r.advantage_pct > 0.0)) ++cell.zero_runs;
      }
      cell.mean_advantage_pct = sum / static_cast<double>(report.runs.size());
      cells.push_back(cell);
      if (done) done(cell);
    }
  if (!out.dir.empty()) {
    std::ostringstream csv;
    write_table1_csv(cells, csv);
    write_text_file(out.dir / "table1.csv", csv.str());
    write_text_file(out.dir / "table1.txt", format_table1(cells));
  }
  return cells;
}

void write_table1_csv(std::span<const Table1Cell> cells, std::ostream& out) {
  out << "game,alpha,runs,worst_advantage_pct,mean_advantage_pct,best_win,zero_runs\n";
  const auto old = out.precision(10);
  for (const auto& c : cells)
    out << c.game << ',' << c.alpha << ',' << c.runs << ',' << c.worst_advantage_pct << ',' << c.mean_advantage_pct
        << ',' << c.best_win << ',' << c.zero_runs << '\n';
  out.precision(old);
}

std::string format_table1(std::span<const Table1Cell> cells) {
  std::vector<double> alphas;
  std::vector<std::string> games;
  for (const auto& c : cells) {
    if (std::find(alphas.begin(), alphas.end(), c.alpha) == alphas.end()) alphas.push_back(c.alpha);
    if (std::find(games.begin(), games.end(), c.game) == games.end()) games.push_back(c.game);
  }
  std::string text = "Worst-run learned quantum advantage (%)\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-10s", "alpha");
  text += buf;
  for (const auto& g : games) {
    std::snprintf(buf, sizeof buf, " %18s", g.c_str());
    text += buf;
  }
  text += '\n';
  for (double a : alphas) {
    std::snprintf(buf, sizeof buf, "%-10g", a);
    text += buf;
    for (const auto& g : games) {
      auto it = std::find_if(cells.begin(), cells.end(), [&](const Table1Cell& c) { return c.game == g && c.alpha == a; });
      if (it == cells.end())
        std::snprintf(buf, sizeof buf, " %18s", "-");
      else
        std::snprintf(buf, sizeof buf, " %17.2f%%", it->worst_advantage_pct);
      text += buf;
    }
    text += '\n';
  }
  return text;
}

void write_queue_curve_csv(std::span<const QueueEvalRecord> curve, std::ostream& out) {
  out << "update,throughput,throughput_stderr,mean_wait,wait_stderr,lagrange\n";
  const auto old = out.precision(17);
  for (const auto& r : curve)
    out << r.update << ',' << r.throughput << ',' << r.throughput_stderr << ',' << r.wait << ',' << r.wait_stderr
        << ',' << r.lagrange << '\n';
  out.precision(old);
}

void write_sweep_outputs(std::span<const SweepPoint> points, const MappoConfig& cfg, const RunOutput& out) {
  if (out.dir.empty()) return;
  std::ostringstream csv;
  write_sweep_csv(points, csv);
  write_text_file(out.dir / "sweep.csv", csv.str());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const fs::path dir = out.dir / ("point_" + std::to_string(i));
    std::ostringstream curve;
    write_queue_curve_csv(p.curve, curve);
    write_text_file(dir / "curve.csv", curve.str());
    RouterCheckpoint ckpt{cfg, p.curve.empty() ? 0 : p.curve.back().update, p.policy};
    ckpt.config.queue.wait_limit = p.wait_limit;
    write_text_file(dir / "checkpoint.json", checkpoint_to_string(ckpt));
    if (out.plot) {
      PlotSeries thr{"throughput", {}, {}}, wait{"mean wait", {}, {}}, limit{"wait limit", {}, {}};
      for (const auto& r : p.curve) {
        thr.x.push_back(static_cast<double>(r.update));
        thr.y.push_back(r.throughput);
        wait.x.push_back(static_cast<double>(r.update));
        wait.y.push_back(r.wait);
      }
      if (!p.curve.empty()) {
        limit.x = {thr.x.front(), thr.x.back()};
        limit.y = {p.wait_limit, p.wait_limit};
      }
      const PlotSeries series[] = {thr, wait, limit};
      char title[64];
      std::snprintf(title, sizeof title, "%s router, wait limit %g", to_string(p.policy.kind), p.wait_limit);
      std::ostringstream svg;
      write_svg_line_chart(series, {title, "update", "value"}, svg);
      write_text_file(dir / "curve.svg", svg.str());
    }
  }
}

CoordinatorComparison compare_coordinators(const MappoConfig& cfg, const ComparisonOptions& opts,
                                           const RunOutput& out,
                                           const std::function<void(CoordinatorKind, const QueueEvalRecord&)>& progress) {
  cfg.validate();
  require(!opts.limits.empty(), ErrorCode::InvalidArgument, "empty wait-limit sweep");
  CoordinatorComparison result;
  const CoordinatorKind kinds[] = {CoordinatorKind::Quantum, CoordinatorKind::SharedRandomness};
  std::mutex mutex;
  parallel_for(2, opts.workers, [&](std::size_t k) {
    QueueProgress report;
    if (progress)
      report = [&, kind = kinds[k]](const QueueEvalRecord& r) {
        std::lock_guard lock(mutex);
        progress(kind, r);
      };
    auto points =
        sweep_queueing(cfg, kinds[k], opts.limits, opts.initial_runs, opts.eval_episodes, opts.eval_steps, report);
    (k == 0 ? result.quantum : result.classical) = std::move(points);
  });
  if (!out.dir.empty()) {
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& points = k == 0 ? result.quantum : result.classical;
      const std::string name = to_string(kinds[k]);
      std::ostringstream csv;
      write_sweep_csv(points, csv);
      write_text_file(out.dir / (name + ".csv"), csv.str());
      write_sweep_outputs(points, cfg, {out.dir / name, out.plot});
    }
    if (out.plot) {
      std::vector<PlotSeries> series;
      for (std::size_t k = 0; k < 2; ++k) {
        PlotSeries s{to_string(kinds[k]), {}, {}};
        for (const auto& p : k == 0 ? result.quantum : result.classical) {
          s.x.push_back(p.evaluation.wait);
          s.y.push_back(p.evaluation.throughput);
        }
        series.push_back(std::move(s));
      }
      std::ostringstream svg;
      write_svg_line_chart(series, {"throughput against mean wait", "mean wait", "throughput"}, svg);
      write_text_file(out.dir / "comparison.svg", svg.str());
    }
  }
  return result;
}

std::vector<double> parse_sweep(const std::string& spec) {
  double a = 0, b = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  in >> a >> c1 >> b >> c2 >> step;
  require(in && c1 == ':' && c2 == ':' && (in >> std::ws).eof(), ErrorCode::InvalidArgument,
          "sweep must look like start:stop:step, got '" + spec + "'");
  require(std::isfinite(a) && std::isfinite(b) && step > 0 && b >= a, ErrorCode::InvalidArgument,
          "sweep needs start <= stop and step > 0");
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double v = a + step * static_cast<double>(i);
    if (v > b + 1e-9 * std::max(1.0, std::abs(b))) break;
    grid.push_back(v);
    require(grid.size() <= 100000, ErrorCode::InvalidArgument, "sweep grid too large");
  }
  return grid;
}

}  // namespace qcoord
