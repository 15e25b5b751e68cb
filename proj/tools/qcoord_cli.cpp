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

// qcoord command-line driver. Talks to the library only through qcoord.h.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qcoord/qcoord.h"

namespace {

using json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

int exit_code(qc_status s) {
  switch (s) {
    case QC_OK: return kExitOk;
    case QC_INVALID_ARGUMENT:
    case QC_DIMENSION_MISMATCH: return kExitInvalid;
    case QC_DIVERGENCE:
    case QC_ILL_CONDITIONED:
    case QC_SATURATION: return kExitDivergence;
    case QC_IO: return kExitIo;
    default: return kExitFailure;
  }
}

struct CliError {
  int code;
  std::string message;
};

void check(qc_status s) {
  if (s != QC_OK) throw CliError{exit_code(s), std::string(qc_status_name(s)) + ": " + qc_last_error()};
}

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { qc_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct GameHandle {
  qc_game* p = nullptr;
  ~GameHandle() { qc_game_free(p); }
};

struct PolicyHandle {
  qc_policy* p = nullptr;
  ~PolicyHandle() { qc_policy_free(p); }
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  f.close();
  if (ec || !f) throw CliError{kExitIo, "cannot write " + path.string()};
}

// Flags of a run command, generated from the library's config schema:
// key foo_bar becomes --foo-bar. Only flags actually given are forwarded.
struct RunCommand {
  explicit RunCommand(std::string n) : name(std::move(n)) {}
  std::string name;
  json defaults;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::string config_path;
  bool quiet = false;
  CLI::App* app = nullptr;
};

std::string flag_name(std::string key) {
  for (auto& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

void add_run_command(CLI::App& root, RunCommand& cmd, const std::string& description) {
  OwnedString defaults;
  check(qc_config_defaults(cmd.name.c_str(), &defaults.p));
  cmd.defaults = json::parse(defaults.str());
  cmd.app = root.add_subcommand(cmd.name, description);
  cmd.app->add_option("--config", cmd.config_path, "JSON file with the same keys as the flags (flags win)");
  cmd.app->add_flag("--quiet", cmd.quiet, "No progress on stderr");
  for (auto it = cmd.defaults.begin(); it != cmd.defaults.end(); ++it) {
    const std::string& key = it.key();
    std::ostringstream def;
    def << "default: " << it.value().dump();
    if (it.value().is_boolean()) {
      cmd.app->add_flag(flag_name(key) + "{true}", cmd.flags[key], def.str())->default_str("false");
    } else {
      cmd.app->add_option(flag_name(key), cmd.values[key], def.str());
    }
  }
}

json parse_value(const std::string& key, const json& want, const std::string& text) {
  try {
    std::size_t used = 0;
    if (want.is_string()) return text;
    if (want.is_number_unsigned() || want.is_number_integer()) {
      if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
      const unsigned long long v = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing");
      return v;
    }
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw CliError{kExitInvalid, "invalid value '" + text + "' for " + flag_name(key)};
  }
}

std::string default_out_root() {
  const char* env = std::getenv("QCOORD_OUT_ROOT");
  return env && *env ? env : "runs";
}

json assemble_config(const RunCommand& cmd) {
  json cfg = json::object();
  if (!cmd.config_path.empty()) {
    std::ifstream f(cmd.config_path);
    if (!f) throw CliError{kExitIo, "cannot read config file " + cmd.config_path};
    try {
      cfg = json::parse(f);
    } catch (const json::exception& e) {
      throw CliError{kExitInvalid, "config file " + cmd.config_path + ": " + e.what()};
    }
    if (!cfg.is_object()) throw CliError{kExitInvalid, "config file must hold a JSON object"};
  }
  for (const auto& [key, text] : cmd.values)
    if (cmd.app->count(flag_name(key)) > 0) cfg[key] = parse_value(key, cmd.defaults[key], text);
  for (const auto& [key, on] : cmd.flags)
    if (cmd.app->count(flag_name(key)) > 0) cfg[key] = on;
  if (!cfg.contains("out")) cfg["out"] = (std::filesystem::path(default_out_root()) / cmd.name).string();
  return cfg;
}

void print_progress(const char* event, void* user) {
  if (*static_cast<bool*>(user)) return;
  std::cerr << event << '\n';
}

using RunFn = qc_status (*)(const char*, qc_progress_fn, void*, char**);

int run(const RunCommand& cmd, RunFn fn) {
  const json cfg = assemble_config(cmd);
  bool quiet = cmd.quiet;
  OwnedString result;
  check(fn(cfg.dump().c_str(), print_progress, &quiet, &result.p));
  const std::string out = cfg["out"].get<std::string>();
  if (!out.empty()) {
    write_file(std::filesystem::path(out) / "config.json", cfg.dump(1) + "\n");
    write_file(std::filesystem::path(out) / "result.json", result.str() + "\n");
  }
  const json r = json::parse(result.str());
  if (r.contains("text"))
    std::cout << r["text"].get<std::string>();
  else
    std::cout << result.str() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcoord: learned entangled coordination for nonlocal games and queueing"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qc_version()));

  RunCommand train_game("train-game"), train_queueing("train-queueing"), table1("reproduce-table1"),
      compare("compare-coordinators");
  std::string game_name, answers, policy_path, out_path;
  std::size_t episodes = 20, steps = 20000, seed = 0;

  CLI::App* oracle = nullptr;
  CLI::App* eval = nullptr;
  CLI::App* bell = nullptr;
  try {
    add_run_command(app, train_game, "Train entangled policies on a nonlocal game, one run per seed");
    add_run_command(app, train_queueing, "Train MAPPO routers under a wait-time limit (optionally a sweep)");
    add_run_command(app, table1, "Worst-run learned advantage for four games with and without entropy");
    add_run_command(app, compare, "Quantum against shared-randomness coordinators over a wait-limit sweep");

    oracle = app.add_subcommand("oracle", "Print the exact classical optimum of a game");
    oracle->add_option("--game", game_name, "Game name")->required();
    oracle->add_option("--answers", answers, "Rendezvous answer encoding: edge-index or destination");

    eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    eval->add_option("--policy", policy_path, "Checkpoint file")->required();
    eval->add_option("--game", game_name, "Game (default: the checkpoint's game)");
    eval->add_option("--answers", answers, "Rendezvous answer encoding");
    eval->add_option("--episodes", episodes, "Queueing evaluation episodes")->capture_default_str();
    eval->add_option("--steps", steps, "Steps per queueing episode")->capture_default_str();
    eval->add_option("--seed", seed, "Queueing evaluation seed")->capture_default_str();
    eval->add_option("--table", out_path, "Also write the exact joint policy table as CSV");

    bell = app.add_subcommand("bell-check", "Certify a game checkpoint inside or outside the classical polytope");
    bell->add_option("--policy", policy_path, "Checkpoint file")->required();
    bell->add_option("--game", game_name, "Game (default: the checkpoint's game)");
    bell->add_option("--answers", answers, "Rendezvous answer encoding");
    bell->add_option("--out", out_path, "Also write the certificate to this file");
  } catch (const CliError& e) {
    std::cerr << "qcoord: " << e.message << '\n';
    return e.code;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "qcoord: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    std::cerr << (sub ? sub->help() : app.help());
    return kExitInvalid;
  }

  try {
    const char* ans = answers.empty() ? nullptr : answers.c_str();
    if (train_game.app->parsed()) return run(train_game, qc_train_game);
    if (train_queueing.app->parsed()) return run(train_queueing, qc_train_queueing);
    if (table1.app->parsed()) return run(table1, qc_reproduce_table1);
    if (compare.app->parsed()) return run(compare, qc_compare_coordinators);
    if (oracle->parsed()) {
      GameHandle g;
      check(qc_game_create(game_name.c_str(), ans, &g.p));
      double v = 0.0;
      check(qc_game_classical_optimum(g.p, &v));
      std::printf("%.10g\n", v);
      return kExitOk;
    }
    PolicyHandle policy;
    check(qc_policy_load(policy_path.c_str(), &policy.p));
    GameHandle g;
    if (!game_name.empty()) check(qc_game_create(game_name.c_str(), ans, &g.p));
    OwnedString result;
    if (eval->parsed()) {
      const json cfg{{"episodes", episodes}, {"steps", steps}, {"seed", seed}};
      check(qc_policy_evaluate(policy.p, g.p, cfg.dump().c_str(), &result.p));
      if (!out_path.empty()) {
        OwnedString csv;
        check(qc_policy_table_csv(policy.p, &csv.p));
        write_file(out_path, csv.str());
      }
    } else {
      check(qc_policy_bell_check(policy.p, g.p, &result.p));
      if (!out_path.empty()) write_file(out_path, result.str() + "\n");
    }
    std::cout << result.str() << '\n';
    return kExitOk;
  } catch (const CliError& e) {
    std::cerr << "qcoord: " << e.message << '\n';
    return e.code;
  }
}
