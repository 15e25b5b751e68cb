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

#include "qcoord/qcoord.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>

#include "json.hpp"
#include "qcoord/bell_lp.hpp"
#include "qcoord/checkpoint.hpp"
#include "qcoord/error.hpp"
#include "qcoord/games.hpp"
#include "qcoord/runs.hpp"

struct qc_game {
  std::string name;
  qcoord::RendezvousAnswers answers;
  qcoord::NonlocalGame game;
  double classical = std::numeric_limits<double>::quiet_NaN();
};

struct qc_policy {
  qcoord::Checkpoint checkpoint;
};

namespace {

using json = nlohmann::ordered_json;
using namespace qcoord;

thread_local std::string g_last_error;

qc_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return QC_INVALID_ARGUMENT;
    case ErrorCode::DimensionMismatch: return QC_DIMENSION_MISMATCH;
    case ErrorCode::IllConditioned: return QC_ILL_CONDITIONED;
    case ErrorCode::Saturation: return QC_SATURATION;
    case ErrorCode::Integrity: return QC_INTEGRITY;
    case ErrorCode::BudgetExceeded: return QC_BUDGET_EXCEEDED;
    case ErrorCode::LpFailure: return QC_LP_FAILURE;
    case ErrorCode::Divergence: return QC_DIVERGENCE;
    case ErrorCode::Io: return QC_IO;
  }
  return QC_INTERNAL;
}

template <class F>
qc_status guarded(F&& fn) {
  g_last_error.clear();
  try {
    fn();
    return QC_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return QC_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return QC_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QC_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  require(p != nullptr, ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// NaN and infinities have no JSON literal; they are written as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// --- run configurations ---------------------------------------------------

json train_game_defaults() {
  const GameTrainConfig g;
  return json{{"game", "chsh"},
              {"answers", "edge-index"},
              {"seeds", 10},
              {"seed_start", 0},
              {"steps", g.steps},
              {"batch", g.batch_size},
              {"lr", g.learning_rate},
              {"entropy_coef", g.entropy_coef},
              {"conditioning_coef", g.conditioning_coef},
              {"local_dim", 0},
              {"init_scale", g.init_scale},
              {"workers", 1},
              {"out", ""},
              {"plot", false}};
}

json queueing_defaults() {
  const MappoConfig m;
  return json{{"coordinator", "quantum"},
              {"wait_limit", m.queue.wait_limit},
              {"sweep", ""},
              {"initial_runs", 1},
              {"final_eval_episodes", 20},
              {"final_eval_steps", 20000},
              {"clip_eps", m.clip_eps},
              {"gamma", m.gamma},
              {"gae_lambda", m.gae_lambda},
              {"epochs", m.epochs},
              {"minibatch", m.minibatch},
              {"actor_lr", m.actor_lr},
              {"coordinator_lr", m.coordinator_lr},
              {"shared_logit_lr", m.shared_logit_lr},
              {"critic_lr", m.critic_lr},
              {"max_grad_norm", m.max_grad_norm},
              {"entropy_coef", m.entropy_coef},
              {"conditioning_coef", m.conditioning_coef},
              {"pid_kp", m.pid.kp},
              {"pid_ki", m.pid.ki},
              {"pid_kd", m.pid.kd},
              {"pid_integral_bound", m.pid.integral_bound},
              {"rollout_length", m.rollout_length},
              {"envs", m.envs},
              {"updates", m.updates},
              {"eval_interval", m.eval_interval},
              {"eval_episodes", m.eval_episodes},
              {"eval_steps", m.eval_steps},
              {"feasibility_z", m.feasibility_z},
              {"hidden", m.hidden},
              {"shared_advice", m.shared_advice},
              {"learned_actors", m.learned_actors},
              {"lambda_rate", m.queue.lambda_rate},
              {"mu_rate", m.queue.mu_rate},
              {"throughput_exponent", m.queue.throughput_exponent},
              {"horizon", m.queue.horizon},
              {"wait_normalization", "per-request"},
              {"trajectory_steps", 0},
              {"seed", m.seed},
              {"workers", 1},
              {"out", ""},
              {"plot", false}};
}

json table1_defaults() {
  const Table1Options t;
  return json{{"seeds", t.seeds.size()}, {"seed_start", 0}, {"steps", t.steps},
              {"workers", 1},            {"out", ""},       {"plot", false}};
}

json compare_defaults() {
  json d = queueing_defaults();
  d.erase("coordinator");
  d.erase("trajectory_steps");
  return d;
}

json defaults_for(const std::string& command) {
  if (command == "train-game") return train_game_defaults();
  if (command == "train-queueing") return queueing_defaults();
  if (command == "reproduce-table1") return table1_defaults();
  if (command == "compare-coordinators") return compare_defaults();
  fail(ErrorCode::InvalidArgument, "unknown run kind '" + command + "'");
}

bool same_kind(const json& want, const json& got) {
  if (want.is_boolean()) return got.is_boolean();
  if (want.is_string()) return got.is_string();
  if (want.is_number_unsigned() || want.is_number_integer()) return got.is_number_unsigned() || (got.is_number_integer() && got.get<long long>() >= 0);
  if (want.is_number()) return got.is_number();
  return false;
}

// Overlays the user's object onto the defaults; unknown keys and type
// mismatches are rejected.
json resolve(const std::string& command, const char* config_json) {
  json cfg = defaults_for(command);
  if (config_json == nullptr || *config_json == '\0') return cfg;
  json user = json::parse(config_json);
  require(user.is_object(), ErrorCode::InvalidArgument, command + " config must be a JSON object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    require(cfg.contains(it.key()), ErrorCode::InvalidArgument,
            command + ": unknown config key '" + it.key() + "'");
    require(same_kind(cfg[it.key()], it.value()), ErrorCode::InvalidArgument,
            command + ": config key '" + it.key() + "' has the wrong type");
    cfg[it.key()] = it.value();
  }
  return cfg;
}

// Creates the output directory before any work so an unwritable path fails fast.
RunOutput output_of(const json& cfg) {
  RunOutput out{cfg["out"].get<std::string>(), cfg["plot"].get<bool>()};
  if (!out.dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out.dir, ec);
    require(!ec, ErrorCode::Io, "cannot create output directory " + out.dir.string() + ": " + ec.message());
  }
  return out;
}

WaitNormalization parse_normalization(const std::string& s) {
  if (s == "per-request") return WaitNormalization::PerRequest;
  if (s == "per-step") return WaitNormalization::PerStep;
  fail(ErrorCode::InvalidArgument, "wait_normalization must be per-request or per-step, got '" + s + "'");
}

MappoConfig mappo_config(const json& c) {
  MappoConfig m;
  m.clip_eps = c["clip_eps"];
  m.gamma = c["gamma"];
  m.gae_lambda = c["gae_lambda"];
  m.epochs = c["epochs"];
  m.minibatch = c["minibatch"];
  m.actor_lr = c["actor_lr"];
  m.coordinator_lr = c["coordinator_lr"];
  m.shared_logit_lr = c["shared_logit_lr"];
  m.critic_lr = c["critic_lr"];
  m.max_grad_norm = c["max_grad_norm"];
  m.entropy_coef = c["entropy_coef"];
  m.conditioning_coef = c["conditioning_coef"];
  m.pid.kp = c["pid_kp"];
  m.pid.ki = c["pid_ki"];
  m.pid.kd = c["pid_kd"];
  m.pid.integral_bound = c["pid_integral_bound"];
  m.rollout_length = c["rollout_length"];
  m.envs = c["envs"];
  m.updates = c["updates"];
  m.eval_interval = c["eval_interval"];
  m.eval_episodes = c["eval_episodes"];
  m.eval_steps = c["eval_steps"];
  m.feasibility_z = c["feasibility_z"];
  m.hidden = c["hidden"];
  m.shared_advice = c["shared_advice"];
  m.learned_actors = c["learned_actors"];
  m.queue.lambda_rate = c["lambda_rate"];
  m.queue.mu_rate = c["mu_rate"];
  m.queue.throughput_exponent = c["throughput_exponent"];
  m.queue.horizon = c["horizon"];
  m.queue.wait_normalization = parse_normalization(c["wait_normalization"]);
  m.queue.wait_limit = c["wait_limit"];
  m.seed = c["seed"];
  m.validate();
  return m;
}

std::vector<double> limits_of(const json& c) {
  const std::string sweep = c["sweep"];
  return sweep.empty() ? std::vector<double>{c["wait_limit"].get<double>()} : parse_sweep(sweep);
}

void positive(const json& c, const char* key) {
  require(c[key].get<std::size_t>() > 0, ErrorCode::InvalidArgument, std::string(key) + " must be positive");
}

json eval_json(const QueueEvaluation& e) {
  return json{{"throughput", number(e.throughput)},
              {"throughput_stderr", number(e.throughput_stderr)},
              {"mean_wait", number(e.wait)},
              {"wait_stderr", number(e.wait_stderr)}};
}

json sweep_json(std::span<const SweepPoint> points) {
  json arr = json::array();
  for (const auto& p : points) {
    json j = eval_json(p.evaluation);
    j["wait_limit"] = p.wait_limit;
    j["feasible"] = p.evaluation.wait <= p.wait_limit;
    arr.push_back(j);
  }
  return arr;
}

struct Progress {
  qc_progress_fn fn;
  void* user;
  void emit(const json& event) const {
    if (fn) fn(event.dump().c_str(), user);
  }
};

json record_json(const QueueEvalRecord& r) {
  return json{{"update", r.update},
              {"throughput", number(r.throughput)},
              {"mean_wait", number(r.wait)},
              {"lagrange", number(r.lagrange)}};
}

const GameCheckpoint& game_checkpoint(const qc_policy* policy) {
  const auto* g = std::get_if<GameCheckpoint>(&policy->checkpoint);
  require(g != nullptr, ErrorCode::InvalidArgument, "expected an entangled-game checkpoint");
  return *g;
}

// The given game, or the one recorded in a game checkpoint when NULL.
struct GameRef {
  std::unique_ptr<qc_game> owned;
  const qc_game* game = nullptr;
};

GameRef game_for(const qc_policy* policy, const qc_game* game) {
  GameRef ref;
  if (game) {
    ref.game = game;
    return ref;
  }
  const auto& g = game_checkpoint(policy);
  ref.owned = std::make_unique<qc_game>(qc_game{g.game, g.answers, make_game(g.game, g.answers)});
  ref.owned->classical = classical_optimum(ref.owned->game).value;
  ref.game = ref.owned.get();
  return ref;
}

JointPolicyTable game_table(const qc_policy* policy, const qc_game* game) {
  const auto& g = game_checkpoint(policy);
  require(g.params.space == game->game.space, ErrorCode::DimensionMismatch,
          "checkpoint alphabets do not match game '" + game->name + "'");
  return tabulate(AnyPolicy(g.params.materialize()));
}

}  // namespace

extern "C" {

const char* qc_version(void) { return "1.0.0"; }

const char* qc_last_error(void) { return g_last_error.c_str(); }

const char* qc_status_name(qc_status status) {
  switch (status) {
    case QC_OK: return "ok";
    case QC_INVALID_ARGUMENT: return "invalid argument";
    case QC_DIMENSION_MISMATCH: return "dimension mismatch";
    case QC_ILL_CONDITIONED: return "ill-conditioned";
    case QC_SATURATION: return "saturation";
    case QC_INTEGRITY: return "integrity";
    case QC_BUDGET_EXCEEDED: return "budget exceeded";
    case QC_LP_FAILURE: return "LP failure";
    case QC_DIVERGENCE: return "divergence";
    case QC_IO: return "I/O error";
    case QC_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void qc_string_free(char* s) { std::free(s); }

qc_status qc_game_create(const char* name, const char* answers, qc_game** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = nullptr;
    const RendezvousAnswers a = answers ? parse_rendezvous_answers(answers) : RendezvousAnswers::EdgeIndex;
    auto g = std::make_unique<qc_game>(qc_game{name, a, make_game(name, a)});
    g->classical = classical_optimum(g->game).value;
    *out = g.release();
  });
}

void qc_game_free(qc_game* game) { delete game; }

qc_status qc_game_classical_optimum(const qc_game* game, double* value) {
  return guarded([&] {
    need(game, "game");
    need(value, "value");
    *value = game->classical;
  });
}

qc_status qc_game_quantum_reference(const qc_game* game, double* value) {
  return guarded([&] {
    need(game, "game");
    need(value, "value");
    *value = quantum_reference_value(game->name);
  });
}

qc_status qc_game_names(char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup_string(json(game_names()).dump());
  });
}

qc_status qc_policy_load(const char* path, qc_policy** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new qc_policy{load_checkpoint(path)};
  });
}

void qc_policy_free(qc_policy* policy) { delete policy; }

qc_status qc_policy_kind(const qc_policy* policy, const char** kind) {
  return guarded([&] {
    need(policy, "policy");
    need(kind, "kind");
    *kind = std::holds_alternative<GameCheckpoint>(policy->checkpoint) ? "entangled-game" : "router-policy";
  });
}

qc_status qc_policy_save(const qc_policy* policy, const char* path) {
  return guarded([&] {
    need(policy, "policy");
    need(path, "path");
    save_checkpoint(policy->checkpoint, path);
  });
}

qc_status qc_policy_win_probability(const qc_policy* policy, const qc_game* game, double* value) {
  return guarded([&] {
    need(policy, "policy");
    need(value, "value");
    const GameRef ref = game_for(policy, game);
    *value = exact_win_probability(ref.game->game, game_table(policy, ref.game));
  });
}

qc_status qc_policy_bell_check(const qc_policy* policy, const qc_game* game, char** out) {
  return guarded([&] {
    need(policy, "policy");
    need(out, "out");
    const GameRef ref = game_for(policy, game);
    game = ref.game;
    const JointPolicyTable table = game_table(policy, game);
    const BellCertificate cert = membership(table);
    json j;
    j["verdict"] = cert.verdict == BellCertificate::Verdict::Outside ? "outside" : "inside";
    j["verified"] = verify_certificate(cert, table);
    j["win_probability"] = exact_win_probability(game->game, table);
    if (cert.verdict == BellCertificate::Verdict::Outside) {
      j["violation"] = cert.violation;
      j["threshold"] = cert.inequality.threshold;
      j["coefficients"] = cert.inequality.coefficients;
    } else {
      j["boundary"] = cert.boundary;
      j["residual"] = cert.residual;
      json w = json::array();
      for (const auto& [vertex, weight] : cert.weights) w.push_back(json{{"vertex", vertex}, {"weight", weight}});
      j["weights"] = w;
    }
    j["iterations"] = cert.iterations;
    *out = dup_string(j.dump(1));
  });
}

qc_status qc_policy_evaluate(const qc_policy* policy, const qc_game* game, const char* config_json, char** out) {
  return guarded([&] {
    need(policy, "policy");
    need(out, "out");
    json j;
    if (const auto* r = std::get_if<RouterCheckpoint>(&policy->checkpoint)) {
      json cfg = json{{"episodes", 20}, {"steps", 20000}, {"seed", 0}};
      if (config_json && *config_json) {
        const json user = json::parse(config_json);
        require(user.is_object(), ErrorCode::InvalidArgument, "eval config must be a JSON object");
        for (auto it = user.begin(); it != user.end(); ++it) {
          require(cfg.contains(it.key()), ErrorCode::InvalidArgument, "eval: unknown config key '" + it.key() + "'");
          require(same_kind(cfg[it.key()], it.value()), ErrorCode::InvalidArgument,
                  "eval: config key '" + it.key() + "' has the wrong type");
          cfg[it.key()] = it.value();
        }
      }
      positive(cfg, "episodes");
      positive(cfg, "steps");
      Rng rng(cfg["seed"].get<std::uint64_t>());
      const RouterPolicyAdapter adapter(r->policy);
      j = eval_json(evaluate(adapter, r->config.queue, cfg["episodes"], cfg["steps"], rng));
      j["coordinator"] = to_string(r->policy.kind);
      j["wait_limit"] = r->config.queue.wait_limit;
      j["feasible"] = j["mean_wait"].is_number() && j["mean_wait"].get<double>() <= r->config.queue.wait_limit;
    } else {
      const GameRef owner = game_for(policy, game);
      game = owner.game;
      const JointPolicyTable table = game_table(policy, game);
      const double classical = game->classical;
      const double win = exact_win_probability(game->game, table);
      const double ref = quantum_reference_value(game->name);
      const auto ns = check_non_signaling(AnyPolicy(table), 1e-9);
      j["game"] = game->name;
      j["win_probability"] = win;
      j["classical_optimum"] = classical;
      j["quantum_reference"] = number(ref);
      j["advantage_pct"] = std::isfinite(ref) ? json(quantum_advantage_pct(win, classical, ref)) : json(nullptr);
      j["exceeds_classical"] = win > classical;
      j["non_signaling"] = ns.non_signaling;
      j["non_signaling_violation"] = ns.worst_violation;
    }
    *out = dup_string(j.dump(1));
  });
}

qc_status qc_policy_table_csv(const qc_policy* policy, char** out) {
  return guarded([&] {
    need(policy, "policy");
    need(out, "out");
    std::ostringstream csv;
    write_policy_csv(tabulate(AnyPolicy(game_checkpoint(policy).params.materialize())), csv);
    *out = dup_string(csv.str());
  });
}

qc_status qc_train_game(const char* config_json, qc_progress_fn progress, void* user, char** out) {
  return guarded([&] {
    need(out, "out");
    const json c = resolve("train-game", config_json);
    const std::string game = c["game"];
    GameTrainConfig cfg = default_game_config(game);
    cfg.steps = c["steps"];
    cfg.batch_size = c["batch"];
    cfg.learning_rate = c["lr"];
    cfg.entropy_coef = c["entropy_coef"];
    cfg.conditioning_coef = c["conditioning_coef"];
    if (c["local_dim"].get<std::size_t>() > 0) cfg.local_dim = c["local_dim"];
    cfg.init_scale = c["init_scale"];
    cfg.validate();
    positive(c, "seeds");
    positive(c, "workers");
    const auto answers = parse_rendezvous_answers(c["answers"]);
    const auto seeds = seed_range(c["seed_start"], c["seeds"]);
    const RunOutput o = output_of(c);
    const Progress p{progress, user};
    const GameRunReport report = run_game_seeds(game, answers, cfg, seeds, c["workers"], [&](const SeedRun& r) {
      p.emit(json{{"event", "seed"},
                  {"seed", r.seed},
                  {"best_win", r.result.best_win},
                  {"best_step", r.result.best_step},
                  {"advantage_pct", number(r.advantage_pct)}});
    });
    write_game_report(report, o);
    json j;
    j["game"] = game;
    j["local_dim"] = cfg.local_dim;
    j["classical_optimum"] = report.classical;
    j["quantum_reference"] = number(report.quantum_reference);
    j["best_win"] = report.best_win();
    j["worst_advantage_pct"] = number(report.worst_advantage_pct());
    json runs = json::array();
    for (const auto& r : report.runs)
      runs.push_back(json{{"seed", r.seed},
                          {"best_win", r.result.best_win},
                          {"best_step", r.result.best_step},
                          {"advantage_pct", number(r.advantage_pct)},
                          {"exceeds_classical", r.result.best_win > report.classical}});
    j["runs"] = runs;
    *out = dup_string(j.dump(1));
  });
}

qc_status qc_train_queueing(const char* config_json, qc_progress_fn progress, void* user, char** out) {
  return guarded([&] {
    need(out, "out");
    const json c = resolve("train-queueing", config_json);
    const MappoConfig cfg = mappo_config(c);
    const CoordinatorKind kind = parse_coordinator_kind(c["coordinator"]);
    const auto limits = limits_of(c);
    positive(c, "initial_runs");
    positive(c, "final_eval_episodes");
    positive(c, "final_eval_steps");
    const RunOutput o = output_of(c);
    const Progress p{progress, user};
    const auto points = sweep_queueing(cfg, kind, limits, c["initial_runs"], c["final_eval_episodes"],
                                       c["final_eval_steps"], [&](const QueueEvalRecord& r) {
                                         json e = record_json(r);
                                         e["event"] = "eval";
                                         p.emit(e);
                                       });
    write_sweep_outputs(points, cfg, o);
    const std::size_t traj_steps = c["trajectory_steps"];
    if (!o.dir.empty() && traj_steps > 0) {
      for (std::size_t i = 0; i < points.size(); ++i) {
        MappoConfig pc = cfg;
        pc.queue.wait_limit = points[i].wait_limit;
        Rng rng = Rng(cfg.seed).split(2000 + i);
        const RouterPolicyAdapter adapter(points[i].policy);
        std::ostringstream csv;
        write_trajectory_csv(rollout(adapter, pc.queue, traj_steps, rng), csv);
        write_text_file(o.dir / ("point_" + std::to_string(i)) / "trajectory.csv", csv.str());
      }
    }
    json j;
    j["coordinator"] = to_string(kind);
    j["points"] = sweep_json(points);
    *out = dup_string(j.dump(1));
  });
}

qc_status qc_reproduce_table1(const char* config_json, qc_progress_fn progress, void* user, char** out) {
  return guarded([&] {
    need(out, "out");
    const json c = resolve("reproduce-table1", config_json);
    positive(c, "seeds");
    positive(c, "steps");
    positive(c, "workers");
    Table1Options opts;
    opts.seeds = seed_range(c["seed_start"], c["seeds"]);
    opts.steps = c["steps"];
    opts.workers = c["workers"];
    const RunOutput o = output_of(c);
    const Progress p{progress, user};
    const auto cells = reproduce_table1(opts, o, [&](const Table1Cell& cell) {
      p.emit(json{{"event", "cell"},
                  {"game", cell.game},
                  {"alpha", cell.alpha},
                  {"worst_advantage_pct", number(cell.worst_advantage_pct)}});
    });
    json arr = json::array();
    for (const auto& cell : cells)
      arr.push_back(json{{"game", cell.game},
                         {"alpha", cell.alpha},
                         {"runs", cell.runs},
                         {"worst_advantage_pct", number(cell.worst_advantage_pct)},
                         {"mean_advantage_pct", number(cell.mean_advantage_pct)},
                         {"best_win", cell.best_win},
                         {"zero_runs", cell.zero_runs}});
    *out = dup_string(json{{"cells", arr}, {"text", format_table1(cells)}}.dump(1));
  });
}

qc_status qc_compare_coordinators(const char* config_json, qc_progress_fn progress, void* user, char** out) {
  return guarded([&] {
    need(out, "out");
    const json c = resolve("compare-coordinators", config_json);
    const MappoConfig cfg = mappo_config(c);
    ComparisonOptions opts;
    opts.limits = limits_of(c);
    positive(c, "initial_runs");
    positive(c, "final_eval_episodes");
    positive(c, "final_eval_steps");
    positive(c, "workers");
    opts.initial_runs = c["initial_runs"];
    opts.eval_episodes = c["final_eval_episodes"];
    opts.eval_steps = c["final_eval_steps"];
    opts.workers = c["workers"];
    const RunOutput o = output_of(c);
    const Progress p{progress, user};
    const auto result = compare_coordinators(cfg, opts, o, [&](CoordinatorKind kind, const QueueEvalRecord& r) {
      json e = record_json(r);
      e["event"] = "eval";
      e["coordinator"] = to_string(kind);
      p.emit(e);
    });
    *out = dup_string(json{{"quantum", sweep_json(result.quantum)}, {"classical", sweep_json(result.classical)}}.dump(1));
  });
}

qc_status qc_config_defaults(const char* command, char** out) {
  return guarded([&] {
    need(command, "command");
    need(out, "out");
    *out = dup_string(defaults_for(command).dump(1));
  });
}

}  // extern "C"
