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

/**
 * @file
 * Modified MAPPO for the two-router queue: a coordinator samples advice
 * x ~ q(x|h), actors map advice to server choices, and a PID-controlled
 * Lagrange multiplier enforces the mean-wait limit.
 *
 * Two coordinator kinds are supported. The quantum coordinator measures a
 * fixed shared state with POVMs produced per observation by a small network
 * and QuantumSoftmax. The shared-randomness coordinator draws one advice
 * symbol that every router sees, independent of observations.
 */

#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcoord/quantum.hpp"
#include "qcoord/queueing.hpp"
#include "qcoord/rng.hpp"

namespace qcoord {

/// Fully connected network, tanh hidden layers, linear output.
/// Flat parameter layout per layer: W (out x in, row-major) then b (out).
class Mlp {
 public:
  Mlp() = default;
  /// Zero weights.
  explicit Mlp(std::vector<std::size_t> sizes);
  /// W ~ N(0, 1/fan_in); the last layer is additionally scaled by `output_scale`.
  static Mlp random(std::vector<std::size_t> sizes, Rng& rng, double output_scale = 1.0);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }

  /// Activations of every layer, input first.
  struct Tape {
    std::vector<std::vector<double>> activations;
    std::span<const double> output() const { return activations.back(); }
  };

  std::vector<double> forward(std::span<const double> input) const;
  void forward(std::span<const double> input, Tape& tape) const;
  /// Accumulates dL/dparams into `grad` (size parameter_count()); returns dL/dinput.
  std::vector<double> backward(const Tape& tape, std::span<const double> output_cotangent,
                               std::span<double> grad) const;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<double> params_;
};

enum class CoordinatorKind { Quantum, SharedRandomness };

const char* to_string(CoordinatorKind kind);
CoordinatorKind parse_coordinator_kind(const std::string& name);

/// Router features fed to the coordinator networks and actors: (x, log(1 + x)).
std::array<double, 2> router_features(double x);

/// Joint policy of the two routers: coordinator q(x|h) and actors pi_i(a|x_i, h_i).
struct RouterPolicy {
  CoordinatorKind kind = CoordinatorKind::Quantum;
  DensityMatrix rho;                   // quantum: fixed shared state
  std::array<Mlp, 2> coordinator_nets;  // quantum: features -> two 2x2 complex logits
  std::vector<double> shared_logits;    // shared randomness: q(x~) = softmax
  /// Quantum only; the shared-randomness kind always learns its actors.
  bool learned_actors = false;
  std::array<Mlp, 2> actors;  // [one-hot advice, features] -> 2 logits

  struct Options {
    std::size_t hidden = 32;
    std::size_t shared_advice = 4;
    bool learned_actors = false;
    double policy_output_scale = 0.01;
  };
  static RouterPolicy make(CoordinatorKind kind, const Options& options, Rng& rng);

  std::size_t advice_size() const;
  bool actors_trivial() const { return kind == CoordinatorKind::Quantum && !learned_actors; }
  std::size_t coordinator_parameter_count() const;
  std::size_t parameter_count() const;
  void write_parameters(std::span<double> out) const;
  void read_parameters(std::span<const double> in);
  void validate() const;

  /// q(x|h) over joint advice j1 * advice_size() + j2.
  std::vector<double> coordinator_distribution(const RouterPair& obs) const;
  /// pi_i(.|advice, x).
  std::array<double, 2> actor_distribution(std::size_t agent, std::size_t advice, double x) const;
  /// pi(a|x) over joint actions a1 * 2 + a2.
  std::array<double, 4> joint_distribution(const RouterPair& obs) const;
};

/// Samples advice then actions; QueueDecision::log_prob is log pi(a|x).
class RouterPolicyAdapter final : public QueuePolicy {
 public:
  explicit RouterPolicyAdapter(const RouterPolicy& policy) : policy_(policy) {}
  QueueDecision act(const RouterPair& obs, Rng& rng) const override;

 private:
  const RouterPolicy& policy_;
};

/// Coordinator forward pass with everything the reverse pass needs.
struct CoordinatorForward {
  std::vector<double> probs;  // joint advice
  // quantum
  std::array<Mlp::Tape, 2> tapes;
  std::array<SoftmaxForward, 2> softmax;
  double conditioning = 0.0;  // sum_i ||S_i - I||^2
};

CoordinatorForward coordinator_forward(const RouterPolicy& policy, const RouterPair& obs);
/// Accumulates into the coordinator block of `grad` (policy flat layout) the
/// gradient of sum_k cot[k] q_k + conditioning_coef * conditioning.
void coordinator_backward(const RouterPolicy& policy, const CoordinatorForward& fwd,
                          std::span<const double> prob_cotangents, double conditioning_coef, std::span<double> grad);

struct CoordinatorProbability {
  double probability = 0.0;
  std::vector<double> gradient;  // policy flat layout; actor block is zero
};

CoordinatorProbability coordinator_prob(const RouterPolicy& policy, const RouterPair& obs,
                                        const std::array<std::size_t, 2>& advice);

/// Centralized critic on (q1, q2, x1, x2), each passed through sign(v) log(1 + |v|).
struct Critic {
  Mlp net;

  static Critic make(std::size_t hidden, Rng& rng);
  static std::array<double, 4> features(const QueueState& state, const RouterPair& obs);
  double value(const QueueState& state, const RouterPair& obs) const;
};

/// Running mean and variance of value targets (Welford), so critics regress
/// unit-scale quantities.
struct RunningScale {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void update(std::span<const double> values);
  double stddev() const;
  double normalize(double v) const { return (v - mean) / stddev(); }
  double denormalize(double v) const { return mean + stddev() * v; }
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;  // advantages + values
};

/// delta_t = r_t + gamma V(s_{t+1}) - V(s_t); A_t = delta_t + gamma lambda A_{t+1},
/// with the recursion cut after steps flagged `segment_end`. Segments are
/// truncated, never terminal, so next_values always bootstraps.
GaeResult gae_advantages(std::span<const double> rewards, std::span<const double> values,
                         std::span<const double> next_values, std::span<const std::uint8_t> segment_end, double gamma,
                         double lambda);

/// In place: mean 0, standard deviation 1 (population); constant inputs become 0.
void normalize_advantages(std::vector<double>& values);

struct PidGains {
  double kp = 1.0;
  double ki = 0.2;
  double kd = 0.1;
  double integral_bound = 1e5;
};

struct LagrangeState {
  double multiplier = 0.0;
  double integral = 0.0;
  double previous_error = 0.0;
  bool started = false;
};

/// error = measured - limit; integral accumulates error, clamped to [0, bound];
/// the derivative term only reacts to a growing error.
LagrangeState pid_update(const LagrangeState& state, double measured, double limit, const PidGains& gains);

struct MappoConfig {
  double clip_eps = 0.2;
  double gamma = 0.95;
  double gae_lambda = 0.95;
  std::size_t epochs = 4;
  std::size_t minibatch = 256;
  double actor_lr = 1e-3;
  double coordinator_lr = 1e-3;
  double shared_logit_lr = 1e-3;
  double critic_lr = 3e-4;
  double max_grad_norm = 0.5;
  double entropy_coef = 0.0;
  double conditioning_coef = 1e-3;
  PidGains pid;
  std::size_t rollout_length = 256;
  std::size_t envs = 8;
  std::size_t updates = 200;
  std::size_t eval_interval = 10;
  std::size_t eval_episodes = 16;
  std::size_t eval_steps = 4096;
  /// An evaluation counts as feasible when wait + z * stderr <= limit.
  double feasibility_z = 1.0;
  std::size_t hidden = 32;
  std::size_t shared_advice = 4;
  bool learned_actors = false;
  QueueParams queue;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One decision as recorded during a rollout.
struct MappoSample {
  QueueState state{};
  RouterPair obs{};
  std::array<std::size_t, 2> advice{};
  ActionPair actions{};
  double old_log_q = 0.0;
  std::array<double, 2> old_log_pi{};
  double reward = 0.0;
  double cost = 0.0;
  // filled after the rollout
  double advantage = 0.0;
  double cost_advantage = 0.0;
  double return_target = 0.0;  // normalized
  double cost_target = 0.0;    // normalized
};

struct SurrogateWeights {
  double clip_eps = 0.2;
  double lagrange = 0.0;
  double entropy = 0.0;
  double conditioning = 0.0;
};

struct MappoLoss {
  double total = 0.0;
  double policy = 0.0;  // clipped reward and cost surrogates, already combined
  double entropy = 0.0;
  double conditioning = 0.0;
  double value = 0.0;
  double cost_value = 0.0;
  double clip_fraction = 0.0;
};

struct MappoGradients {
  std::vector<double> policy;
  std::vector<double> value;
  std::vector<double> cost;
};

/// Mean over the batch of
///   [-clip(L_act) - clip(L_coord) + lagrange * (cost terms)] / (1 + lagrange)
///   - entropy * H + conditioning * sum ||S - I||^2 + value losses,
/// where each ratio is clipped on its own and the cost terms use the
/// pessimistic (max) clip. Fills `grads` when given.
MappoLoss mappo_surrogate(const RouterPolicy& policy, const Critic& value, const Critic& cost,
                          std::span<const MappoSample> batch, const SurrogateWeights& weights,
                          MappoGradients* grads);

struct QueueEvalRecord {
  std::size_t update = 0;
  double throughput = 0.0;
  double throughput_stderr = 0.0;
  double wait = 0.0;
  double wait_stderr = 0.0;
  double lagrange = 0.0;
};

struct QueueTrainResult {
  RouterPolicy best;
  RouterPolicy last;
  Critic value;
  Critic cost;
  RunningScale value_scale;
  RunningScale cost_scale;
  LagrangeState lagrange;
  std::vector<QueueEvalRecord> curve;
  std::optional<std::size_t> best_record;  // index into curve
  bool best_feasible = false;
};

/// Optional warm start for train_queueing.
struct QueueWarmStart {
  const QueueTrainResult* previous = nullptr;
};

using QueueProgress = std::function<void(const QueueEvalRecord&)>;

/// Alternating rollout / update loop. The best policy maximizes throughput
/// among evaluations meeting the wait limit, or minimizes wait if none do.
QueueTrainResult train_queueing(const MappoConfig& cfg, CoordinatorKind kind, QueueWarmStart warm = {},
                                const QueueProgress& progress = {});

struct SweepPoint {
  double wait_limit = 0.0;
  QueueEvaluation evaluation;
  RouterPolicy policy;
  std::vector<QueueEvalRecord> curve;  // training evaluations of the run behind this point
};

/// `initial_runs` seeds at the first limit, keep the best, then warm-start one
/// run per later limit. Every point is re-evaluated with a fresh stream.
std::vector<SweepPoint> sweep_queueing(const MappoConfig& cfg, CoordinatorKind kind, std::span<const double> limits,
                                       std::size_t initial_runs, std::size_t eval_episodes, std::size_t eval_steps,
                                       const QueueProgress& progress = {});

/// Columns: wait_limit,throughput,mean_wait,stderr_throughput,stderr_wait.
void write_sweep_csv(std::span<const SweepPoint> points, std::ostream& out);

}  // namespace qcoord
