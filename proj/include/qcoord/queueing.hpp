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
 * Two routers, two servers. Request pairs arrive together; each router sees
 * only its own request size and picks a server. Idle servers run a baseline
 * task whose value T(t) = t^p grows superlinearly with uninterrupted time.
 *
 * A queue state q > 0 is remaining work; q <= 0 is idle for |q| time.
 */

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qcoord/rng.hpp"

namespace qcoord {

/// How the wait limit W_l is compared with accumulated wait.
enum class WaitNormalization {
  PerRequest,  // sum w / (2 * steps) <= W_l
  PerStep,     // sum w / steps <= W_l, with w the total wait of both requests
};

struct QueueParams {
  double lambda_rate = 0.8;  // request-pair arrival rate
  double mu_rate = 1.0;      // request size rate
  double throughput_exponent = 2.0;
  double wait_limit = 5.5;
  std::size_t horizon = 2048;
  WaitNormalization wait_normalization = WaitNormalization::PerRequest;

  double throughput(double t) const;
  /// Mean wait per step that exactly meets the limit under the chosen normalization.
  double wait_budget_per_step() const;
  void validate() const;
};

using QueueState = std::array<double, 2>;
using RouterPair = std::array<double, 2>;
using ActionPair = std::array<int, 2>;

/// Exogenous randomness of one step.
struct QueueDraws {
  double dt = 0.0;
  bool flip = false;
  bool second_first = false;  // same-server ties: request 2 is served first
  RouterPair next_obs{};
};

struct StepOutcome {
  QueueState next{};
  double reward = 0.0;
  std::array<double, 2> server_rewards{};
  double wait = 0.0;
  RouterPair next_obs{};
  double dt = 0.0;
  bool flip = false;
  std::array<double, 2> loads{};
};

struct ResetResult {
  QueueState state{};
  RouterPair obs{};
};

ResetResult reset(const QueueParams& params, Rng& rng);

QueueDraws draw_step(const QueueParams& params, Rng& rng);

/// Deterministic core: applies the (optional) relabeling flip to the
/// routers' actions, then the queue update, reward and wait rules.
StepOutcome transition(const QueueParams& params, const QueueState& state, const ActionPair& actions,
                       const RouterPair& obs, const QueueDraws& draws);

StepOutcome step(const QueueParams& params, const QueueState& state, const ActionPair& actions,
                 const RouterPair& obs, Rng& rng);

/// A router pair's joint decision; actions are pre-flip.
struct QueueDecision {
  ActionPair actions{};
  ActionPair advice{};
  double log_prob = 0.0;  // log pi(a | x)
};

class QueuePolicy {
 public:
  virtual ~QueuePolicy() = default;
  virtual QueueDecision act(const RouterPair& obs, Rng& rng) const = 0;
};

/// Constant actions; the symmetry flip still randomizes the labels.
class FixedQueuePolicy final : public QueuePolicy {
 public:
  explicit FixedQueuePolicy(ActionPair actions) : actions_(actions) {}
  QueueDecision act(const RouterPair&, Rng&) const override { return {actions_, actions_, 0.0}; }

 private:
  ActionPair actions_;
};

struct QueueTransition {
  QueueState state{};
  RouterPair obs{};
  QueueDecision decision;
  QueueDraws draws;
  StepOutcome outcome;
};

struct QueueTrajectory {
  std::vector<QueueTransition> steps;
  double total_reward() const;
  double total_wait() const;
  double total_time() const;
};

/// Starts from reset() and runs `steps` steps without truncation.
QueueTrajectory rollout(const QueuePolicy& policy, const QueueParams& params, std::size_t steps, Rng& rng);

/// Columns: t,q1,q2,x1,x2,a1,a2,flip,dt,reward,wait (pre-flip actions).
void write_trajectory_csv(const QueueTrajectory& traj, std::ostream& out);

struct QueueEvaluation {
  double throughput = 0.0;  // sum rewards / sum dt, averaged over episodes
  double throughput_stderr = 0.0;
  double wait = 0.0;  // mean wait per request
  double wait_stderr = 0.0;
  std::vector<double> episode_throughput;
  std::vector<double> episode_wait;
};

QueueEvaluation evaluate(const QueuePolicy& policy, const QueueParams& params, std::size_t episodes,
                         std::size_t steps, Rng& rng);

}  // namespace qcoord
