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

#include "qcoord/queueing.hpp"

#include <cmath>
#include <ostream>
#include <tuple>

#include "qcoord/error.hpp"

namespace qcoord {

double QueueParams::throughput(double t) const { return std::pow(t, throughput_exponent); }

double QueueParams::wait_budget_per_step() const {
  return wait_normalization == WaitNormalization::PerRequest ? 2.0 * wait_limit : wait_limit;
}

void QueueParams::validate() const {
  require(lambda_rate > 0.0 && mu_rate > 0.0, ErrorCode::InvalidArgument, "queue rates must be positive");
  require(throughput_exponent > 1.0, ErrorCode::InvalidArgument, "throughput exponent must exceed 1");
  require(wait_limit > 0.0, ErrorCode::InvalidArgument, "wait limit must be positive");
  require(horizon >= 1, ErrorCode::InvalidArgument, "horizon must be at least 1");
}

ResetResult reset(const QueueParams& params, Rng& rng) {
  return {{0.0, 0.0}, {rng.exponential(params.mu_rate), rng.exponential(params.mu_rate)}};
}

QueueDraws draw_step(const QueueParams& params, Rng& rng) {
  QueueDraws d;
  d.flip = rng.bernoulli(0.5);
  d.dt = rng.exponential(params.lambda_rate);
  d.second_first = rng.bernoulli(0.5);
  d.next_obs = {rng.exponential(params.mu_rate), rng.exponential(params.mu_rate)};
  return d;
}

StepOutcome transition(const QueueParams& params, const QueueState& q, const ActionPair& actions,
                       const RouterPair& x, const QueueDraws& draws) {
  require((actions[0] == 0 || actions[0] == 1) && (actions[1] == 0 || actions[1] == 1), ErrorCode::InvalidArgument,
          "queue actions must be 0 or 1");
  const int a1 = draws.flip ? 1 - actions[0] : actions[0];
  const int a2 = draws.flip ? 1 - actions[1] : actions[1];

  StepOutcome out;
  out.dt = draws.dt;
  out.flip = draws.flip;
  out.next_obs = draws.next_obs;
  out.loads = {(1 - a1) * x[0] + (1 - a2) * x[1], a1 * x[0] + a2 * x[1]};

  for (int s = 0; s < 2; ++s) {
    const double dq = out.loads[s];
    const bool idle = q[s] <= 0.0;
    const double next = dq - draws.dt + ((idle && dq > 0.0) ? 0.0 : q[s]);
    out.next[s] = next;
    out.server_rewards[s] = (idle && dq == 0.0) ? params.throughput(-next) - params.throughput(-q[s])
                                                : params.throughput(std::max(0.0, -next));
  }
  out.reward = out.server_rewards[0] + out.server_rewards[1];

  out.wait = std::max(0.0, q[a1]) + std::max(0.0, q[a2]);
  if (a1 == a2) out.wait += draws.second_first ? x[1] : x[0];
  return out;
}

StepOutcome step(const QueueParams& params, const QueueState& state, const ActionPair& actions,
                 const RouterPair& obs, Rng& rng) {
  return transition(params, state, actions, obs, draw_step(params, rng));
}

double QueueTrajectory::total_reward() const {
  double s = 0.0;
  for (const auto& t : steps) s += t.outcome.reward;
  return s;
}

double QueueTrajectory::total_wait() const {
  double s = 0.0;
  for (const auto& t : steps) s += t.outcome.wait;
  return s;
}

double QueueTrajectory::total_time() const {
  double s = 0.0;
  for (const auto& t : steps) s += t.outcome.dt;
  return s;
}

QueueTrajectory rollout(const QueuePolicy& policy, const QueueParams& params, std::size_t steps, Rng& rng) {
  params.validate();
  QueueTrajectory traj;
  traj.steps.reserve(steps);
  ResetResult r = reset(params, rng);
  QueueState state = r.state;
  RouterPair obs = r.obs;
  for (std::size_t t = 0; t < steps; ++t) {
    QueueTransition tr;
    tr.state = state;
    tr.obs = obs;
    tr.decision = policy.act(obs, rng);
    tr.draws = draw_step(params, rng);
    tr.outcome = transition(params, state, tr.decision.actions, obs, tr.draws);
    state = tr.outcome.next;
    obs = tr.outcome.next_obs;
    traj.steps.push_back(tr);
  }
  return traj;
}

void write_trajectory_csv(const QueueTrajectory& traj, std::ostream& out) {
  out << "t,q1,q2,x1,x2,a1,a2,flip,dt,reward,wait\n";
  const auto old = out.precision(17);
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const auto& s = traj.steps[t];
    out << t << "," << s.state[0] << "," << s.state[1] << "," << s.obs[0] << "," << s.obs[1] << ","
        << s.decision.actions[0] << "," << s.decision.actions[1] << "," << (s.draws.flip ? 1 : 0) << ","
        << s.outcome.dt << "," << s.outcome.reward << "," << s.outcome.wait << "\n";
  }
  out.precision(old);
}

namespace {

std::pair<double, double> mean_stderr(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (double x : v) m += x;
  m /= double(v.size());
  if (v.size() < 2) return {m, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / double(v.size() - 1) / double(v.size()))};
}

}  // namespace

QueueEvaluation evaluate(const QueuePolicy& policy, const QueueParams& params, std::size_t episodes,
                         std::size_t steps, Rng& rng) {
  require(episodes >= 1 && steps >= 1, ErrorCode::InvalidArgument, "evaluate needs at least one episode and step");
  QueueEvaluation ev;
  for (std::size_t e = 0; e < episodes; ++e) {
    Rng episode_rng = rng.split(e);
    const QueueTrajectory traj = rollout(policy, params, steps, episode_rng);
    ev.episode_throughput.push_back(traj.total_reward() / traj.total_time());
    ev.episode_wait.push_back(traj.total_wait() / (2.0 * double(steps)));
  }
  std::tie(ev.throughput, ev.throughput_stderr) = mean_stderr(ev.episode_throughput);
  std::tie(ev.wait, ev.wait_stderr) = mean_stderr(ev.episode_wait);
  return ev;
}

}  // namespace qcoord
