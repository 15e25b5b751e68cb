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

#include <cmath>
#include <functional>
#include <sstream>

#include "doctest.h"
#include "qcoord/error.hpp"
#include "qcoord/queueing.hpp"

using namespace qcoord;

namespace {

/// Independent random routing with a size threshold per router.
class RandomPolicy final : public QueuePolicy {
 public:
  QueueDecision act(const RouterPair& x, Rng& rng) const override {
    QueueDecision d;
    for (int i = 0; i < 2; ++i) {
      const double p1 = x[i] > 1.0 ? 0.8 : 0.3;
      d.actions[i] = rng.bernoulli(p1) ? 1 : 0;
      d.log_prob += std::log(d.actions[i] ? p1 : 1 - p1);
    }
    d.advice = d.actions;
    return d;
  }
};

QueueDraws fixed_draws(double dt, bool flip = false, bool second_first = false) {
  QueueDraws d;
  d.dt = dt;
  d.flip = flip;
  d.second_first = second_first;
  d.next_obs = {1.0, 1.0};
  return d;
}

const QueueParams kParams{};

}  // namespace

TEST_CASE("reset") {
  Rng rng(1);
  const std::size_t n = 100'000;
  double sum = 0.0;
  for (std::size_t k = 0; k < n / 2; ++k) {
    const ResetResult r = reset(kParams, rng);
    CHECK(r.state == QueueState{0.0, 0.0});
    CHECK(r.obs[0] > 0.0);
    CHECK(r.obs[1] > 0.0);
    sum += r.obs[0] + r.obs[1];
  }
  // Exp(mu) has mean and standard deviation 1 / mu.
  CHECK(std::abs(sum / n - 1.0) <= 3.0 / std::sqrt(double(n)));
}

TEST_CASE("transition worked examples") {
  SUBCASE("idle server keeps its baseline task") {
    const StepOutcome o = transition(kParams, {-5.0, 1.0}, {1, 1}, {0.5, 0.5}, fixed_draws(2.0));
    CHECK(o.next[0] == -7.0);
    CHECK(o.server_rewards[0] == 24.0);
    CHECK(o.loads[0] == 0.0);
  }
  SUBCASE("an arrival interrupts the baseline task") {
    const StepOutcome o = transition(kParams, {-5.0, -1.0}, {0, 1}, {3.0, 0.5}, fixed_draws(1.0));
    CHECK(o.next[0] == 2.0);
    CHECK(o.server_rewards[0] == 0.0);
    // The other server finishes 0.5 and idles for the remaining 0.5.
    CHECK(o.next[1] == -0.5);
    CHECK(o.server_rewards[1] == 0.25);
  }
  SUBCASE("a busy server that drains starts a fresh interval") {
    const StepOutcome o = transition(kParams, {1.0, 1.0}, {0, 0}, {0.5, 0.5}, fixed_draws(3.0));
    CHECK(o.next[0] == -1.0);
    CHECK(o.server_rewards[0] == 1.0);
    CHECK(o.next[1] == -2.0);
    CHECK(o.server_rewards[1] == 4.0);
  }
  SUBCASE("wait is the time until service starts") {
    const StepOutcome o = transition(kParams, {4.0, -1.0}, {0, 1}, {2.0, 1.0}, fixed_draws(1.0));
    CHECK(o.wait == 4.0);
  }
  SUBCASE("same-server requests are served in random order") {
    const StepOutcome first = transition(kParams, {1.0, -1.0}, {0, 0}, {2.0, 3.0}, fixed_draws(1.0, false, false));
    CHECK(first.wait == 1.0 + 1.0 + 2.0);
    const StepOutcome second = transition(kParams, {1.0, -1.0}, {0, 0}, {2.0, 3.0}, fixed_draws(1.0, false, true));
    CHECK(second.wait == 1.0 + 1.0 + 3.0);
  }
  SUBCASE("flip relabels both routers' servers") {
    const StepOutcome o = transition(kParams, {-1.0, -1.0}, {0, 0}, {2.0, 3.0}, fixed_draws(1.0, true));
    CHECK(o.loads[0] == 0.0);
    CHECK(o.loads[1] == 5.0);
    CHECK(o.flip);
  }
  SUBCASE("idle targets on different servers cost nothing") {
    const StepOutcome o = transition(kParams, {-1.0, 0.0}, {1, 0}, {2.0, 3.0}, fixed_draws(0.5));
    CHECK(o.wait == 0.0);
  }
  CHECK_THROWS_AS(transition(kParams, {0.0, 0.0}, {2, 0}, {1.0, 1.0}, fixed_draws(1.0)), Error);
}

TEST_CASE("rewards telescope to T(t) per uninterrupted interval") {
  Rng rng(7);
  const std::size_t n = 100'000;
  const QueueTrajectory traj = rollout(RandomPolicy(), kParams, n, rng);
  REQUIRE(traj.steps.size() == n);

  // Oracle (error relative to max(1, T)): per server, the time at which its work runs out. An arrival at an
  // idle server closes the interval [free_at, now].
  for (int s = 0; s < 2; ++s) {
    double now = 0.0, free_at = 0.0, accumulated = 0.0, worst = 0.0;
    std::size_t intervals = 0;
    for (const auto& t : traj.steps) {
      const double load = t.outcome.loads[s];
      if (load > 0.0) {
        if (free_at <= now) {
          const double t = kParams.throughput(now - free_at);
          worst = std::max(worst, std::abs(accumulated - t) / std::max(1.0, t));
          accumulated = 0.0;
          ++intervals;
        }
        free_at = std::max(free_at, now) + load;
      }
      accumulated += t.outcome.server_rewards[s];
      now += t.outcome.dt;
    }
    const double t = kParams.throughput(std::max(0.0, now - free_at));
    worst = std::max(worst, std::abs(accumulated - t) / std::max(1.0, t));
    CHECK(intervals > 1000);
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("replaying recorded draws reproduces the trajectory exactly") {
  Rng rng(9);
  const QueueTrajectory traj = rollout(RandomPolicy(), kParams, 20'000, rng);
  QueueState state{0.0, 0.0};
  RouterPair obs = traj.steps.front().obs;
  bool identical = true;
  for (const auto& t : traj.steps) {
    identical = identical && state == t.state && obs == t.obs;
    const StepOutcome o = transition(kParams, state, t.decision.actions, obs, t.draws);
    identical = identical && o.next == t.outcome.next && o.reward == t.outcome.reward && o.wait == t.outcome.wait;
    state = o.next;
    obs = o.next_obs;
  }
  CHECK(identical);
}

TEST_CASE("the forced relabeling makes the queue pair exchangeable") {
  // Always routing both requests to server 0 is maximally asymmetric before the flip.
  const FixedQueuePolicy lopsided({0, 0});
  QueueParams p = kParams;
  p.lambda_rate = 0.3;  // keep the doubled load stable
  Rng rng(11);
  const std::size_t episodes = 1000, steps = 100;
  std::vector<double> diffs;
  for (std::size_t e = 0; e < episodes; ++e) {
    Rng er = rng.split(e);
    const QueueTrajectory traj = rollout(lopsided, p, steps, er);
    double d = 0.0;
    for (const auto& t : traj.steps) d += t.outcome.next[0] - t.outcome.next[1];
    diffs.push_back(d / steps);
  }
  double m = 0.0, ss = 0.0;
  for (double d : diffs) m += d;
  m /= episodes;
  for (double d : diffs) ss += (d - m) * (d - m);
  const double se = std::sqrt(ss / (episodes - 1) / episodes);
  CHECK(std::abs(m) <= 3.0 * se);
  CHECK(se > 0.0);
}

TEST_CASE("rollout and evaluate") {
  Rng rng(13);
  CHECK(rollout(RandomPolicy(), kParams, 0, rng).steps.empty());

  SUBCASE("determinism") {
    Rng a(21), b(21);
    const QueueEvaluation ea = evaluate(RandomPolicy(), kParams, 4, 500, a);
    const QueueEvaluation eb = evaluate(RandomPolicy(), kParams, 4, 500, b);
    CHECK(ea.throughput == eb.throughput);
    CHECK(ea.wait == eb.wait);
  }
  SUBCASE("label swap leaves estimates unchanged") {
    Rng a(31), b(32);
    const QueueEvaluation ea = evaluate(FixedQueuePolicy({0, 1}), kParams, 50, 2000, a);
    const QueueEvaluation eb = evaluate(FixedQueuePolicy({1, 0}), kParams, 50, 2000, b);
    CHECK(std::abs(ea.throughput - eb.throughput) <=
          3.0 * std::hypot(ea.throughput_stderr, eb.throughput_stderr));
    CHECK(std::abs(ea.wait - eb.wait) <= 3.0 * std::hypot(ea.wait_stderr, eb.wait_stderr));
  }
  SUBCASE("always split behaves as two M/M/1 queues") {
    // Each server sees Poisson(lambda) arrivals of Exp(mu) work; by PASTA the
    // mean wait is lambda / (mu (mu - lambda)) = 4.
    Rng a(41);
    const QueueEvaluation ev = evaluate(FixedQueuePolicy({0, 1}), kParams, 40, 20'000, a);
    const double expected = kParams.lambda_rate / (kParams.mu_rate * (kParams.mu_rate - kParams.lambda_rate));
    CHECK(std::abs(ev.wait - expected) <= 3.0 * ev.wait_stderr + 0.01 * expected);
  }
  SUBCASE("servers that never idle earn nothing") {
    QueueParams p = kParams;
    p.mu_rate = 1e-6;
    Rng a(51);
    const QueueEvaluation ev = evaluate(FixedQueuePolicy({0, 1}), p, 3, 200, a);
    CHECK(ev.throughput == 0.0);
  }
}

TEST_CASE("trajectory CSV") {
  Rng rng(61);
  const QueueTrajectory traj = rollout(RandomPolicy(), kParams, 5, rng);
  std::ostringstream out;
  write_trajectory_csv(traj, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,q1,q2,x1,x2,a1,a2,flip,dt,reward,wait");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
}

TEST_CASE("queue parameters") {
  QueueParams p;
  CHECK(p.throughput(3.0) == 9.0);
  CHECK(p.wait_budget_per_step() == 11.0);
  p.wait_normalization = WaitNormalization::PerStep;
  CHECK(p.wait_budget_per_step() == 5.5);
  p.throughput_exponent = 1.0;
  CHECK_THROWS_AS(p.validate(), Error);
}
