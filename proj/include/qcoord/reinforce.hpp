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
 * Entropy-regularized REINFORCE for nonlocal games with an entangled policy
 * (density factor plus per-question POVM logits). The trainer only talks to
 * the game through a Referee; exact win probabilities for logging and
 * best-step selection come from a separate evaluator callback.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "qcoord/games.hpp"
#include "qcoord/policies.hpp"
#include "qcoord/rng.hpp"

namespace qcoord {

struct GameTrainConfig {
  std::size_t batch_size = 512;
  double learning_rate = 3e-2;
  double entropy_coef = 0.2;
  std::size_t steps = 5000;
  std::uint64_t seed = 0;
  double conditioning_coef = 1e-3;
  std::size_t local_dim = 2;  // per agent
  double init_scale = 0.1;

  void validate() const;
};

class Adam {
 public:
  Adam(std::size_t size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  /// params -= lr * mhat / (sqrt(vhat) + eps), for a loss to be minimized.
  void step(std::span<double> params, std::span<const double> grad);
  std::size_t steps() const { return t_; }
  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

struct GameBatch {
  std::vector<std::size_t> questions;  // flattened joint questions
  std::vector<std::size_t> answers;    // flattened joint answers
  std::vector<std::uint8_t> verdicts;

  std::size_t size() const { return questions.size(); }
};

/// Loss to minimize, -J_hat - alpha * H_hat + coef * sum penalties, and its
/// gradient in the EntangledParameters flat layout.
struct SurrogateResult {
  double loss = 0.0;
  double surrogate = 0.0;          // (1/N) sum_j w_j log pi(a_j|o_j) at the current parameters
  double entropy_estimate = 0.0;   // (1/N) sum_j -log pi(a_j|o_j)
  double conditioning_penalty = 0.0;
  std::vector<double> gradient;
};

inline constexpr double kLogFloor = 1e-12;

/// The score-function surrogate with weights w_j = V_j - alpha (log pi + 1)
/// held constant under differentiation.
SurrogateResult surrogate_loss(const EntangledParameters& params, const GameBatch& batch, double entropy_coef,
                               double conditioning_coef);

/// Gradient of the same loss with the Monte-Carlo weights replaced by their
/// expectation under the given question distribution and predicate. Used as
/// an exact reference by tests and diagnostics, never by the trainer.
std::vector<double> expected_surrogate_gradient(const EntangledParameters& params, const NonlocalGame& game,
                                                double entropy_coef, double conditioning_coef);

/// J and the mu-averaged conditional entropy H, by enumeration.
double exact_policy_entropy(const NonlocalGame& game, const AnyPolicy& policy);

struct TrainRecord {
  std::size_t step = 0;
  double win_prob = 0.0;
  double empirical_win = 0.0;
  double entropy = 0.0;
  double loss = 0.0;
  double cond_penalty = 0.0;
};

void write_train_csv(std::span<const TrainRecord> records, std::ostream& out);

struct GameTrainResult {
  EntangledParameters best;
  double best_win = 0.0;
  std::size_t best_step = 0;
  std::vector<TrainRecord> records;
};

/// Exact win probability of a tabulated policy.
using PolicyEvaluator = std::function<double(const JointPolicyTable&)>;

/// Runs cfg.steps of sample -> surrogate -> Adam, returning the parameters
/// with the highest evaluated win probability over all steps.
GameTrainResult train(const Referee& referee, EntangledParameters init, const GameTrainConfig& cfg,
                      const PolicyEvaluator& evaluate);

/// Builds the referee, evaluator and N(0, init_scale^2) initialization.
GameTrainResult train_game(const NonlocalGame& game, const GameTrainConfig& cfg);

EntangledParameters initial_parameters(const FiniteHistorySpace& space, const GameTrainConfig& cfg);

/// max(0, win - classical) / (bound - classical).
double quantum_advantage_pct(double win, double classical_opt, double quantum_bound);

}  // namespace qcoord
