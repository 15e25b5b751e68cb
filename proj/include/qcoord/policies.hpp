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
 * Communication-free joint policy classes over finite per-agent history and
 * action alphabets: factorized, shared-randomness, entangled (Born rule over a
 * shared state), and coordinator-advice policies. Histories are the agent's
 * current observation only.
 *
 * Flattened joint indices are mixed-radix with agent 0 most significant,
 * matching the Kronecker ordering of joint quantum systems.
 */

#pragma once

#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "qcoord/quantum.hpp"
#include "qcoord/rng.hpp"

namespace qcoord {

struct FiniteHistorySpace {
  std::vector<std::size_t> histories;  // |H_i|
  std::vector<std::size_t> actions;    // |A_i|

  std::size_t agents() const { return histories.size(); }
  std::size_t joint_histories() const;
  std::size_t joint_actions() const;
  std::vector<std::size_t> split_history(std::size_t joint) const;
  std::vector<std::size_t> split_action(std::size_t joint) const;
  std::size_t join_history(std::span<const std::size_t> h) const;
  std::size_t join_action(std::span<const std::size_t> a) const;
  void validate() const;

  friend bool operator==(const FiniteHistorySpace&, const FiniteHistorySpace&) = default;
};

/// Conditional distribution over `outcomes` for each of `contexts` contexts.
struct ConditionalTable {
  std::size_t contexts = 0;
  std::size_t outcomes = 0;
  std::vector<double> probs;  // [context * outcomes + outcome]

  static ConditionalTable from_logits(std::size_t contexts, std::size_t outcomes, std::span<const double> logits);
  static ConditionalTable deterministic(std::size_t outcomes, std::span<const std::size_t> choice);
  double operator()(std::size_t context, std::size_t outcome) const { return probs[context * outcomes + outcome]; }
  std::span<const double> row(std::size_t context) const {
    return std::span<const double>(probs).subspan(context * outcomes, outcomes);
  }
  void validate() const;
};

/// pi(a|h) for every joint history: the R^{H*A} representation.
struct JointPolicyTable {
  FiniteHistorySpace space;
  std::vector<double> probs;  // [h * joint_actions + a]

  std::span<const double> row(std::size_t h) const {
    return std::span<const double>(probs).subspan(h * space.joint_actions(), space.joint_actions());
  }
  void validate(double tol = 1e-9) const;
};
using PolicyTable = JointPolicyTable;

/// pi(a|h) = prod_i pi_i(a_i|h_i).
struct FactorizedPolicy {
  FiniteHistorySpace space;
  std::vector<ConditionalTable> locals;  // contexts = |H_i|
};

/// pi(a|h) = sum_x q(x) prod_i pi_i(a_i|x, h_i). Local context index is x * |H_i| + h_i.
struct SharedRandomnessPolicy {
  FiniteHistorySpace space;
  std::vector<double> shared;  // q over the shared variable
  std::vector<ConditionalTable> locals;
};

/// pi(a|h) = tr(rho  (x)_i M_i(a_i|h_i)).
struct EntangledPolicy {
  FiniteHistorySpace space;
  DensityMatrix rho;
  std::vector<std::vector<Povm>> measurements;  // [agent][history], outcomes = |A_i|

  void validate() const;
  std::vector<std::size_t> local_dims() const;
};

/// Coordinator over advice drawn identically by all agents: q(x|h) = q(x~) delta.
struct SharedAdviceCoordinator {
  std::vector<double> shared;
};

/// pi(a|h) = sum_x q(x|h) prod_i pi_i(a_i|x_i, h_i). The entangled coordinator
/// form is an EntangledPolicy whose "actions" are the advice alphabets.
/// Actor context index is x_i * |H_i| + h_i.
struct CoordinatorAdvicePolicy {
  FiniteHistorySpace space;
  std::vector<std::size_t> advice;  // |X_i|
  std::variant<EntangledPolicy, SharedAdviceCoordinator> coordinator;
  std::vector<ConditionalTable> actors;

  void validate() const;
  /// q(x|h) over flattened joint advice.
  std::vector<double> coordinator_distribution(std::size_t joint_history) const;
};

using AnyPolicy =
    std::variant<FactorizedPolicy, SharedRandomnessPolicy, EntangledPolicy, CoordinatorAdvicePolicy, JointPolicyTable>;

const FiniteHistorySpace& space_of(const AnyPolicy& policy);

/// Exact pi(.|h) over flattened joint actions.
std::vector<double> joint_distribution(const AnyPolicy& policy, std::size_t joint_history);
JointPolicyTable tabulate(const AnyPolicy& policy);

struct SampledAction {
  std::vector<std::size_t> actions;
  std::vector<std::size_t> advice;       // empty when the policy has no advice stage
  std::vector<double> local_log_probs;   // log pi_i(a_i | x_i, h_i)
  double coordinator_log_prob = 0.0;     // log q(x|h)
  double joint_log_prob = 0.0;           // log pi(a|h) when cheaply available, else NaN
};

SampledAction sample_action(const AnyPolicy& policy, std::size_t joint_history, Rng& rng);

/// Folds the actors into the measurements: M_i(a|h) = sum_x pi_i(a|x,h) Mtilde_i(x|h).
EntangledPolicy collapse_advice(const CoordinatorAdvicePolicy& policy);

/// Diagonal state sum_x q(x)|x..x><x..x| with diagonal POVMs diag_x pi_i(a|x,h):
/// the same distribution written as an entangled-class policy.
EntangledPolicy embed_shared_randomness(const SharedRandomnessPolicy& policy);

struct NonSignalingReport {
  bool non_signaling = false;
  double worst_violation = 0.0;
};

inline constexpr std::size_t kNonSignalingBudget = 10000;

/// Max over partitions {I, J}, histories h_I and actions a_I of the spread of
/// the a_I-marginal across h_J.
NonSignalingReport check_non_signaling(const AnyPolicy& policy, double tolerance);

/// Columns: h_0..h_{n-1}, a_0..a_{n-1}, probability.
void write_policy_csv(const JointPolicyTable& table, std::ostream& out);

/// Trainable entangled policy: density factor plus tabular POVM logits.
struct EntangledParameters {
  FiniteHistorySpace space;
  std::vector<std::size_t> local_dims;
  DensityFactor factor;
  std::vector<std::vector<PovmLogits>> logits;  // [agent][history]

  /// Entries ~ N(0, scale^2) in real and imaginary parts.
  static EntangledParameters random(const FiniteHistorySpace& space, std::span<const std::size_t> local_dims, Rng& rng,
                                    double scale);
  std::size_t parameter_count() const;
  void write_parameters(std::span<double> out) const;
  void read_parameters(std::span<const double> in);
  EntangledPolicy materialize() const;
};

}  // namespace qcoord
