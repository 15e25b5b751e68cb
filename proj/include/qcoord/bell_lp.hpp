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
 * Membership in the shared-randomness polytope (the convex hull of
 * deterministic factorized policies) by linear programming, with a
 * re-checkable certificate: mixture weights when inside, a separating Bell
 * inequality when outside.
 */

#pragma once

#include <cstdint>
#include <vector>

#include "qcoord/games.hpp"
#include "qcoord/policies.hpp"

namespace qcoord {

inline constexpr std::uint64_t kVertexBudget = 1'000'000;
inline constexpr double kFeasibilityResidual = 1e-9;
inline constexpr double kViolationFloor = 1e-7;

/// Number of deterministic factorized policies, prod_i |A_i|^{|H_i|}; saturates at UINT64_MAX.
std::uint64_t vertex_count(const FiniteHistorySpace& space);

/// Vertex index -> per-agent deterministic strategy [agent][history]. Agent 0
/// is the most significant digit; within an agent history 0 is least significant.
std::vector<std::vector<std::size_t>> vertex_strategy(const FiniteHistorySpace& space, std::uint64_t index);
JointPolicyTable vertex_table(const FiniteHistorySpace& space, std::uint64_t index);

/// All deterministic factorized policies as 0/1 tables, in vertex-index order.
std::vector<JointPolicyTable> enumerate_vertices(const FiniteHistorySpace& space,
                                                 std::uint64_t budget = kVertexBudget);

/// c . pi <= b over the polytope, on the flattened R^{H*A} representation.
struct BellInequality {
  std::vector<double> coefficients;
  double threshold = 0.0;

  double value(const JointPolicyTable& p) const;
};

/// The game's own inequality: c(h, a) = mu(h) V(a|h), b = classical optimum.
BellInequality game_bell_inequality(const NonlocalGame& game);

struct BellCertificate {
  enum class Verdict { Inside, Outside };
  Verdict verdict = Verdict::Inside;
  /// Inside, but only up to the violation floor: the LP found a separating
  /// direction whose violation is indistinguishable from rounding error.
  bool boundary = false;
  std::vector<std::pair<std::uint64_t, double>> weights;  // (vertex index, weight) when inside
  double residual = 0.0;                                  // max |sum_v w_v v - p| when inside
  BellInequality inequality;                              // when outside, max |c| = 1
  double violation = 0.0;                                 // c . p - b when outside
  std::size_t iterations = 0;
};

/// Phase-one revised simplex over vertex weights with Bland's rule. Throws
/// LpFailure if the pivot guard is exceeded and BudgetExceeded past the vertex budget.
BellCertificate membership(const JointPolicyTable& p, std::uint64_t budget = kVertexBudget);

/// Re-derives the verdict by direct arithmetic over every vertex.
bool verify_certificate(const BellCertificate& cert, const JointPolicyTable& p, std::uint64_t budget = kVertexBudget);

/// max over vertices of c . v, by enumeration.
double max_over_vertices(const FiniteHistorySpace& space, const std::vector<double>& coefficients,
                         std::uint64_t budget = kVertexBudget);

}  // namespace qcoord
