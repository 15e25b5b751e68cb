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
 * Nonlocal games: question distribution mu, predicate V(a|o), a black-box
 * referee, exact win probabilities and the classical (deterministic
 * factorized) optimum by exhaustive search.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qcoord/policies.hpp"
#include "qcoord/rng.hpp"

namespace qcoord {

/// Undirected simple graph.
struct GraphSpec {
  std::size_t vertices = 0;
  std::vector<std::vector<std::size_t>> adjacency;  // sorted neighbour lists

  static GraphSpec from_edges(std::size_t vertices, const std::vector<std::pair<std::size_t, std::size_t>>& edges);
  static GraphSpec complete(std::size_t vertices);
  static GraphSpec hypercube(std::size_t dimension);
  /// One `u v` pair per line, 0-indexed; blank lines and `#` comments are skipped.
  static GraphSpec load_edge_list(const std::filesystem::path& path);

  bool adjacent(std::size_t u, std::size_t v) const;
  std::size_t max_degree() const;
  bool connected() const;
  /// Throws InvalidArgument on self-loops, isolated vertices or asymmetric lists.
  void validate() const;
};

struct NonlocalGame {
  std::string name;
  FiniteHistorySpace space;            // histories = question alphabets, actions = answer alphabets
  std::vector<double> mu;              // over joint questions
  std::vector<std::uint8_t> predicate;  // [o * joint_actions + a]

  bool wins(std::size_t joint_question, std::size_t joint_answer) const {
    return predicate[joint_question * space.joint_actions() + joint_answer] != 0;
  }
  void validate() const;
};

NonlocalGame make_chsh();
NonlocalGame make_ghz();

/// How a rendezvous answer names the player's move.
enum class RendezvousAnswers {
  /// Answer k moves along the k-th incident edge (sorted neighbour order);
  /// the alphabet is the maximum degree and k >= deg(v) is an illegal move.
  EdgeIndex,
  /// Answer is the destination vertex; non-neighbours are illegal moves.
  Destination,
};

/// Two players, one move each, independent uniform start vertices. Both win
/// iff both moves are legal and end on the same vertex.
NonlocalGame make_rendezvous(const GraphSpec& graph, RendezvousAnswers answers = RendezvousAnswers::EdgeIndex,
                             std::string name = "rendezvous");

/// `chsh`, `ghz`, `rendezvous-tetra` (K4), `rendezvous-cube` (Q3), or
/// `rendezvous:<edge-list path>`.
NonlocalGame make_game(const std::string& name, RendezvousAnswers answers = RendezvousAnswers::EdgeIndex);
std::vector<std::string> game_names();

/// Best known entangled win probability (upper bound) used to normalize the
/// quantum advantage; NaN when unknown.
double quantum_reference_value(const std::string& game_name);

struct RoundResult {
  std::size_t question = 0;  // flattened joint question
  std::vector<std::size_t> answers;
  bool verdict = false;
};

/// Black-box access to a game: questions can be drawn and answers judged, but
/// mu and V are not exposed.
class Referee {
 public:
  explicit Referee(NonlocalGame game) : game_(std::move(game)) { game_.validate(); }

  const FiniteHistorySpace& space() const { return game_.space; }
  const std::string& name() const { return game_.name; }
  std::size_t sample_question(Rng& rng) const { return rng.categorical(game_.mu); }
  bool judge(std::size_t joint_question, std::span<const std::size_t> answers) const {
    return game_.wins(joint_question, game_.space.join_action(answers));
  }
  RoundResult play_round(const AnyPolicy& policy, Rng& rng) const;

 private:
  NonlocalGame game_;
};

/// Sum_o mu(o) Sum_a pi(a|o) V(a|o).
double exact_win_probability(const NonlocalGame& game, const AnyPolicy& policy);
double exact_win_probability(const NonlocalGame& game, const JointPolicyTable& table);

struct ClassicalOptimum {
  double value = 0.0;
  std::vector<std::vector<std::size_t>> strategy;  // [agent][question] -> answer
  std::uint64_t profiles_searched = 0;
};

inline constexpr std::uint64_t kClassicalProfileBudget = 50'000'000;

/// Exact maximum over deterministic factorized strategies: enumerate the
/// first n-1 players (answers that can never win are skipped) and let the
/// last player best-respond.
ClassicalOptimum classical_optimum(const NonlocalGame& game, std::uint64_t budget = kClassicalProfileBudget);

FactorizedPolicy deterministic_policy(const FiniteHistorySpace& space,
                                      const std::vector<std::vector<std::size_t>>& strategy);

/// Bell pair with projective measurements at angles 0, pi/4 (first player) and
/// +-pi/8 (second player); wins CHSH with probability cos^2(pi/8).
EntangledPolicy chsh_quantum_policy();

}  // namespace qcoord
