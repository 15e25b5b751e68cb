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

#include "qcoord/games.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "qcoord/error.hpp"

namespace qcoord {

GraphSpec GraphSpec::from_edges(std::size_t vertices, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  GraphSpec g;
  g.vertices = vertices;
  g.adjacency.assign(vertices, {});
  for (const auto& [u, v] : edges) {
    require(u < vertices && v < vertices, ErrorCode::InvalidArgument, "edge endpoint out of range");
    require(u != v, ErrorCode::InvalidArgument, "self-loops are not allowed");
    g.adjacency[u].push_back(v);
    g.adjacency[v].push_back(u);
  }
  for (auto& nbrs : g.adjacency) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  g.validate();
  return g;
}

GraphSpec GraphSpec::complete(std::size_t vertices) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t u = 0; u < vertices; ++u)
    for (std::size_t v = u + 1; v < vertices; ++v) edges.emplace_back(u, v);
  return from_edges(vertices, edges);
}

GraphSpec GraphSpec::hypercube(std::size_t dimension) {
  const std::size_t n = std::size_t{1} << dimension;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t b = 0; b < dimension; ++b)
      if (const std::size_t v = u ^ (std::size_t{1} << b); u < v) edges.emplace_back(u, v);
  return from_edges(n, edges);
}

GraphSpec GraphSpec::load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open edge list " + path.string());
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t vertices = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    long long u = 0, v = 0;
    if (!(ss >> u)) continue;
    std::string rest;
    if (!(ss >> v) || (ss >> rest) || u < 0 || v < 0) {
      fail(ErrorCode::InvalidArgument,
           "edge list " + path.string() + ":" + std::to_string(lineno) + ": expected two non-negative integers");
    }
    edges.emplace_back(std::size_t(u), std::size_t(v));
    vertices = std::max({vertices, std::size_t(u) + 1, std::size_t(v) + 1});
  }
  require(!edges.empty(), ErrorCode::InvalidArgument, "edge list " + path.string() + " has no edges");
  return from_edges(vertices, edges);
}

bool GraphSpec::adjacent(std::size_t u, std::size_t v) const {
  return std::binary_search(adjacency[u].begin(), adjacency[u].end(), v);
}

std::size_t GraphSpec::max_degree() const {
  std::size_t d = 0;
  for (const auto& nbrs : adjacency) d = std::max(d, nbrs.size());
  return d;
}

bool GraphSpec::connected() const {
  if (vertices == 0) return false;
  std::vector<bool> seen(vertices, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (auto v : adjacency[u])
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        frontier.push(v);
      }
  }
  return count == vertices;
}

void GraphSpec::validate() const {
  require(vertices > 0 && adjacency.size() == vertices, ErrorCode::InvalidArgument, "graph has no vertices");
  for (std::size_t u = 0; u < vertices; ++u) {
    require(!adjacency[u].empty(), ErrorCode::InvalidArgument, "vertex " + std::to_string(u) + " is isolated");
    for (auto v : adjacency[u]) {
      require(v < vertices && v != u, ErrorCode::InvalidArgument, "invalid neighbour in adjacency list");
      require(adjacent(v, u), ErrorCode::InvalidArgument, "adjacency lists are not symmetric");
    }
  }
}

void NonlocalGame::validate() const {
  space.validate();
  require(mu.size() == space.joint_histories(), ErrorCode::DimensionMismatch, "mu must cover every joint question");
  require(predicate.size() == space.joint_histories() * space.joint_actions(), ErrorCode::DimensionMismatch,
          "predicate must be total on questions x answers");
  double s = 0.0;
  for (double p : mu) {
    require(p >= 0.0, ErrorCode::InvalidArgument, "mu has a negative entry");
    s += p;
  }
  require(std::abs(s - 1.0) <= 1e-12, ErrorCode::InvalidArgument, "mu does not sum to 1");
}

namespace {

template <class Pred>
NonlocalGame tabulate_game(std::string name, FiniteHistorySpace space, std::vector<double> mu, Pred pred) {
  NonlocalGame g{std::move(name), std::move(space), std::move(mu), {}};
  const std::size_t nq = g.space.joint_histories(), na = g.space.joint_actions();
  g.predicate.resize(nq * na);
  for (std::size_t o = 0; o < nq; ++o) {
    const auto od = g.space.split_history(o);
    for (std::size_t a = 0; a < na; ++a) g.predicate[o * na + a] = pred(od, g.space.split_action(a)) ? 1 : 0;
  }
  g.validate();
  return g;
}

}  // namespace

NonlocalGame make_chsh() {
  return tabulate_game("chsh", {{2, 2}, {2, 2}}, std::vector<double>(4, 0.25),
                       [](const auto& o, const auto& a) { return (a[0] ^ a[1]) == (o[0] & o[1]); });
}

NonlocalGame make_ghz() {
  std::vector<double> mu(8, 0.0);
  for (std::size_t o : {0b000, 0b110, 0b101, 0b011}) mu[o] = 0.25;
  return tabulate_game("ghz", {{2, 2, 2}, {2, 2, 2}}, std::move(mu), [](const auto& o, const auto& a) {
    return (o[0] | o[1] | o[2]) == (a[0] + a[1] + a[2]) % 2;
  });
}

NonlocalGame make_rendezvous(const GraphSpec& graph, RendezvousAnswers answers, std::string name) {
  graph.validate();
  require(graph.connected(), ErrorCode::InvalidArgument, "rendezvous graph must be connected");
  const std::size_t n = graph.vertices;
  const std::size_t alphabet = answers == RendezvousAnswers::EdgeIndex ? graph.max_degree() : n;
  // Destination of answer k from vertex v, or n for an illegal move.
  auto destination = [&](std::size_t v, std::size_t k) -> std::size_t {
    if (answers == RendezvousAnswers::EdgeIndex) return k < graph.adjacency[v].size() ? graph.adjacency[v][k] : n;
    return graph.adjacent(v, k) ? k : n;
  };
  return tabulate_game(std::move(name), {{n, n}, {alphabet, alphabet}},
                       std::vector<double>(n * n, 1.0 / double(n * n)), [&](const auto& o, const auto& a) {
                         const std::size_t d0 = destination(o[0], a[0]), d1 = destination(o[1], a[1]);
                         return d0 < n && d0 == d1;
                       });
}

NonlocalGame make_game(const std::string& name, RendezvousAnswers answers) {
  if (name == "chsh") return make_chsh();
  if (name == "ghz") return make_ghz();
  if (name == "rendezvous-tetra") return make_rendezvous(GraphSpec::complete(4), answers, name);
  if (name == "rendezvous-cube") return make_rendezvous(GraphSpec::hypercube(3), answers, name);
  if (name.starts_with("rendezvous:"))
    return make_rendezvous(GraphSpec::load_edge_list(name.substr(11)), answers, name);
  fail(ErrorCode::InvalidArgument, "unknown game '" + name + "'");
}

std::vector<std::string> game_names() { return {"chsh", "ghz", "rendezvous-tetra", "rendezvous-cube"}; }

double quantum_reference_value(const std::string& game_name) {
  if (game_name == "chsh") return std::pow(std::cos(std::numbers::pi / 8), 2);
  if (game_name == "ghz") return 1.0;
  if (game_name == "rendezvous-tetra") return 0.64506;
  if (game_name == "rendezvous-cube") return 0.32253;
  return std::numeric_limits<double>::quiet_NaN();
}

RoundResult Referee::play_round(const AnyPolicy& policy, Rng& rng) const {
  require(space_of(policy) == game_.space, ErrorCode::DimensionMismatch, "policy alphabets do not match the game");
  RoundResult r;
  r.question = sample_question(rng);
  r.answers = sample_action(policy, r.question, rng).actions;
  r.verdict = judge(r.question, r.answers);
  return r;
}

double exact_win_probability(const NonlocalGame& game, const JointPolicyTable& table) {
  require(table.space == game.space, ErrorCode::DimensionMismatch, "policy alphabets do not match the game");
  const std::size_t na = game.space.joint_actions();
  double total = 0.0;
  for (std::size_t o = 0; o < game.mu.size(); ++o) {
    if (game.mu[o] == 0.0) continue;
    const auto row = table.row(o);
    double w = 0.0;
    for (std::size_t a = 0; a < na; ++a)
      if (game.predicate[o * na + a]) w += row[a];
    total += game.mu[o] * w;
  }
  return total;
}

double exact_win_probability(const NonlocalGame& game, const AnyPolicy& policy) {
  require(space_of(policy) == game.space, ErrorCode::DimensionMismatch, "policy alphabets do not match the game");
  const std::size_t na = game.space.joint_actions();
  double total = 0.0;
  for (std::size_t o = 0; o < game.mu.size(); ++o) {
    if (game.mu[o] == 0.0) continue;
    const auto row = joint_distribution(policy, o);
    double w = 0.0;
    for (std::size_t a = 0; a < na; ++a)
      if (game.predicate[o * na + a]) w += row[a];
    total += game.mu[o] * w;
  }
  return total;
}

ClassicalOptimum classical_optimum(const NonlocalGame& game, std::uint64_t budget) {
  game.validate();
  const FiniteHistorySpace& space = game.space;
  const std::size_t n = space.agents();
  const std::size_t last = n - 1;
  const std::size_t nq = space.joint_histories(), na = space.joint_actions();

  // candidates[i][o_i]: answers that win for some question and answer completion.
  std::vector<std::vector<std::vector<std::size_t>>> candidates(n);
  for (std::size_t i = 0; i < last; ++i) {
    std::vector<std::vector<bool>> useful(space.histories[i], std::vector<bool>(space.actions[i], false));
    for (std::size_t o = 0; o < nq; ++o) {
      if (game.mu[o] == 0.0) continue;
      const std::size_t oi = space.split_history(o)[i];
      for (std::size_t a = 0; a < na; ++a)
        if (game.predicate[o * na + a]) useful[oi][space.split_action(a)[i]] = true;
    }
    candidates[i].resize(space.histories[i]);
    for (std::size_t oi = 0; oi < space.histories[i]; ++oi) {
      for (std::size_t ai = 0; ai < space.actions[i]; ++ai)
        if (useful[oi][ai]) candidates[i][oi].push_back(ai);
      if (candidates[i][oi].empty()) candidates[i][oi].push_back(0);
    }
  }

  // Odometer digits: one per (agent < last, question).
  struct Digit {
    std::size_t agent, question;
    const std::vector<std::size_t>* options;
  };
  std::vector<Digit> digits;
  double profiles = 1.0;
  for (std::size_t i = 0; i < last; ++i)
    for (std::size_t oi = 0; oi < space.histories[i]; ++oi) {
      digits.push_back({i, oi, &candidates[i][oi]});
      profiles *= double(candidates[i][oi].size());
    }
  if (profiles > double(budget)) {
    std::ostringstream msg;
    msg << "classical_optimum: " << profiles << " strategy profiles exceed the budget " << budget;
    fail(ErrorCode::BudgetExceeded, msg.str());
  }

  // Per joint question: its split and the index of the last player's question.
  std::vector<std::vector<std::size_t>> q_split(nq);
  for (std::size_t o = 0; o < nq; ++o) q_split[o] = space.split_history(o);
  const std::size_t a_last = space.actions[last];

  std::vector<std::size_t> pos(digits.size(), 0);
  std::vector<std::vector<std::size_t>> strategy(n);
  for (std::size_t i = 0; i < n; ++i) strategy[i].assign(space.histories[i], 0);

  ClassicalOptimum best;
  best.value = -1.0;
  std::vector<double> score(space.histories[last] * a_last);
  std::vector<std::size_t> answer(n);
  while (true) {
    for (std::size_t k = 0; k < digits.size(); ++k)
      strategy[digits[k].agent][digits[k].question] = (*digits[k].options)[pos[k]];

    std::fill(score.begin(), score.end(), 0.0);
    for (std::size_t o = 0; o < nq; ++o) {
      if (game.mu[o] == 0.0) continue;
      const auto& od = q_split[o];
      for (std::size_t i = 0; i < last; ++i) answer[i] = strategy[i][od[i]];
      for (std::size_t al = 0; al < a_last; ++al) {
        answer[last] = al;
        if (game.predicate[o * na + space.join_action(answer)]) score[od[last] * a_last + al] += game.mu[o];
      }
    }
    double value = 0.0;
    std::vector<std::size_t> response(space.histories[last]);
    for (std::size_t ol = 0; ol < space.histories[last]; ++ol) {
      const auto first = score.begin() + std::ptrdiff_t(ol * a_last);
      const auto it = std::max_element(first, first + std::ptrdiff_t(a_last));
      response[ol] = std::size_t(it - first);
      value += *it;
    }
    ++best.profiles_searched;
    if (value > best.value + 1e-15) {
      best.value = value;
      best.strategy = strategy;
      best.strategy[last] = response;
    }

    std::size_t k = 0;
    while (k < digits.size() && ++pos[k] == digits[k].options->size()) pos[k++] = 0;
    if (k == digits.size()) break;
  }
  return best;
}

FactorizedPolicy deterministic_policy(const FiniteHistorySpace& space,
                                      const std::vector<std::vector<std::size_t>>& strategy) {
  require(strategy.size() == space.agents(), ErrorCode::DimensionMismatch, "one strategy per agent");
  FactorizedPolicy p{space, {}};
  for (std::size_t i = 0; i < space.agents(); ++i) {
    require(strategy[i].size() == space.histories[i], ErrorCode::DimensionMismatch, "one answer per question");
    p.locals.push_back(ConditionalTable::deterministic(space.actions[i], strategy[i]));
  }
  return p;
}

EntangledPolicy chsh_quantum_policy() {
  auto projective = [](double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return Povm({CMat{{c * c, c * s}, {c * s, s * s}}, CMat{{s * s, -c * s}, {-c * s, c * c}}});
  };
  const double pi = std::numbers::pi;
  return EntangledPolicy{FiniteHistorySpace{{2, 2}, {2, 2}},
                         DensityMatrix::bell(),
                         {{projective(0.0), projective(pi / 4)}, {projective(pi / 8), projective(-pi / 8)}}};
}

}  // namespace qcoord
