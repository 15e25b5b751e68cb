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

#include "qcoord/bell_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qcoord/error.hpp"

namespace qcoord {

namespace {

constexpr double kPricingTol = 1e-11;
constexpr double kPivotTol = 1e-9;
constexpr std::size_t kRefactorEvery = 64;
constexpr std::size_t kMaxPivots = 1'000'000;

std::uint64_t checked_vertex_count(const FiniteHistorySpace& space, std::uint64_t budget) {
  const std::uint64_t count = vertex_count(space);
  if (count > budget) {
    std::ostringstream msg;
    msg << "vertex enumeration: " << (count == std::numeric_limits<std::uint64_t>::max() ? "more than 2^64" : std::to_string(count))
        << " deterministic policies exceed the budget " << budget;
    fail(ErrorCode::BudgetExceeded, msg.str());
  }
  return count;
}

/// Walks every vertex, exposing for each joint history the flattened joint
/// action the vertex plays there.
class VertexWalker {
 public:
  VertexWalker(const FiniteHistorySpace& space, std::uint64_t budget)
      : space_(space), count_(checked_vertex_count(space, budget)) {
    const std::size_t n = space.agents();
    per_agent_.resize(n);
    contrib_.resize(n);
    std::size_t stride = 1;
    for (std::size_t i = n; i-- > 0;) {
      std::uint64_t strategies = 1;
      for (std::size_t h = 0; h < space.histories[i]; ++h) strategies *= space.actions[i];
      per_agent_[i] = strategies;
      contrib_[i].resize(strategies * space.histories[i]);
      for (std::uint64_t s = 0; s < strategies; ++s) {
        std::uint64_t code = s;
        for (std::size_t h = 0; h < space.histories[i]; ++h) {
          contrib_[i][s * space.histories[i] + h] = (code % space.actions[i]) * stride;
          code /= space.actions[i];
        }
      }
      stride *= space.actions[i];
    }
    for (std::size_t h = 0; h < space.joint_histories(); ++h) splits_.push_back(space.split_history(h));
    codes_.assign(n, 0);
    actions_.assign(space.joint_histories(), 0);
  }

  std::uint64_t count() const { return count_; }

  /// Joint action per joint history for vertex `index`.
  const std::vector<std::size_t>& actions(std::uint64_t index) {
    for (std::size_t i = space_.agents(); i-- > 0;) {
      codes_[i] = index % per_agent_[i];
      index /= per_agent_[i];
    }
    for (std::size_t h = 0; h < actions_.size(); ++h) {
      std::size_t a = 0;
      for (std::size_t i = 0; i < codes_.size(); ++i)
        a += contrib_[i][codes_[i] * space_.histories[i] + splits_[h][i]];
      actions_[h] = a;
    }
    return actions_;
  }

 private:
  const FiniteHistorySpace& space_;
  std::uint64_t count_;
  std::vector<std::uint64_t> per_agent_;
  std::vector<std::vector<std::size_t>> contrib_;  // [agent][strategy * |H_i| + h_i] -> action * stride
  std::vector<std::vector<std::size_t>> splits_;
  std::vector<std::uint64_t> codes_;
  std::vector<std::size_t> actions_;
};

/// Dense Gauss-Jordan inverse with partial pivoting.
std::vector<double> invert(std::vector<double> a, std::size_t m) {
  std::vector<double> inv(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) inv[i * m + i] = 1.0;
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < m; ++r)
      if (std::abs(a[r * m + c]) > std::abs(a[piv * m + c])) piv = r;
    if (std::abs(a[piv * m + c]) < 1e-12) fail(ErrorCode::LpFailure, "simplex basis became singular");
    if (piv != c)
      for (std::size_t k = 0; k < m; ++k) {
        std::swap(a[piv * m + k], a[c * m + k]);
        std::swap(inv[piv * m + k], inv[c * m + k]);
      }
    const double d = a[c * m + c];
    for (std::size_t k = 0; k < m; ++k) {
      a[c * m + k] /= d;
      inv[c * m + k] /= d;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (r == c) continue;
      const double f = a[r * m + c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < m; ++k) {
        a[r * m + k] -= f * a[c * m + k];
        inv[r * m + k] -= f * inv[c * m + k];
      }
    }
  }
  return inv;
}

}  // namespace

std::uint64_t vertex_count(const FiniteHistorySpace& space) {
  std::uint64_t count = 1;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  for (std::size_t i = 0; i < space.agents(); ++i)
    for (std::size_t h = 0; h < space.histories[i]; ++h) {
      if (count > kMax / space.actions[i]) return kMax;
      count *= space.actions[i];
    }
  return count;
}

std::vector<std::vector<std::size_t>> vertex_strategy(const FiniteHistorySpace& space, std::uint64_t index) {
  const std::size_t n = space.agents();
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = n; i-- > 0;) {
    std::uint64_t strategies = 1;
    for (std::size_t h = 0; h < space.histories[i]; ++h) strategies *= space.actions[i];
    std::uint64_t code = index % strategies;
    index /= strategies;
    for (std::size_t h = 0; h < space.histories[i]; ++h) {
      out[i].push_back(code % space.actions[i]);
      code /= space.actions[i];
    }
  }
  return out;
}

JointPolicyTable vertex_table(const FiniteHistorySpace& space, std::uint64_t index) {
  const auto strategy = vertex_strategy(space, index);
  JointPolicyTable t{space, std::vector<double>(space.joint_histories() * space.joint_actions(), 0.0)};
  std::vector<std::size_t> a(space.agents());
  for (std::size_t h = 0; h < space.joint_histories(); ++h) {
    const auto hd = space.split_history(h);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = strategy[i][hd[i]];
    t.probs[h * space.joint_actions() + space.join_action(a)] = 1.0;
  }
  return t;
}

std::vector<JointPolicyTable> enumerate_vertices(const FiniteHistorySpace& space, std::uint64_t budget) {
  VertexWalker walker(space, budget);
  const std::size_t na = space.joint_actions();
  std::vector<JointPolicyTable> out;
  out.reserve(walker.count());
  for (std::uint64_t v = 0; v < walker.count(); ++v) {
    JointPolicyTable t{space, std::vector<double>(space.joint_histories() * na, 0.0)};
    const auto& acts = walker.actions(v);
    for (std::size_t h = 0; h < acts.size(); ++h) t.probs[h * na + acts[h]] = 1.0;
    out.push_back(std::move(t));
  }
  return out;
}

double BellInequality::value(const JointPolicyTable& p) const {
  require(p.probs.size() == coefficients.size(), ErrorCode::DimensionMismatch, "inequality dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < coefficients.size(); ++k) s += coefficients[k] * p.probs[k];
  return s;
}

double max_over_vertices(const FiniteHistorySpace& space, const std::vector<double>& c, std::uint64_t budget) {
  VertexWalker walker(space, budget);
  const std::size_t na = space.joint_actions();
  require(c.size() == space.joint_histories() * na, ErrorCode::DimensionMismatch, "inequality dimension mismatch");
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t v = 0; v < walker.count(); ++v) {
    const auto& acts = walker.actions(v);
    double s = 0.0;
    for (std::size_t h = 0; h < acts.size(); ++h) s += c[h * na + acts[h]];
    best = std::max(best, s);
  }
  return best;
}

BellInequality game_bell_inequality(const NonlocalGame& game) {
  BellInequality ineq;
  const std::size_t na = game.space.joint_actions();
  ineq.coefficients.resize(game.predicate.size());
  for (std::size_t o = 0; o < game.mu.size(); ++o)
    for (std::size_t a = 0; a < na; ++a) ineq.coefficients[o * na + a] = game.predicate[o * na + a] ? game.mu[o] : 0.0;
  ineq.threshold = classical_optimum(game).value;
  return ineq;
}

BellCertificate membership(const JointPolicyTable& p, std::uint64_t budget) {
  p.validate(1e-9);
  const FiniteHistorySpace& space = p.space;
  VertexWalker walker(space, budget);
  const std::uint64_t nv = walker.count();
  const std::size_t nh = space.joint_histories(), na = space.joint_actions();
  const std::size_t m = nh * na + 1;

  std::vector<double> rhs(p.probs);
  rhs.push_back(1.0);
  for (auto& v : rhs) v = std::max(v, 0.0);

  // Basic variables: vertex index in [0, nv) or artificial nv + row.
  std::vector<std::uint64_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) basis[r] = nv + r;
  std::vector<double> binv(m * m, 0.0);
  for (std::size_t r = 0; r < m; ++r) binv[r * m + r] = 1.0;
  std::vector<double> xb = rhs;
  std::vector<bool> artificial_gone(m, false);

  auto column_rows = [&](std::uint64_t var, std::vector<std::size_t>& rows) {
    rows.clear();
    if (var >= nv) {
      rows.push_back(std::size_t(var - nv));
      return;
    }
    const auto& acts = walker.actions(var);
    for (std::size_t h = 0; h < nh; ++h) rows.push_back(h * na + acts[h]);
    rows.push_back(m - 1);
  };

  auto refactor = [&] {
    std::vector<double> b(m * m, 0.0);
    std::vector<std::size_t> rows;
    for (std::size_t c = 0; c < m; ++c) {
      column_rows(basis[c], rows);
      for (auto r : rows) b[r * m + c] = 1.0;
    }
    binv = invert(std::move(b), m);
    for (std::size_t r = 0; r < m; ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += binv[r * m + k] * rhs[k];
      xb[r] = std::max(s, 0.0);
    }
  };

  std::vector<double> y(m), u(m);
  std::vector<std::size_t> rows;
  BellCertificate cert;
  std::size_t since_refactor = 0;

  for (;;) {
    if (cert.iterations >= kMaxPivots) fail(ErrorCode::LpFailure, "simplex pivot guard exceeded");
    // y = c_B^T B^{-1}; phase-one costs are 1 on artificials.
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t r = 0; r < m; ++r)
      if (basis[r] >= nv)
        for (std::size_t k = 0; k < m; ++k) y[k] += binv[r * m + k];

    // Bland: lowest-index variable with negative reduced cost. Vertex reduced
    // cost is -y.a_v; artificials never re-enter.
    std::uint64_t entering = std::numeric_limits<std::uint64_t>::max();
    for (std::uint64_t v = 0; v < nv; ++v) {
      const auto& acts = walker.actions(v);
      double s = y[m - 1];
      for (std::size_t h = 0; h < nh; ++h) s += y[h * na + acts[h]];
      if (s > kPricingTol) {
        entering = v;
        break;
      }
    }
    if (entering == std::numeric_limits<std::uint64_t>::max()) break;

    column_rows(entering, rows);
    for (std::size_t r = 0; r < m; ++r) {
      double s = 0.0;
      for (auto k : rows) s += binv[r * m + k];
      u[r] = s;
    }
    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      if (u[r] <= kPivotTol) continue;
      const double ratio = xb[r] / u[r];
      if (ratio < best_ratio - 1e-15 ||
          (ratio <= best_ratio + 1e-15 && leave < m && basis[r] < basis[leave])) {
        best_ratio = std::min(best_ratio, ratio);
        leave = r;
      }
    }
    if (leave == m) fail(ErrorCode::LpFailure, "phase-one simplex reported an unbounded ray");

    const double piv = u[leave];
    for (std::size_t k = 0; k < m; ++k) binv[leave * m + k] /= piv;
    xb[leave] /= piv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == leave || u[r] == 0.0) continue;
      const double f = u[r];
      for (std::size_t k = 0; k < m; ++k) binv[r * m + k] -= f * binv[leave * m + k];
      xb[r] = std::max(xb[r] - f * xb[leave], 0.0);
    }
    if (basis[leave] >= nv) artificial_gone[basis[leave] - nv] = true;
    basis[leave] = entering;
    ++cert.iterations;
    if (++since_refactor == kRefactorEvery) {
      refactor();
      since_refactor = 0;
    }
  }
  refactor();

  double infeasibility = 0.0;
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] >= nv) infeasibility += xb[r];

  auto fill_weights = [&] {
    cert.weights.clear();
    double total = 0.0;
    for (std::size_t r = 0; r < m; ++r)
      if (basis[r] < nv && xb[r] > 0.0) {
        cert.weights.emplace_back(basis[r], xb[r]);
        total += xb[r];
      }
    for (auto& w : cert.weights) w.second /= total;
    std::sort(cert.weights.begin(), cert.weights.end());
    std::vector<double> mix(p.probs.size(), 0.0);
    for (const auto& [v, w] : cert.weights) {
      const auto& acts = walker.actions(v);
      for (std::size_t h = 0; h < nh; ++h) mix[h * na + acts[h]] += w;
    }
    cert.residual = 0.0;
    for (std::size_t k = 0; k < mix.size(); ++k) cert.residual = std::max(cert.residual, std::abs(mix[k] - p.probs[k]));
  };

  if (infeasibility <= kFeasibilityResidual) {
    cert.verdict = BellCertificate::Verdict::Inside;
    fill_weights();
    return cert;
  }

  // Separating direction from the phase-one duals, re-thresholded exactly.
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] >= nv)
      for (std::size_t k = 0; k < m; ++k) y[k] += binv[r * m + k];
  std::vector<double> c(y.begin(), y.end() - 1);
  double scale = 0.0;
  for (double v : c) scale = std::max(scale, std::abs(v));
  if (scale > 0.0)
    for (double& v : c) v /= scale;
  BellInequality ineq{c, 0.0};
  ineq.threshold = max_over_vertices(space, c, budget);
  const double violation = ineq.value(p) - ineq.threshold;
  if (violation <= kViolationFloor) {
    cert.verdict = BellCertificate::Verdict::Inside;
    cert.boundary = true;
    fill_weights();
    return cert;
  }
  cert.verdict = BellCertificate::Verdict::Outside;
  cert.inequality = std::move(ineq);
  cert.violation = violation;
  return cert;
}

bool verify_certificate(const BellCertificate& cert, const JointPolicyTable& p, std::uint64_t budget) {
  const FiniteHistorySpace& space = p.space;
  if (cert.verdict == BellCertificate::Verdict::Inside) {
    const std::uint64_t nv = vertex_count(space);
    std::vector<double> mix(p.probs.size(), 0.0);
    double total = 0.0;
    for (const auto& [v, w] : cert.weights) {
      if (v >= nv || w < -1e-12) return false;
      total += w;
      const JointPolicyTable t = vertex_table(space, v);
      for (std::size_t k = 0; k < mix.size(); ++k) mix[k] += w * t.probs[k];
    }
    if (std::abs(total - 1.0) > 1e-8) return false;
    for (std::size_t k = 0; k < mix.size(); ++k)
      if (std::abs(mix[k] - p.probs[k]) > 1e-8) return false;
    return true;
  }
  if (cert.inequality.coefficients.size() != p.probs.size() || !(cert.violation > 0.0)) return false;
  if (max_over_vertices(space, cert.inequality.coefficients, budget) > cert.inequality.threshold + 1e-12) return false;
  return cert.inequality.value(p) - cert.inequality.threshold >= cert.violation - 1e-9;
}

}  // namespace qcoord
