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

#include "qcoord/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "qcoord/error.hpp"

namespace qcoord {

namespace {

std::size_t product(std::span<const std::size_t> v) {
  std::size_t p = 1;
  for (auto x : v) p *= x;
  return p;
}

std::vector<std::size_t> split(std::size_t joint, std::span<const std::size_t> radix) {
  std::vector<std::size_t> out(radix.size());
  for (std::size_t i = radix.size(); i-- > 0;) {
    out[i] = joint % radix[i];
    joint /= radix[i];
  }
  return out;
}

std::size_t join(std::span<const std::size_t> digits, std::span<const std::size_t> radix) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < radix.size(); ++i) idx = idx * radix[i] + digits[i];
  return idx;
}

double safe_log(double p) { return std::log(std::max(p, 1e-300)); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<const Povm*> measurements_at(const EntangledPolicy& p, std::span<const std::size_t> h) {
  std::vector<const Povm*> ms;
  for (std::size_t i = 0; i < h.size(); ++i) ms.push_back(&p.measurements[i][h[i]]);
  return ms;
}

std::vector<double> entangled_row(const EntangledPolicy& p, std::size_t joint_history) {
  const auto h = p.space.split_history(joint_history);
  return born_joint(p.rho, measurements_at(p, h)).probabilities;
}

std::vector<double> shared_advice_row(const SharedAdviceCoordinator& c, std::span<const std::size_t> advice) {
  std::vector<double> out(product(advice), 0.0);
  std::vector<std::size_t> x(advice.size());
  for (std::size_t k = 0; k < c.shared.size(); ++k) {
    std::fill(x.begin(), x.end(), k);
    out[join(x, advice)] += c.shared[k];
  }
  return out;
}

}  // namespace

std::size_t FiniteHistorySpace::joint_histories() const { return product(histories); }
std::size_t FiniteHistorySpace::joint_actions() const { return product(actions); }
std::vector<std::size_t> FiniteHistorySpace::split_history(std::size_t joint) const { return split(joint, histories); }
std::vector<std::size_t> FiniteHistorySpace::split_action(std::size_t joint) const { return split(joint, actions); }
std::size_t FiniteHistorySpace::join_history(std::span<const std::size_t> h) const { return join(h, histories); }
std::size_t FiniteHistorySpace::join_action(std::span<const std::size_t> a) const { return join(a, actions); }

void FiniteHistorySpace::validate() const {
  require(!histories.empty() && histories.size() == actions.size(), ErrorCode::InvalidArgument,
          "history space needs matching, non-empty per-agent alphabets");
  for (std::size_t i = 0; i < histories.size(); ++i)
    require(histories[i] > 0 && actions[i] > 0, ErrorCode::InvalidArgument, "empty history or action alphabet");
}

ConditionalTable ConditionalTable::from_logits(std::size_t contexts, std::size_t outcomes,
                                               std::span<const double> logits) {
  require(logits.size() == contexts * outcomes, ErrorCode::DimensionMismatch, "logit table size mismatch");
  ConditionalTable t{contexts, outcomes, std::vector<double>(logits.size())};
  for (std::size_t c = 0; c < contexts; ++c) {
    const auto row = logits.subspan(c * outcomes, outcomes);
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (std::size_t a = 0; a < outcomes; ++a) total += (t.probs[c * outcomes + a] = std::exp(row[a] - mx));
    for (std::size_t a = 0; a < outcomes; ++a) t.probs[c * outcomes + a] /= total;
  }
  return t;
}

ConditionalTable ConditionalTable::deterministic(std::size_t outcomes, std::span<const std::size_t> choice) {
  ConditionalTable t{choice.size(), outcomes, std::vector<double>(choice.size() * outcomes, 0.0)};
  for (std::size_t c = 0; c < choice.size(); ++c) {
    require(choice[c] < outcomes, ErrorCode::InvalidArgument, "deterministic choice out of range");
    t.probs[c * outcomes + choice[c]] = 1.0;
  }
  return t;
}

void ConditionalTable::validate() const {
  require(probs.size() == contexts * outcomes, ErrorCode::DimensionMismatch, "conditional table size mismatch");
  for (std::size_t c = 0; c < contexts; ++c) {
    double s = 0.0;
    for (double p : row(c)) {
      require(p >= 0.0 && std::isfinite(p), ErrorCode::InvalidArgument, "conditional table has a negative entry");
      s += p;
    }
    require(std::abs(s - 1.0) <= 1e-9, ErrorCode::InvalidArgument, "conditional table row does not sum to 1");
  }
}

void JointPolicyTable::validate(double tol) const {
  space.validate();
  const std::size_t h = space.joint_histories(), a = space.joint_actions();
  require(probs.size() == h * a, ErrorCode::DimensionMismatch, "policy table size mismatch");
  for (std::size_t r = 0; r < h; ++r) {
    double s = 0.0;
    for (double p : row(r)) {
      require(p >= -tol && p <= 1.0 + tol, ErrorCode::InvalidArgument, "policy table entry outside [0, 1]");
      s += p;
    }
    require(std::abs(s - 1.0) <= tol, ErrorCode::InvalidArgument, "policy table slice does not sum to 1");
  }
}

std::vector<std::size_t> EntangledPolicy::local_dims() const {
  std::vector<std::size_t> dims;
  for (const auto& per_agent : measurements) dims.push_back(per_agent.empty() ? 0 : per_agent.front().dim());
  return dims;
}

void EntangledPolicy::validate() const {
  space.validate();
  require(measurements.size() == space.agents(), ErrorCode::DimensionMismatch, "one measurement table per agent");
  std::size_t total = 1;
  for (std::size_t i = 0; i < space.agents(); ++i) {
    require(measurements[i].size() == space.histories[i], ErrorCode::DimensionMismatch,
            "one POVM per (agent, history)");
    const std::size_t d = measurements[i].front().dim();
    for (const Povm& m : measurements[i]) {
      require(m.dim() == d, ErrorCode::DimensionMismatch, "an agent's POVMs must share one dimension");
      require(m.outcomes() == space.actions[i], ErrorCode::DimensionMismatch, "POVM outcomes must match actions");
    }
    total *= d;
  }
  require(total == rho.dim(), ErrorCode::DimensionMismatch, "product of local dimensions must equal dim(rho)");
}

void CoordinatorAdvicePolicy::validate() const {
  space.validate();
  require(advice.size() == space.agents() && actors.size() == space.agents(), ErrorCode::DimensionMismatch,
          "advice and actor tables must cover every agent");
  for (std::size_t i = 0; i < space.agents(); ++i) {
    require(advice[i] > 0, ErrorCode::InvalidArgument, "empty advice alphabet");
    require(actors[i].contexts == advice[i] * space.histories[i] && actors[i].outcomes == space.actions[i],
            ErrorCode::DimensionMismatch, "actor table shape mismatch");
    actors[i].validate();
  }
  std::visit(overloaded{[&](const EntangledPolicy& e) {
                          e.validate();
                          require(e.space.histories == space.histories && e.space.actions == advice,
                                  ErrorCode::DimensionMismatch, "coordinator must map histories to advice");
                        },
                        [&](const SharedAdviceCoordinator& c) {
                          for (auto x : advice)
                            require(x == c.shared.size(), ErrorCode::DimensionMismatch,
                                    "shared advice requires every advice alphabet to equal the shared alphabet");
                        }},
             coordinator);
}

std::vector<double> CoordinatorAdvicePolicy::coordinator_distribution(std::size_t joint_history) const {
  return std::visit(overloaded{[&](const EntangledPolicy& e) { return entangled_row(e, joint_history); },
                               [&](const SharedAdviceCoordinator& c) { return shared_advice_row(c, advice); }},
                    coordinator);
}

const FiniteHistorySpace& space_of(const AnyPolicy& policy) {
  return std::visit([](const auto& p) -> const FiniteHistorySpace& { return p.space; }, policy);
}

std::vector<double> joint_distribution(const AnyPolicy& policy, std::size_t joint_history) {
  const FiniteHistorySpace& space = space_of(policy);
  require(joint_history < space.joint_histories(), ErrorCode::InvalidArgument, "joint history out of range");
  const std::size_t na = space.joint_actions();
  const auto h = space.split_history(joint_history);

  return std::visit(
      overloaded{
          [&](const FactorizedPolicy& p) {
            std::vector<double> out(na);
            for (std::size_t a = 0; a < na; ++a) {
              const auto ai = space.split_action(a);
              double v = 1.0;
              for (std::size_t i = 0; i < space.agents(); ++i) v *= p.locals[i](h[i], ai[i]);
              out[a] = v;
            }
            return out;
          },
          [&](const SharedRandomnessPolicy& p) {
            std::vector<double> out(na, 0.0);
            for (std::size_t x = 0; x < p.shared.size(); ++x) {
              if (p.shared[x] == 0.0) continue;
              for (std::size_t a = 0; a < na; ++a) {
                const auto ai = space.split_action(a);
                double v = p.shared[x];
                for (std::size_t i = 0; i < space.agents(); ++i)
                  v *= p.locals[i](x * space.histories[i] + h[i], ai[i]);
                out[a] += v;
              }
            }
            return out;
          },
          [&](const EntangledPolicy& p) { return entangled_row(p, joint_history); },
          [&](const CoordinatorAdvicePolicy& p) {
            const std::vector<double> q = p.coordinator_distribution(joint_history);
            std::vector<double> out(na, 0.0);
            for (std::size_t x = 0; x < q.size(); ++x) {
              if (q[x] == 0.0) continue;
              const auto xi = split(x, p.advice);
              for (std::size_t a = 0; a < na; ++a) {
                const auto ai = space.split_action(a);
                double v = q[x];
                for (std::size_t i = 0; i < space.agents(); ++i)
                  v *= p.actors[i](xi[i] * space.histories[i] + h[i], ai[i]);
                out[a] += v;
              }
            }
            return out;
          },
          [&](const JointPolicyTable& t) {
            const auto r = t.row(joint_history);
            return std::vector<double>(r.begin(), r.end());
          }},
      policy);
}

JointPolicyTable tabulate(const AnyPolicy& policy) {
  if (const auto* t = std::get_if<JointPolicyTable>(&policy)) return *t;
  JointPolicyTable table{space_of(policy), {}};
  const std::size_t nh = table.space.joint_histories();
  table.probs.reserve(nh * table.space.joint_actions());
  for (std::size_t h = 0; h < nh; ++h) {
    const auto row = joint_distribution(policy, h);
    table.probs.insert(table.probs.end(), row.begin(), row.end());
  }
  return table;
}

SampledAction sample_action(const AnyPolicy& policy, std::size_t joint_history, Rng& rng) {
  const FiniteHistorySpace& space = space_of(policy);
  const auto h = space.split_history(joint_history);
  const std::size_t n = space.agents();
  SampledAction s;
  s.actions.resize(n);

  auto sample_actors = [&](const std::vector<ConditionalTable>& tables, std::span<const std::size_t> x,
                           bool with_shared_context) {
    s.local_log_probs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ctx = with_shared_context ? x[i] * space.histories[i] + h[i] : h[i];
      const auto row = tables[i].row(ctx);
      s.actions[i] = rng.categorical(row);
      s.local_log_probs[i] = safe_log(row[s.actions[i]]);
    }
  };

  std::visit(overloaded{
                 [&](const FactorizedPolicy& p) {
                   sample_actors(p.locals, {}, false);
                   s.joint_log_prob = 0.0;
                   for (double l : s.local_log_probs) s.joint_log_prob += l;
                 },
                 [&](const SharedRandomnessPolicy& p) {
                   const std::size_t x = rng.categorical(p.shared);
                   s.advice.assign(n, x);
                   s.coordinator_log_prob = safe_log(p.shared[x]);
                   sample_actors(p.locals, s.advice, true);
                   s.joint_log_prob = std::numeric_limits<double>::quiet_NaN();
                 },
                 [&](const EntangledPolicy& p) {
                   const auto row = entangled_row(p, joint_history);
                   const std::size_t a = rng.categorical(row);
                   s.actions = space.split_action(a);
                   // The measurement outcomes are the advice; actors are the identity.
                   s.advice = s.actions;
                   s.local_log_probs.assign(n, 0.0);
                   s.coordinator_log_prob = safe_log(row[a]);
                   s.joint_log_prob = s.coordinator_log_prob;
                 },
                 [&](const CoordinatorAdvicePolicy& p) {
                   const auto q = p.coordinator_distribution(joint_history);
                   const std::size_t x = rng.categorical(q);
                   s.advice = split(x, p.advice);
                   s.coordinator_log_prob = safe_log(q[x]);
                   sample_actors(p.actors, s.advice, true);
                   s.joint_log_prob = std::numeric_limits<double>::quiet_NaN();
                 },
                 [&](const JointPolicyTable& t) {
                   const auto row = t.row(joint_history);
                   const std::size_t a = rng.categorical(row);
                   s.actions = space.split_action(a);
                   s.joint_log_prob = safe_log(row[a]);
                 }},
             policy);
  return s;
}

EntangledPolicy collapse_advice(const CoordinatorAdvicePolicy& policy) {
  policy.validate();
  const auto* coord = std::get_if<EntangledPolicy>(&policy.coordinator);
  require(coord != nullptr, ErrorCode::InvalidArgument, "collapse_advice needs an entangled coordinator");
  const FiniteHistorySpace& space = policy.space;
  EntangledPolicy out{space, coord->rho, {}};
  out.measurements.resize(space.agents());
  for (std::size_t i = 0; i < space.agents(); ++i) {
    for (std::size_t h = 0; h < space.histories[i]; ++h) {
      const Povm& advice_povm = coord->measurements[i][h];
      std::vector<CMat> elements(space.actions[i], CMat::zeros(advice_povm.dim()));
      for (std::size_t a = 0; a < space.actions[i]; ++a)
        for (std::size_t x = 0; x < policy.advice[i]; ++x) {
          const double w = policy.actors[i](x * space.histories[i] + h, a);
          if (w != 0.0) elements[a] += advice_povm[x] * cplx(w);
        }
      out.measurements[i].push_back(Povm(std::move(elements)));
    }
  }
  return out;
}

EntangledPolicy embed_shared_randomness(const SharedRandomnessPolicy& policy) {
  const FiniteHistorySpace& space = policy.space;
  const std::size_t k = policy.shared.size();
  const std::size_t n = space.agents();
  std::size_t dim = 1;
  for (std::size_t i = 0; i < n; ++i) dim *= k;
  CMat rho(dim);
  std::vector<std::size_t> digits(n), radix(n, k);
  for (std::size_t x = 0; x < k; ++x) {
    std::fill(digits.begin(), digits.end(), x);
    const std::size_t idx = join(digits, radix);
    rho(idx, idx) = policy.shared[x];
  }
  EntangledPolicy out{space, DensityMatrix::unchecked(std::move(rho)), {}};
  out.measurements.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t h = 0; h < space.histories[i]; ++h) {
      std::vector<CMat> elements;
      for (std::size_t a = 0; a < space.actions[i]; ++a) {
        std::vector<double> diag(k);
        for (std::size_t x = 0; x < k; ++x) diag[x] = policy.locals[i](x * space.histories[i] + h, a);
        elements.push_back(CMat::diagonal(diag));
      }
      out.measurements[i].push_back(Povm(std::move(elements)));
    }
  return out;
}

NonSignalingReport check_non_signaling(const AnyPolicy& policy, double tolerance) {
  const FiniteHistorySpace& space = space_of(policy);
  if (space.joint_histories() > kNonSignalingBudget) {
    std::ostringstream msg;
    msg << "check_non_signaling: " << space.joint_histories() << " joint histories exceed the enumeration budget "
        << kNonSignalingBudget;
    fail(ErrorCode::BudgetExceeded, msg.str());
  }
  const JointPolicyTable table = tabulate(policy);
  const std::size_t n = space.agents();
  const std::size_t nh = space.joint_histories(), na = space.joint_actions();

  std::vector<std::vector<std::size_t>> hs(nh), as(na);
  for (std::size_t h = 0; h < nh; ++h) hs[h] = space.split_history(h);
  for (std::size_t a = 0; a < na; ++a) as[a] = space.split_action(a);

  double worst = 0.0;
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    std::vector<std::size_t> hist_radix, act_radix;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) {
        hist_radix.push_back(space.histories[i]);
        act_radix.push_back(space.actions[i]);
      }
    const std::size_t nhi = product(hist_radix), nai = product(act_radix);
    auto project = [&](const std::vector<std::size_t>& digits, const std::vector<std::size_t>& radix) {
      std::vector<std::size_t> sub;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1) sub.push_back(digits[i]);
      return join(sub, radix);
    };
    // lo/hi of the a_I-marginal across every h_J, per (h_I, a_I).
    std::vector<double> lo(nhi * nai, std::numeric_limits<double>::infinity());
    std::vector<double> hi(nhi * nai, -std::numeric_limits<double>::infinity());
    std::vector<double> marg(nai);
    for (std::size_t h = 0; h < nh; ++h) {
      std::fill(marg.begin(), marg.end(), 0.0);
      const auto row = table.row(h);
      for (std::size_t a = 0; a < na; ++a) marg[project(as[a], act_radix)] += row[a];
      const std::size_t hi_idx = project(hs[h], hist_radix);
      for (std::size_t ai = 0; ai < nai; ++ai) {
        lo[hi_idx * nai + ai] = std::min(lo[hi_idx * nai + ai], marg[ai]);
        hi[hi_idx * nai + ai] = std::max(hi[hi_idx * nai + ai], marg[ai]);
      }
    }
    for (std::size_t k = 0; k < lo.size(); ++k) worst = std::max(worst, hi[k] - lo[k]);
  }
  return {worst <= tolerance, worst};
}

void write_policy_csv(const JointPolicyTable& table, std::ostream& out) {
  const FiniteHistorySpace& space = table.space;
  const std::size_t n = space.agents();
  for (std::size_t i = 0; i < n; ++i) out << "h" << i << ",";
  for (std::size_t i = 0; i < n; ++i) out << "a" << i << ",";
  out << "probability\n";
  const auto old_precision = out.precision(17);
  for (std::size_t h = 0; h < space.joint_histories(); ++h) {
    const auto hd = space.split_history(h);
    for (std::size_t a = 0; a < space.joint_actions(); ++a) {
      const auto ad = space.split_action(a);
      for (auto v : hd) out << v << ",";
      for (auto v : ad) out << v << ",";
      out << table.probs[h * space.joint_actions() + a] << "\n";
    }
  }
  out.precision(old_precision);
}

EntangledParameters EntangledParameters::random(const FiniteHistorySpace& space,
                                                std::span<const std::size_t> local_dims, Rng& rng, double scale) {
  space.validate();
  require(local_dims.size() == space.agents(), ErrorCode::DimensionMismatch, "one local dimension per agent");
  EntangledParameters p;
  p.space = space;
  p.local_dims.assign(local_dims.begin(), local_dims.end());
  std::size_t total = 1;
  for (auto d : local_dims) total *= d;
  auto randmat = [&](std::size_t d) {
    CMat m(d);
    for (auto& v : m.data()) v = cplx(scale * rng.normal(), scale * rng.normal());
    return m;
  };
  p.factor.factor = randmat(total);
  p.logits.resize(space.agents());
  for (std::size_t i = 0; i < space.agents(); ++i)
    for (std::size_t h = 0; h < space.histories[i]; ++h) {
      PovmLogits z;
      for (std::size_t a = 0; a < space.actions[i]; ++a) z.logits.push_back(randmat(local_dims[i]));
      p.logits[i].push_back(std::move(z));
    }
  return p;
}

std::size_t EntangledParameters::parameter_count() const {
  std::size_t n = factor.parameter_count();
  for (const auto& per_agent : logits)
    for (const auto& z : per_agent) n += z.parameter_count();
  return n;
}

void EntangledParameters::write_parameters(std::span<double> out) const {
  require(out.size() == parameter_count(), ErrorCode::DimensionMismatch, "parameter vector size mismatch");
  std::size_t pos = 0;
  factor.write_parameters(out.subspan(pos, factor.parameter_count()));
  pos += factor.parameter_count();
  for (const auto& per_agent : logits)
    for (const auto& z : per_agent) {
      z.write_parameters(out.subspan(pos, z.parameter_count()));
      pos += z.parameter_count();
    }
}

void EntangledParameters::read_parameters(std::span<const double> in) {
  require(in.size() == parameter_count(), ErrorCode::DimensionMismatch, "parameter vector size mismatch");
  std::size_t pos = 0;
  factor.read_parameters(in.subspan(pos, factor.parameter_count()));
  pos += factor.parameter_count();
  for (auto& per_agent : logits)
    for (auto& z : per_agent) {
      z.read_parameters(in.subspan(pos, z.parameter_count()));
      pos += z.parameter_count();
    }
}

EntangledPolicy EntangledParameters::materialize() const {
  EntangledPolicy out{space, density_from_factor(factor), {}};
  out.measurements.resize(space.agents());
  for (std::size_t i = 0; i < space.agents(); ++i)
    for (const auto& z : logits[i]) out.measurements[i].push_back(quantum_softmax(z));
  return out;
}

}  // namespace qcoord
