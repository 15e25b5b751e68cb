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

// Acceptance checks, one per criterion: `acceptance --criterion N`.
// Prints a single PASS/FAIL line and exits 0 on pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "qcoord/bell_lp.hpp"
#include "qcoord/games.hpp"
#include "qcoord/mappo.hpp"
#include "qcoord/policies.hpp"
#include "qcoord/quantum.hpp"
#include "qcoord/queueing.hpp"
#include "qcoord/reinforce.hpp"
#include "qcoord/runs.hpp"
#include "../unit/test_util.hpp"

using namespace qcoord;
using namespace qcoord::testing;

namespace {

struct Verdict {
  enum Kind { Pass, Fail, Deviation } kind = Fail;
  std::string detail;
};

Verdict pass(std::string d) { return {Verdict::Pass, std::move(d)}; }
Verdict fail(std::string d) { return {Verdict::Fail, std::move(d)}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double complex_linear(const CMat& g, const CMat& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.data().size(); ++i) s += (std::conj(g.data()[i]) * m.data()[i]).real();
  return s;
}

// ---------------------------------------------------------------- 1, 2

Verdict povm_validity() {
  Rng rng(101);
  double worst_eig = 0.0, worst_res = 0.0, worst_herm = 0.0;
  std::size_t bad = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t d = 1 + rng.below(4), m = 1 + rng.below(4);
    const auto diag = quantum_softmax(random_logits(rng, m, d, 1.0 + 2.0 * rng.uniform())).diagnose();
    worst_eig = std::min(worst_eig, diag.min_eigenvalue);
    worst_res = std::max(worst_res, diag.completeness_residual);
    worst_herm = std::max(worst_herm, diag.max_hermiticity_error);
    if (!(diag.min_eigenvalue >= -1e-9 && diag.completeness_residual <= 1e-8)) ++bad;
  }
  const std::string d = fmt("1000 logit sets, min eigenvalue %.3g, max residual %.3g, max hermiticity error %.3g",
                            worst_eig, worst_res, worst_herm);
  return bad == 0 ? pass(d) : fail(fmt("%zu invalid; ", bad) + d);
}

Verdict povm_recovery() {
  Rng rng(202);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t d = 1 + rng.below(4), m = 2 + rng.below(3);
    const Povm target = random_pd_povm(rng, m, d);
    const Povm back = quantum_softmax(logits_from_povm(target));
    for (std::size_t j = 0; j < m; ++j) worst = std::max(worst, max_abs_diff(back[j], target[j]));
  }
  const std::string d = fmt("100 strictly positive targets, max entry error %.3g", worst);
  return worst <= 1e-9 ? pass(d) : fail(d);
}

// ---------------------------------------------------------------- 3

Verdict gradients() {
  Rng rng(303);
  double softmax = 0.0, density = 0.0, coord = 0.0, mlp = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t d = 1 + rng.below(4), m = 2 + rng.below(3);
    const PovmLogits z = random_logits(rng, m, d);
    std::vector<CMat> cot;
    for (std::size_t j = 0; j < m; ++j) cot.push_back(random_cmat(rng, d));
    auto f = [&](const std::vector<double>& x) {
      PovmLogits zz = z;
      zz.read_parameters(x);
      const Povm p = quantum_softmax(zz);
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += complex_linear(cot[j], p[j]);
      return s;
    };
    std::vector<double> x(z.parameter_count());
    z.write_parameters(x);
    softmax = std::max(softmax, relative_error(flatten_cotangents(quantum_softmax_vjp(z, cot).logits),
                                               finite_difference(f, x)));
  }
  for (int k = 0; k < 100; ++k) {
    const std::size_t d = 1 + rng.below(4);
    const DensityFactor f{random_cmat(rng, d)};
    const CMat g = random_cmat(rng, d);
    auto loss = [&](const std::vector<double>& x) {
      DensityFactor ff = f;
      ff.read_parameters(x);
      return complex_linear(g, density_from_factor(ff).matrix());
    };
    std::vector<double> x(f.parameter_count());
    f.write_parameters(x);
    density = std::max(density, relative_error(flatten_cotangents({density_from_factor_vjp(f, g)}),
                                               finite_difference(loss, x)));
  }
  for (int k = 0; k < 100; ++k) {
    const auto kind = k % 2 == 0 ? CoordinatorKind::Quantum : CoordinatorKind::SharedRandomness;
    RouterPolicy::Options o;
    o.hidden = 6;
    o.shared_advice = 3;
    o.policy_output_scale = 1.0;
    RouterPolicy p = RouterPolicy::make(kind, o, rng);
    for (double& v : p.shared_logits) v = rng.normal();
    const RouterPair obs{rng.exponential(1.0), rng.exponential(1.0)};
    const std::size_t a = p.advice_size();
    const std::array<std::size_t, 2> advice{rng.below(a), rng.below(a)};
    std::vector<double> x(p.parameter_count());
    p.write_parameters(x);
    const auto fd = finite_difference(
        [&](const std::vector<double>& v) {
          RouterPolicy q = p;
          q.read_parameters(v);
          return coordinator_prob(q, obs, advice).probability;
        },
        x);
    coord = std::max(coord, relative_error(coordinator_prob(p, obs, advice).gradient, fd));
  }
  for (int k = 0; k < 100; ++k) {
    std::vector<std::size_t> sizes{1 + rng.below(5)};
    const std::size_t layers = 1 + rng.below(3);
    for (std::size_t l = 0; l < layers; ++l) sizes.push_back(1 + rng.below(8));
    const Mlp net = Mlp::random(sizes, rng);
    std::vector<double> in(sizes.front()), cot(sizes.back());
    for (double& v : in) v = rng.normal();
    for (double& v : cot) v = rng.normal();
    auto loss = [&](const Mlp& n) {
      const auto y = n.forward(in);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += cot[i] * y[i];
      return s;
    };
    Mlp::Tape tape;
    net.forward(in, tape);
    std::vector<double> g(net.parameter_count(), 0.0);
    net.backward(tape, cot, g);
    const std::vector<double> p0(net.parameters().begin(), net.parameters().end());
    const auto fd = finite_difference(
        [&](const std::vector<double>& v) {
          Mlp n = net;
          std::copy(v.begin(), v.end(), n.parameters().begin());
          return loss(n);
        },
        p0);
    mlp = std::max(mlp, relative_error(g, fd));
  }
  const double worst = std::max({softmax, density, coord, mlp});
  const std::string d = fmt("worst relative error: softmax %.2e, density %.2e, coordinator %.2e, mlp %.2e", softmax,
                            density, coord, mlp);
  return worst <= 1e-4 ? pass(d) : fail(d);
}

// ---------------------------------------------------------------- 4, 5

Verdict classical_oracle() {
  const std::pair<const char*, double> expected[] = {
      {"chsh", 0.75}, {"ghz", 0.75}, {"rendezvous-tetra", 0.625}, {"rendezvous-cube", 0.3125}};
  std::string d;
  bool ok = true;
  for (const auto& [name, value] : expected) {
    const double v = classical_optimum(make_game(name)).value;
    ok = ok && std::abs(v - value) <= 1e-12;
    d += fmt("%s %.12g; ", name, v);
  }
  return ok ? pass(d) : fail(d);
}

Verdict analytic_chsh() {
  const NonlocalGame game = make_chsh();
  const EntangledPolicy policy = chsh_quantum_policy();
  const double win = exact_win_probability(game, AnyPolicy(policy));
  const double expect = std::pow(std::cos(std::numbers::pi / 8), 2);
  const JointPolicyTable table = tabulate(AnyPolicy(policy));
  const BellCertificate cert = membership(table);
  const bool outside = cert.verdict == BellCertificate::Verdict::Outside;
  const bool verified = verify_certificate(cert, table);
  const std::string d = fmt("win %.12f (error %.2e), verdict %s, violation %.6f, certificate %s", win,
                            std::abs(win - expect), outside ? "outside" : "inside", cert.violation,
                            verified ? "verified" : "NOT verified");
  return std::abs(win - expect) <= 1e-10 && outside && verified ? pass(d) : fail(d);
}

// ---------------------------------------------------------------- 6, 7, 8

Verdict entropy_learning() {
  const std::pair<const char*, double> bars[] = {
      {"chsh", 0.85}, {"ghz", 0.97}, {"rendezvous-tetra", 0.63}, {"rendezvous-cube", 0.315}};
  const auto seeds = seed_range(0, 10);
  bool ok = true;
  std::string d;
  for (const auto& [name, bar] : bars) {
    GameTrainConfig cfg = default_game_config(name);
    cfg.entropy_coef = 0.2;
    const GameRunReport r = run_game_seeds(name, RendezvousAnswers::EdgeIndex, cfg, seeds, workers());
    double worst = 1.0;
    for (const auto& run : r.runs) worst = std::min(worst, run.result.best_win);
    const bool game_ok = r.best_win() >= bar && worst > r.classical;
    ok = ok && game_ok;
    if (!d.empty()) d += "; ";
    d += fmt("%s best %.4f (bar %.3f) worst %.4f vs classical %.4f%s", name, r.best_win(), bar, worst, r.classical,
             game_ok ? "" : " FAILED");
  }
  return ok ? pass(d) : fail(d);
}

Verdict entropy_ablation() {
  GameTrainConfig cfg = default_game_config("chsh");
  cfg.entropy_coef = 0.0;
  std::string d;
  for (int batch = 0; batch < 2; ++batch) {
    const auto seeds = seed_range(static_cast<std::uint64_t>(10 * batch), 10);
    const GameRunReport r = run_game_seeds("chsh", RendezvousAnswers::EdgeIndex, cfg, seeds, workers());
    std::size_t stalled = 0;
    double worst = 1.0;
    for (const auto& run : r.runs) {
      worst = std::min(worst, run.result.best_win);
      if (!(run.result.best_win > 0.75 + 1e-3)) ++stalled;
    }
    d += fmt("batch %d (seeds %d-%d): %zu/10 stalled, worst %.4f; ", batch + 1, 10 * batch, 10 * batch + 9, stalled,
             worst);
    if (stalled > 0) return pass(d);
  }
  return {Verdict::Deviation, d + "no alpha=0 seed stalled in either batch; flagged as a deviation, not a failure"};
}

Verdict bell_certification() {
  const NonlocalGame game = make_chsh();
  std::vector<JointPolicyTable> learned;
  for (double alpha : {0.2, 0.0}) {
    GameTrainConfig cfg = default_game_config("chsh");
    cfg.entropy_coef = alpha;
    const auto r = run_game_seeds("chsh", RendezvousAnswers::EdgeIndex, cfg, seed_range(100, 6), workers());
    for (const auto& run : r.runs) learned.push_back(tabulate(AnyPolicy(run.result.best.materialize())));
  }
  std::size_t checked = 0, outside = 0;
  for (const auto& t : learned) {
    if (exact_win_probability(game, t) <= 0.76) continue;
    ++checked;
    const auto cert = membership(t);
    if (cert.verdict == BellCertificate::Verdict::Outside && verify_certificate(cert, t)) ++outside;
  }
  Rng rng(808);
  std::size_t inside = 0;
  const std::size_t random_count = 100;
  for (std::size_t k = 0; k < random_count; ++k) {
    const FiniteHistorySpace space{{2, 2}, {2, 2}};
    const std::size_t states = 2 + rng.below(5);
    std::vector<double> q(states);
    double s = 0.0;
    for (double& v : q) s += (v = rng.exponential(1.0));
    for (double& v : q) v /= s;
    std::vector<ConditionalTable> locals;
    for (int i = 0; i < 2; ++i) {
      std::vector<double> logits(states * 2 * 2);
      for (double& v : logits) v = 3.0 * rng.normal();
      locals.push_back(ConditionalTable::from_logits(states * 2, 2, logits));
    }
    const JointPolicyTable t = tabulate(AnyPolicy(SharedRandomnessPolicy{space, q, locals}));
    const auto cert = membership(t);
    if (cert.verdict == BellCertificate::Verdict::Inside && verify_certificate(cert, t)) ++inside;
  }
  const std::string d = fmt("%zu/%zu learned policies above 0.76 certified outside; %zu/%zu random shared-randomness "
                            "policies certified inside",
                            outside, checked, inside, random_count);
  return checked > 0 && outside == checked && inside == random_count ? pass(d) : fail(d);
}

// ---------------------------------------------------------------- 9, 10

ConditionalTable random_table(Rng& rng, std::size_t contexts, std::size_t outcomes) {
  std::vector<double> logits(contexts * outcomes);
  for (double& v : logits) v = 2.0 * rng.normal();
  return ConditionalTable::from_logits(contexts, outcomes, logits);
}

Verdict advice_collapse() {
  Rng rng(909);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + rng.below(2);
    FiniteHistorySpace space, advice_space;
    std::vector<std::size_t> advice, dims;
    for (std::size_t i = 0; i < n; ++i) {
      space.histories.push_back(1 + rng.below(3));
      space.actions.push_back(2 + rng.below(2));
      advice.push_back(2 + rng.below(3));
      dims.push_back(1 + rng.below(3));
    }
    advice_space.histories = space.histories;
    advice_space.actions = advice;
    std::vector<ConditionalTable> actors;
    for (std::size_t i = 0; i < n; ++i) actors.push_back(random_table(rng, advice[i] * space.histories[i], space.actions[i]));
    const CoordinatorAdvicePolicy p{space, advice, EntangledParameters::random(advice_space, dims, rng, 1.0).materialize(),
                                    actors};
    const EntangledPolicy c = collapse_advice(p);
    for (std::size_t h = 0; h < space.joint_histories(); ++h) {
      const auto lhs = joint_distribution(AnyPolicy(p), h), rhs = joint_distribution(AnyPolicy(c), h);
      for (std::size_t a = 0; a < lhs.size(); ++a) worst = std::max(worst, std::abs(lhs[a] - rhs[a]));
    }
  }
  const std::string d = fmt("100 instances, max distribution difference %.3g", worst);
  return worst <= 1e-12 ? pass(d) : fail(d);
}

Verdict non_signaling() {
  Rng rng(1010);
  double worst = 0.0;
  std::size_t bad = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + rng.below(2);
    FiniteHistorySpace space;
    std::vector<std::size_t> dims;
    for (std::size_t i = 0; i < n; ++i) {
      space.histories.push_back(2 + rng.below(2));
      space.actions.push_back(2 + rng.below(2));
      dims.push_back(2 + rng.below(n == 2 ? 2 : 1));
    }
    const auto r = check_non_signaling(AnyPolicy(EntangledParameters::random(space, dims, rng, 1.0).materialize()), 1e-9);
    worst = std::max(worst, r.worst_violation);
    if (!r.non_signaling) ++bad;
  }
  const std::string d = fmt("100 random entangled policies, worst marginal spread %.3g", worst);
  return bad == 0 ? pass(d) : fail(fmt("%zu signaling; ", bad) + d);
}

// ---------------------------------------------------------------- 11

class ThresholdPolicy final : public QueuePolicy {
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

Verdict queue_invariants() {
  const QueueParams params;
  Rng rng(1111);
  const std::size_t n = 100'000;
  const QueueTrajectory traj = rollout(ThresholdPolicy(), params, n, rng);

  // Telescoping: per server, rewards over an uninterrupted idle-or-busy interval sum to T(idle time),
  // tracked against an independent free-at clock. Sums are kept in long double.
  double tele = 0.0;
  std::size_t intervals = 0;
  for (int s = 0; s < 2; ++s) {
    long double now = 0.0L, free_at = 0.0L, acc = 0.0L;
    for (const auto& t : traj.steps) {
      const double load = t.outcome.loads[s];
      if (load > 0.0) {
        if (free_at <= now) {
          tele = std::max(tele, static_cast<double>(std::abs(acc - static_cast<long double>(params.throughput(
                                                                        static_cast<double>(now - free_at))))));
          acc = 0.0L;
          ++intervals;
        }
        free_at = std::max(free_at, now) + load;
      }
      acc += t.outcome.server_rewards[s];
      now += t.outcome.dt;
    }
    const double idle = static_cast<double>(std::max(0.0L, now - free_at));
    tele = std::max(tele, static_cast<double>(std::abs(acc - static_cast<long double>(params.throughput(idle)))));
  }

  QueueState state{0.0, 0.0};
  RouterPair obs = traj.steps.front().obs;
  bool replay = true;
  for (const auto& t : traj.steps) {
    replay = replay && state == t.state && obs == t.obs;
    const StepOutcome o = transition(params, state, t.decision.actions, obs, t.draws);
    replay = replay && o.next == t.outcome.next && o.reward == t.outcome.reward && o.wait == t.outcome.wait;
    state = o.next;
    obs = o.next_obs;
  }
  Rng again(1111);
  const QueueTrajectory second = rollout(ThresholdPolicy(), params, n, again);
  for (std::size_t k = 0; k < n && replay; ++k)
    replay = second.steps[k].outcome.next == traj.steps[k].outcome.next &&
             second.steps[k].outcome.reward == traj.steps[k].outcome.reward;

  const FixedQueuePolicy lopsided({0, 0});
  QueueParams p = params;
  p.lambda_rate = 0.3;
  Rng sym(1212);
  const std::size_t episodes = 1000, steps = 100;
  double m = 0.0, ss = 0.0;
  std::vector<double> diffs;
  for (std::size_t e = 0; e < episodes; ++e) {
    Rng er = sym.split(e);
    const QueueTrajectory tr = rollout(lopsided, p, steps, er);
    double dsum = 0.0;
    for (const auto& t : tr.steps) dsum += t.outcome.next[0] - t.outcome.next[1];
    diffs.push_back(dsum / steps);
    m += diffs.back();
  }
  m /= episodes;
  for (double v : diffs) ss += (v - m) * (v - m);
  const double se = std::sqrt(ss / (episodes - 1) / episodes);
  const bool symmetric = se > 0.0 && std::abs(m) <= 3.0 * se;

  const std::string d = fmt("telescoping max abs error %.3g over %zu intervals; replay %s; swap mean %.4f (3 sigma %.4f)",
                            tele, intervals, replay ? "exact" : "MISMATCH", m, 3 * se);
  return tele <= 1e-9 && replay && symmetric ? pass(d) : fail(d);
}

// ---------------------------------------------------------------- 12

struct RouterOutcome {
  QueueEvaluation eval;
  bool trained_feasible = false;
};

Verdict queue_gap(bool full) {
  MappoConfig cfg;
  cfg.queue.wait_limit = 5.5;
  cfg.queue.lambda_rate = 0.8;
  cfg.queue.mu_rate = 1.0;
  const double limit = cfg.queue.wait_limit;
  const std::size_t final_episodes = 20, final_steps = 20000;
  if (full) {
    ComparisonOptions opts;
    opts.limits = parse_sweep("5.5:9.0:0.25");
    opts.initial_runs = 3;
    opts.workers = workers();
    MappoConfig long_cfg = cfg;
    long_cfg.updates = 1000;
    const auto r = compare_coordinators(long_cfg, opts, {"acceptance_full_sweep", true});
    std::string d;
    for (std::size_t i = 0; i < r.quantum.size(); ++i)
      d += fmt("W=%.2f q(%.3f, %.3f) c(%.3f, %.3f); ", r.quantum[i].wait_limit, r.quantum[i].evaluation.throughput,
               r.quantum[i].evaluation.wait, r.classical[i].evaluation.throughput, r.classical[i].evaluation.wait);
    std::printf("full sweep written to acceptance_full_sweep/: %s\n", d.c_str());
  }
  const CoordinatorKind kinds[] = {CoordinatorKind::Quantum, CoordinatorKind::SharedRandomness};
  RouterOutcome out[2];
  parallel_for(2, workers(), [&](std::size_t k) {
    const QueueTrainResult r = train_queueing(cfg, kinds[k]);
    Rng rng = Rng(cfg.seed).split(1000);
    const RouterPolicyAdapter adapter(r.best);
    out[k] = {evaluate(adapter, cfg.queue, final_episodes, final_steps, rng), r.best_feasible};
  });
  const auto& q = out[0].eval;
  const auto& c = out[1].eval;
  const double z = 1.96;
  const bool q_ok = q.wait <= limit, c_ok = c.wait <= limit;
  // 95% intervals; overlapping intervals count as no difference.
  const bool wait_lower = q.wait + z * q.wait_stderr < c.wait - z * c.wait_stderr;
  const bool wait_not_higher = q.wait - z * q.wait_stderr <= c.wait + z * c.wait_stderr;
  const bool thr_higher = q.throughput - z * q.throughput_stderr > c.throughput + z * c.throughput_stderr;
  const bool thr_not_lower = q.throughput + z * q.throughput_stderr >= c.throughput - z * c.throughput_stderr;
  const bool dominates = (wait_lower && thr_not_lower) || (thr_higher && wait_not_higher);
  const std::string d =
      fmt("W=%.1f: quantum throughput %.4f+-%.4f wait %.4f+-%.4f%s; classical throughput %.4f+-%.4f wait %.4f+-%.4f%s; "
          "quantum %s",
          limit, q.throughput, z * q.throughput_stderr, q.wait, z * q.wait_stderr, q_ok ? "" : " (over limit)",
          c.throughput, z * c.throughput_stderr, c.wait, z * c.wait_stderr, c_ok ? "" : " (over limit)",
          dominates ? "dominates at 95%" : "does not separate from classical at 95%");
  return q_ok && c_ok && dominates ? pass(d) : fail(d);
}

struct Criterion {
  const char* name;
  double limit_seconds;  // 0: no runtime bound
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcoord acceptance checks"};
  int which = 0;
  bool full = false;
  app.add_option("--criterion", which, "Criterion number, 1-12")->required()->check(CLI::Range(1, 12));
  app.add_flag("--full", full, "Criterion 12: also run the multi-hour wait-limit sweep");
  CLI11_PARSE(app, argc, argv);

  const Criterion criteria[] = {
      {"POVM validity", 10, povm_validity},
      {"POVM recoverability", 10, povm_recovery},
      {"gradient correctness", 60, gradients},
      {"classical oracle", 60, classical_oracle},
      {"analytic CHSH strategy", 10, analytic_chsh},
      {"learning with entropy regularization", 0, entropy_learning},
      {"entropy ablation", 0, entropy_ablation},
      {"Bell certification of learned policies", 30, bell_certification},
      {"advice-collapse equivalence", 10, advice_collapse},
      {"non-signaling", 30, non_signaling},
      {"queueing environment invariants", 60, queue_invariants},
      {"queueing quantum-vs-classical gap (smoke)", full ? 0.0 : 900.0, [&] { return queue_gap(full); }},
  };
  const Criterion& c = criteria[which - 1];
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = c.run();
  } catch (const std::exception& e) {
    v = fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (v.kind != Verdict::Fail && c.limit_seconds > 0 && secs > c.limit_seconds) {
    v.kind = Verdict::Fail;
    v.detail += fmt(" runtime %.1f s exceeds %.0f s", secs, c.limit_seconds);
  }
  const char* label = v.kind == Verdict::Pass ? "PASS" : v.kind == Verdict::Deviation ? "DEVIATION" : "FAIL";
  std::printf("criterion %d (%s): %s [%.1f s] %s\n", which, c.name, label, secs, v.detail.c_str());
  return v.kind == Verdict::Fail ? 1 : 0;
}
