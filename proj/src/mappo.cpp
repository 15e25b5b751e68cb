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

#include "qcoord/mappo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "qcoord/error.hpp"
#include "qcoord/reinforce.hpp"

namespace qcoord {

// ---------------------------------------------------------------- Mlp

Mlp::Mlp(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  require(sizes_.size() >= 2, ErrorCode::InvalidArgument, "Mlp needs at least an input and an output layer");
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    require(sizes_[l] > 0 && sizes_[l + 1] > 0, ErrorCode::InvalidArgument, "Mlp layer sizes must be positive");
    n += sizes_[l + 1] * (sizes_[l] + 1);
  }
  params_.assign(n, 0.0);
}

Mlp Mlp::random(std::vector<std::size_t> sizes, Rng& rng, double output_scale) {
  Mlp net(std::move(sizes));
  std::size_t pos = 0;
  const std::size_t layers = net.sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = net.sizes_[l], out = net.sizes_[l + 1];
    const double scale = (l + 1 == layers ? output_scale : 1.0) / std::sqrt(static_cast<double>(in));
    for (std::size_t k = 0; k < in * out; ++k) net.params_[pos++] = scale * rng.normal();
    pos += out;  // zero bias
  }
  return net;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Tape tape;
  forward(input, tape);
  return std::move(tape.activations.back());
}

void Mlp::forward(std::span<const double> input, Tape& tape) const {
  require(input.size() == input_size(), ErrorCode::DimensionMismatch, "Mlp input size mismatch");
  const std::size_t layers = sizes_.size() - 1;
  tape.activations.resize(layers + 1);
  tape.activations[0].assign(input.begin(), input.end());
  const double* p = params_.data();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    const std::vector<double>& a = tape.activations[l];
    std::vector<double>& z = tape.activations[l + 1];
    z.resize(out);
    const double* b = p + in * out;
    for (std::size_t o = 0; o < out; ++o) {
      double s = b[o];
      const double* w = p + o * in;
      for (std::size_t i = 0; i < in; ++i) s += w[i] * a[i];
      z[o] = l + 1 < layers ? std::tanh(s) : s;
    }
    p += out * (in + 1);
  }
}

std::vector<double> Mlp::backward(const Tape& tape, std::span<const double> output_cotangent,
                                  std::span<double> grad) const {
  require(output_cotangent.size() == output_size(), ErrorCode::DimensionMismatch, "Mlp cotangent size mismatch");
  require(grad.size() == parameter_count(), ErrorCode::DimensionMismatch, "Mlp gradient size mismatch");
  const std::size_t layers = sizes_.size() - 1;
  std::vector<double> g(output_cotangent.begin(), output_cotangent.end());
  std::size_t end = params_.size();
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = sizes_[l], out = sizes_[l + 1];
    const std::size_t start = end - out * (in + 1);
    const double* w = params_.data() + start;
    double* gw = grad.data() + start;
    double* gb = gw + in * out;
    const std::vector<double>& a = tape.activations[l];
    std::vector<double> prev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double go = g[o];
      gb[o] += go;
      if (go == 0.0) continue;
      for (std::size_t i = 0; i < in; ++i) {
        gw[o * in + i] += go * a[i];
        prev[i] += go * w[o * in + i];
      }
    }
    if (l > 0)
      for (std::size_t i = 0; i < in; ++i) prev[i] *= 1.0 - a[i] * a[i];
    g = std::move(prev);
    end = start;
  }
  return g;
}

// ---------------------------------------------------------------- policy

const char* to_string(CoordinatorKind kind) {
  return kind == CoordinatorKind::Quantum ? "quantum" : "classical";
}

CoordinatorKind parse_coordinator_kind(const std::string& name) {
  if (name == "quantum") return CoordinatorKind::Quantum;
  if (name == "classical" || name == "shared-randomness") return CoordinatorKind::SharedRandomness;
  fail(ErrorCode::InvalidArgument, "unknown coordinator kind '" + name + "' (expected quantum or classical)");
}

std::array<double, 2> router_features(double x) { return {x, std::log1p(x)}; }

namespace {

constexpr std::size_t kLogitOutputs = 16;  // two 2x2 complex matrices
constexpr double kProbFloor = 1e-12;
constexpr double kLogRatioClamp = 20.0;

std::vector<double> softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) z += p[i] = std::exp(logits[i] - m);
  for (double& v : p) v /= z;
  return p;
}

/// dL/dlogit_j = p_j (c_j - sum_k p_k c_k).
void softmax_backward(std::span<const double> p, std::span<const double> cot, std::span<double> out) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += p[k] * cot[k];
  for (std::size_t j = 0; j < p.size(); ++j) out[j] = p[j] * (cot[j] - s);
}

std::vector<double> actor_input(std::size_t advice_size, std::size_t advice, double x) {
  std::vector<double> in(advice_size + 2, 0.0);
  in[advice] = 1.0;
  const auto f = router_features(x);
  in[advice_size] = f[0];
  in[advice_size + 1] = f[1];
  return in;
}

double safe_log(double p) { return std::log(std::max(p, kProbFloor)); }

double slog(double v) { return std::copysign(std::log1p(std::abs(v)), v); }

}  // namespace

RouterPolicy RouterPolicy::make(CoordinatorKind kind, const Options& options, Rng& rng) {
  require(options.hidden > 0, ErrorCode::InvalidArgument, "hidden width must be positive");
  RouterPolicy p;
  p.kind = kind;
  const std::size_t h = options.hidden;
  if (kind == CoordinatorKind::Quantum) {
    p.rho = DensityMatrix::bell();
    for (auto& net : p.coordinator_nets) net = Mlp::random({2, h, h, kLogitOutputs}, rng, options.policy_output_scale);
    p.learned_actors = options.learned_actors;
  } else {
    require(options.shared_advice >= 2, ErrorCode::InvalidArgument, "shared advice alphabet needs at least 2 symbols");
    p.shared_logits.assign(options.shared_advice, 0.0);
    p.learned_actors = true;
  }
  if (p.learned_actors)
    for (auto& net : p.actors) net = Mlp::random({p.advice_size() + 2, h, h, 2}, rng, options.policy_output_scale);
  return p;
}

std::size_t RouterPolicy::advice_size() const { return kind == CoordinatorKind::Quantum ? 2 : shared_logits.size(); }

std::size_t RouterPolicy::coordinator_parameter_count() const {
  std::size_t n = shared_logits.size();
  if (kind == CoordinatorKind::Quantum)
    for (const auto& net : coordinator_nets) n += net.parameter_count();
  return n;
}

std::size_t RouterPolicy::parameter_count() const {
  std::size_t n = coordinator_parameter_count();
  if (learned_actors)
    for (const auto& net : actors) n += net.parameter_count();
  return n;
}

void RouterPolicy::write_parameters(std::span<double> out) const {
  require(out.size() == parameter_count(), ErrorCode::DimensionMismatch, "RouterPolicy parameter size mismatch");
  std::size_t pos = 0;
  auto put = [&](std::span<const double> v) {
    std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(pos));
    pos += v.size();
  };
  if (kind == CoordinatorKind::Quantum)
    for (const auto& net : coordinator_nets) put(net.parameters());
  put(shared_logits);
  if (learned_actors)
    for (const auto& net : actors) put(net.parameters());
}

void RouterPolicy::read_parameters(std::span<const double> in) {
  require(in.size() == parameter_count(), ErrorCode::DimensionMismatch, "RouterPolicy parameter size mismatch");
  std::size_t pos = 0;
  auto get = [&](std::span<double> v) {
    std::copy(in.begin() + static_cast<std::ptrdiff_t>(pos), in.begin() + static_cast<std::ptrdiff_t>(pos + v.size()),
              v.begin());
    pos += v.size();
  };
  if (kind == CoordinatorKind::Quantum)
    for (auto& net : coordinator_nets) get(net.parameters());
  get(shared_logits);
  if (learned_actors)
    for (auto& net : actors) get(net.parameters());
}

void RouterPolicy::validate() const {
  if (kind == CoordinatorKind::Quantum) {
    require(rho.dim() == 4, ErrorCode::InvalidArgument, "quantum coordinator needs a two-qubit state");
    require(shared_logits.empty(), ErrorCode::InvalidArgument, "quantum coordinator has no shared logits");
    for (const auto& net : coordinator_nets)
      require(net.sizes().size() >= 2 && net.input_size() == 2 && net.output_size() == kLogitOutputs,
              ErrorCode::InvalidArgument, "coordinator network must map 2 features to 16 logits");
  } else {
    require(shared_logits.size() >= 2, ErrorCode::InvalidArgument, "shared advice alphabet needs at least 2 symbols");
    require(learned_actors, ErrorCode::InvalidArgument, "shared-randomness coordinator needs learned actors");
  }
  if (learned_actors)
    for (const auto& net : actors)
      require(net.sizes().size() >= 2 && net.input_size() == advice_size() + 2 && net.output_size() == 2,
              ErrorCode::InvalidArgument, "actor network shape does not match the advice alphabet");
  std::vector<double> flat(parameter_count());
  write_parameters(flat);
  for (double v : flat) require(std::isfinite(v), ErrorCode::InvalidArgument, "policy has non-finite parameters");
}

CoordinatorForward coordinator_forward(const RouterPolicy& policy, const RouterPair& obs) {
  CoordinatorForward fwd;
  if (policy.kind == CoordinatorKind::SharedRandomness) {
    const std::size_t k = policy.shared_logits.size();
    const std::vector<double> q = softmax(policy.shared_logits);
    fwd.probs.assign(k * k, 0.0);
    for (std::size_t x = 0; x < k; ++x) fwd.probs[x * k + x] = q[x];
    return fwd;
  }
  std::array<const Povm*, 2> ptrs{};
  for (std::size_t i = 0; i < 2; ++i) {
    const auto f = router_features(obs[i]);
    policy.coordinator_nets[i].forward(f, fwd.tapes[i]);
    PovmLogits z = PovmLogits::zeros(2, 2);
    z.read_parameters(fwd.tapes[i].output());
    fwd.softmax[i] = quantum_softmax_forward(z);
    fwd.conditioning += conditioning_penalty(fwd.softmax[i].s);
    ptrs[i] = &fwd.softmax[i].povm;
  }
  fwd.probs = born_joint(policy.rho, std::span<const Povm* const>(ptrs)).probabilities;
  return fwd;
}

void coordinator_backward(const RouterPolicy& policy, const CoordinatorForward& fwd,
                          std::span<const double> prob_cotangents, double conditioning_coef, std::span<double> grad) {
  require(prob_cotangents.size() == fwd.probs.size(), ErrorCode::DimensionMismatch, "advice cotangent size mismatch");
  require(grad.size() == policy.parameter_count(), ErrorCode::DimensionMismatch, "policy gradient size mismatch");
  if (policy.kind == CoordinatorKind::SharedRandomness) {
    const std::size_t k = policy.shared_logits.size();
    std::vector<double> q(k), cot(k);
    for (std::size_t x = 0; x < k; ++x) {
      q[x] = fwd.probs[x * k + x];
      cot[x] = prob_cotangents[x * k + x];
    }
    std::vector<double> g(k);
    softmax_backward(q, cot, g);
    for (std::size_t x = 0; x < k; ++x) grad[x] += g[x];
    return;
  }
  const std::array<const Povm*, 2> ptrs{&fwd.softmax[0].povm, &fwd.softmax[1].povm};
  const BornCotangents bc = born_joint_vjp(policy.rho, std::span<const Povm* const>(ptrs), prob_cotangents);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    std::optional<CMat> s_cot;
    if (conditioning_coef != 0.0) s_cot = conditioning_penalty_grad(fwd.softmax[i].s) * cplx(conditioning_coef);
    const PovmLogits zc = quantum_softmax_vjp(fwd.softmax[i], bc.elements[i], s_cot);
    std::array<double, kLogitOutputs> out_cot{};
    zc.write_parameters(out_cot);
    const Mlp& net = policy.coordinator_nets[i];
    net.backward(fwd.tapes[i], out_cot, grad.subspan(offset, net.parameter_count()));
    offset += net.parameter_count();
  }
}

CoordinatorProbability coordinator_prob(const RouterPolicy& policy, const RouterPair& obs,
                                        const std::array<std::size_t, 2>& advice) {
  const std::size_t a = policy.advice_size();
  require(advice[0] < a && advice[1] < a, ErrorCode::InvalidArgument, "advice index out of range");
  const CoordinatorForward fwd = coordinator_forward(policy, obs);
  const std::size_t k = advice[0] * a + advice[1];
  CoordinatorProbability out;
  out.probability = fwd.probs[k];
  out.gradient.assign(policy.parameter_count(), 0.0);
  std::vector<double> cot(fwd.probs.size(), 0.0);
  cot[k] = 1.0;
  coordinator_backward(policy, fwd, cot, 0.0, out.gradient);
  return out;
}

std::vector<double> RouterPolicy::coordinator_distribution(const RouterPair& obs) const {
  return coordinator_forward(*this, obs).probs;
}

std::array<double, 2> RouterPolicy::actor_distribution(std::size_t agent, std::size_t advice, double x) const {
  require(agent < 2 && advice < advice_size(), ErrorCode::InvalidArgument, "actor index out of range");
  if (actors_trivial()) return advice == 0 ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
  const std::vector<double> p = softmax(actors[agent].forward(actor_input(advice_size(), advice, x)));
  return {p[0], p[1]};
}

std::array<double, 4> RouterPolicy::joint_distribution(const RouterPair& obs) const {
  const std::size_t a = advice_size();
  const std::vector<double> q = coordinator_distribution(obs);
  std::vector<std::array<double, 2>> pi0(a), pi1(a);
  for (std::size_t x = 0; x < a; ++x) {
    pi0[x] = actor_distribution(0, x, obs[0]);
    pi1[x] = actor_distribution(1, x, obs[1]);
  }
  std::array<double, 4> out{};
  for (std::size_t x0 = 0; x0 < a; ++x0)
    for (std::size_t x1 = 0; x1 < a; ++x1) {
      const double w = q[x0 * a + x1];
      if (w == 0.0) continue;
      for (std::size_t a0 = 0; a0 < 2; ++a0)
        for (std::size_t a1 = 0; a1 < 2; ++a1) out[a0 * 2 + a1] += w * pi0[x0][a0] * pi1[x1][a1];
    }
  return out;
}

namespace {

/// Draws advice and actions, recording the per-term log probabilities.
/// Returns log pi(a|x) when `joint_log_prob` is set, else 0.
double sample_decision(const RouterPolicy& policy, const RouterPair& obs, Rng& rng, MappoSample& s,
                       bool joint_log_prob = false) {
  const std::size_t a = policy.advice_size();
  const std::vector<double> q = policy.coordinator_distribution(obs);
  const std::size_t k = rng.categorical(q);
  s.advice = {k / a, k % a};
  s.old_log_q = safe_log(q[k]);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto pi = policy.actor_distribution(i, s.advice[i], obs[i]);
    const int act = policy.actors_trivial() ? static_cast<int>(s.advice[i]) : (rng.bernoulli(pi[1]) ? 1 : 0);
    s.actions[i] = act;
    s.old_log_pi[i] = safe_log(pi[static_cast<std::size_t>(act)]);
  }
  if (!joint_log_prob) return 0.0;
  if (policy.actors_trivial()) return s.old_log_q;
  // pi(a|x) = sum_x q(x) pi_1(a_1|x_1) pi_2(a_2|x_2)
  std::vector<double> m0(a), m1(a);
  for (std::size_t x = 0; x < a; ++x) {
    m0[x] = policy.actor_distribution(0, x, obs[0])[static_cast<std::size_t>(s.actions[0])];
    m1[x] = policy.actor_distribution(1, x, obs[1])[static_cast<std::size_t>(s.actions[1])];
  }
  double p = 0.0;
  for (std::size_t x0 = 0; x0 < a; ++x0)
    for (std::size_t x1 = 0; x1 < a; ++x1) p += q[x0 * a + x1] * m0[x0] * m1[x1];
  return safe_log(p);
}

}  // namespace

QueueDecision RouterPolicyAdapter::act(const RouterPair& obs, Rng& rng) const {
  MappoSample s;
  QueueDecision d;
  d.log_prob = sample_decision(policy_, obs, rng, s, true);
  d.actions = s.actions;
  d.advice = {static_cast<int>(s.advice[0]), static_cast<int>(s.advice[1])};
  return d;
}

// ---------------------------------------------------------------- critics

Critic Critic::make(std::size_t hidden, Rng& rng) { return Critic{Mlp::random({4, hidden, hidden, 1}, rng, 1.0)}; }

std::array<double, 4> Critic::features(const QueueState& state, const RouterPair& obs) {
  return {slog(state[0]), slog(state[1]), slog(obs[0]), slog(obs[1])};
}

double Critic::value(const QueueState& state, const RouterPair& obs) const {
  return net.forward(features(state, obs))[0];
}

void RunningScale::update(std::span<const double> values) {
  for (double v : values) {
    count += 1.0;
    const double d = v - mean;
    mean += d / count;
    m2 += d * (v - mean);
  }
}

double RunningScale::stddev() const {
  if (count < 2.0) return 1.0;
  return std::max(std::sqrt(m2 / count), 1e-6);
}

// ---------------------------------------------------------------- GAE and PID

GaeResult gae_advantages(std::span<const double> rewards, std::span<const double> values,
                         std::span<const double> next_values, std::span<const std::uint8_t> segment_end, double gamma,
                         double lambda) {
  const std::size_t n = rewards.size();
  require(values.size() == n && next_values.size() == n && segment_end.size() == n, ErrorCode::DimensionMismatch,
          "GAE series must be aligned");
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    if (segment_end[t]) running = 0.0;
    const double delta = rewards[t] + gamma * next_values[t] - values[t];
    running = delta + gamma * lambda * running;
    out.advantages[t] = running;
    out.returns[t] = running + values[t];
  }
  return out;
}

void normalize_advantages(std::vector<double>& values) {
  if (values.empty()) return;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  for (double& v : values) v = sd > 1e-12 ? (v - mean) / sd : 0.0;
}

LagrangeState pid_update(const LagrangeState& state, double measured, double limit, const PidGains& gains) {
  LagrangeState next = state;
  const double error = measured - limit;
  const double previous = state.started ? state.previous_error : error;
  next.integral = std::clamp(state.integral + error, 0.0, gains.integral_bound);
  const double derivative = std::max(0.0, error - previous);
  next.multiplier = std::max(0.0, gains.kp * error + gains.ki * next.integral + gains.kd * derivative);
  next.previous_error = error;
  next.started = true;
  return next;
}

void MappoConfig::validate() const {
  require(clip_eps > 0.0 && clip_eps < 1.0, ErrorCode::InvalidArgument, "clip epsilon must lie in (0, 1)");
  require(gamma >= 0.0 && gamma < 1.0, ErrorCode::InvalidArgument, "gamma must lie in [0, 1)");
  require(gae_lambda >= 0.0 && gae_lambda <= 1.0, ErrorCode::InvalidArgument, "GAE lambda must lie in [0, 1]");
  require(epochs > 0 && minibatch > 0 && rollout_length > 0 && envs > 0, ErrorCode::InvalidArgument,
          "epochs, minibatch, rollout length and env count must be positive");
  require(actor_lr > 0.0 && coordinator_lr > 0.0 && shared_logit_lr > 0.0 && critic_lr > 0.0,
          ErrorCode::InvalidArgument, "learning rates must be positive");
  require(max_grad_norm > 0.0, ErrorCode::InvalidArgument, "gradient norm bound must be positive");
  require(entropy_coef >= 0.0 && conditioning_coef >= 0.0, ErrorCode::InvalidArgument,
          "regularization coefficients must be non-negative");
  require(pid.kp >= 0.0 && pid.ki >= 0.0 && pid.kd >= 0.0 && pid.integral_bound >= 0.0, ErrorCode::InvalidArgument,
          "PID gains must be non-negative");
  require(eval_interval > 0 && eval_episodes > 0 && eval_steps > 0, ErrorCode::InvalidArgument,
          "evaluation sizes must be positive");
  require(std::isfinite(feasibility_z) && feasibility_z >= 0.0, ErrorCode::InvalidArgument,
          "feasibility margin must be non-negative");
  require(hidden > 0 && shared_advice >= 2, ErrorCode::InvalidArgument, "network width or advice alphabet too small");
  queue.validate();
}

// ---------------------------------------------------------------- surrogate

namespace {

struct RatioGrad {
  double loss = 0.0;
  double dloss_dratio = 0.0;
  bool clipped = false;
};

/// s * (-min(rA, clip(r)A) + lagrange * max(rC, clip(r)C)), s = 1 / (1 + lagrange).
RatioGrad ratio_term(double r, double adv, double cost_adv, double eps, double lagrange) {
  const double rc = std::clamp(r, 1.0 - eps, 1.0 + eps);
  const double s = 1.0 / (1.0 + lagrange);
  RatioGrad out;
  const double u1 = r * adv, u2 = rc * adv;
  const double c1 = r * cost_adv, c2 = rc * cost_adv;
  out.loss = s * (-std::min(u1, u2) + lagrange * std::max(c1, c2));
  out.dloss_dratio = s * (-(u1 <= u2 ? adv : 0.0) + lagrange * (c1 >= c2 ? cost_adv : 0.0));
  out.clipped = std::abs(r - 1.0) > eps;
  return out;
}

struct Ratio {
  double value = 1.0;
  bool saturated = false;
};

Ratio ratio_from(double p, double old_log) {
  const double lr = safe_log(p) - old_log;
  if (lr > kLogRatioClamp) return {std::exp(kLogRatioClamp), true};
  if (lr < -kLogRatioClamp) return {std::exp(-kLogRatioClamp), true};
  return {std::exp(lr), false};
}

double entropy_of(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

}  // namespace

MappoLoss mappo_surrogate(const RouterPolicy& policy, const Critic& value, const Critic& cost,
                          std::span<const MappoSample> batch, const SurrogateWeights& weights,
                          MappoGradients* grads) {
  require(!batch.empty(), ErrorCode::InvalidArgument, "empty surrogate batch");
  const std::size_t a = policy.advice_size();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  if (grads) {
    grads->policy.assign(policy.parameter_count(), 0.0);
    grads->value.assign(value.net.parameter_count(), 0.0);
    grads->cost.assign(cost.net.parameter_count(), 0.0);
  }
  const std::size_t actor_offset = policy.coordinator_parameter_count();
  MappoLoss loss;
  std::size_t ratios = 0, clipped = 0;
  Mlp::Tape tape;
  std::vector<double> cot(a * a);

  for (const MappoSample& s : batch) {
    // coordinator
    const CoordinatorForward fwd = coordinator_forward(policy, s.obs);
    const std::size_t k = s.advice[0] * a + s.advice[1];
    const Ratio rq = ratio_from(fwd.probs[k], s.old_log_q);
    const RatioGrad tq = ratio_term(rq.value, s.advantage, s.cost_advantage, weights.clip_eps, weights.lagrange);
    loss.policy += tq.loss * inv_n;
    loss.entropy += entropy_of(fwd.probs) * inv_n;
    loss.conditioning += fwd.conditioning * inv_n;
    ++ratios;
    clipped += tq.clipped;
    if (grads) {
      std::fill(cot.begin(), cot.end(), 0.0);
      if (!rq.saturated) cot[k] += tq.dloss_dratio * rq.value / std::max(fwd.probs[k], kProbFloor) * inv_n;
      if (weights.entropy != 0.0)
        for (std::size_t j = 0; j < cot.size(); ++j)
          if (fwd.probs[j] > 0.0) cot[j] += weights.entropy * (safe_log(fwd.probs[j]) + 1.0) * inv_n;
      coordinator_backward(policy, fwd, cot, weights.conditioning * inv_n, grads->policy);
    }

    // actors
    std::size_t offset = actor_offset;
    for (std::size_t i = 0; i < 2; ++i) {
      if (policy.actors_trivial()) {
        loss.policy += ratio_term(1.0, s.advantage, s.cost_advantage, weights.clip_eps, weights.lagrange).loss * inv_n;
        continue;
      }
      const Mlp& net = policy.actors[i];
      net.forward(actor_input(a, s.advice[i], s.obs[i]), tape);
      const std::vector<double> pi = softmax(tape.output());
      const std::size_t act = static_cast<std::size_t>(s.actions[i]);
      const Ratio r = ratio_from(pi[act], s.old_log_pi[i]);
      const RatioGrad t = ratio_term(r.value, s.advantage, s.cost_advantage, weights.clip_eps, weights.lagrange);
      loss.policy += t.loss * inv_n;
      loss.entropy += entropy_of(pi) * inv_n;
      ++ratios;
      clipped += t.clipped;
      if (grads) {
        std::array<double, 2> pc{};
        if (!r.saturated) pc[act] += t.dloss_dratio * r.value / std::max(pi[act], kProbFloor) * inv_n;
        if (weights.entropy != 0.0)
          for (std::size_t j = 0; j < 2; ++j)
            if (pi[j] > 0.0) pc[j] += weights.entropy * (safe_log(pi[j]) + 1.0) * inv_n;
        std::array<double, 2> lc{};
        softmax_backward(pi, pc, lc);
        net.backward(tape, lc, std::span<double>(grads->policy).subspan(offset, net.parameter_count()));
      }
      offset += net.parameter_count();
    }

    // critics
    const auto feat = Critic::features(s.state, s.obs);
    value.net.forward(feat, tape);
    const double dv = tape.output()[0] - s.return_target;
    loss.value += 0.5 * dv * dv * inv_n;
    if (grads) {
      const double g = dv * inv_n;
      value.net.backward(tape, std::span<const double>(&g, 1), grads->value);
    }
    cost.net.forward(feat, tape);
    const double dc = tape.output()[0] - s.cost_target;
    loss.cost_value += 0.5 * dc * dc * inv_n;
    if (grads) {
      const double g = dc * inv_n;
      cost.net.backward(tape, std::span<const double>(&g, 1), grads->cost);
    }
  }
  loss.clip_fraction = ratios ? static_cast<double>(clipped) / static_cast<double>(ratios) : 0.0;
  loss.total = loss.policy - weights.entropy * loss.entropy + weights.conditioning * loss.conditioning + loss.value +
               loss.cost_value;
  return loss;
}

// ---------------------------------------------------------------- training

namespace {

double clip_norm(std::vector<double>& g, double bound) {
  double ss = 0.0;
  for (double v : g) ss += v * v;
  const double norm = std::sqrt(ss);
  if (norm > bound)
    for (double& v : g) v *= bound / norm;
  return norm;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double wait_divisor(const QueueParams& p) { return p.wait_normalization == WaitNormalization::PerRequest ? 2.0 : 1.0; }

/// Adam over the policy's blocks, each with its own learning rate.
class PolicyOptimizer {
 public:
  PolicyOptimizer(const RouterPolicy& p, const MappoConfig& cfg) {
    std::size_t offset = 0;
    if (p.kind == CoordinatorKind::Quantum) {
      const std::size_t n = p.coordinator_parameter_count();
      add(offset, n, cfg.coordinator_lr);
      offset += n;
    } else {
      add(offset, p.shared_logits.size(), cfg.shared_logit_lr);
      offset += p.shared_logits.size();
    }
    const std::size_t actors = p.parameter_count() - offset;
    if (actors) add(offset, actors, cfg.actor_lr);
  }

  void step(std::span<double> params, std::span<const double> grad) {
    for (auto& b : blocks_) b.adam.step(params.subspan(b.offset, b.size), grad.subspan(b.offset, b.size));
  }

 private:
  struct Block {
    std::size_t offset, size;
    Adam adam;
  };
  void add(std::size_t offset, std::size_t size, double lr) {
    if (size) blocks_.push_back(Block{offset, size, Adam(size, lr)});
  }
  std::vector<Block> blocks_;
};

struct EnvSlot {
  Rng rng{0};
  QueueState state{};
  RouterPair obs{};
  std::size_t t = 0;
};

}  // namespace

QueueTrainResult train_queueing(const MappoConfig& cfg, CoordinatorKind kind, QueueWarmStart warm,
                                const QueueProgress& progress) {
  cfg.validate();
  const Rng master(cfg.seed);
  Rng init_rng = master.split(0);
  Rng shuffle_rng = master.split(3);

  QueueTrainResult res;
  RouterPolicy policy;
  if (warm.previous) {
    require(warm.previous->best.kind == kind, ErrorCode::InvalidArgument, "warm start has a different coordinator kind");
    policy = warm.previous->best;
    res.value = warm.previous->value;
    res.cost = warm.previous->cost;
    res.value_scale = warm.previous->value_scale;
    res.cost_scale = warm.previous->cost_scale;
    res.lagrange = warm.previous->lagrange;
  } else {
    RouterPolicy::Options opt;
    opt.hidden = cfg.hidden;
    opt.shared_advice = cfg.shared_advice;
    opt.learned_actors = cfg.learned_actors;
    policy = RouterPolicy::make(kind, opt, init_rng);
    res.value = Critic::make(cfg.hidden, init_rng);
    res.cost = Critic::make(cfg.hidden, init_rng);
  }
  policy.validate();

  PolicyOptimizer popt(policy, cfg);
  Adam vopt(res.value.net.parameter_count(), cfg.critic_lr);
  Adam copt(res.cost.net.parameter_count(), cfg.critic_lr);
  std::vector<double> theta(policy.parameter_count());
  policy.write_parameters(theta);

  std::vector<EnvSlot> envs(cfg.envs);
  const Rng env_root = master.split(1);
  for (std::size_t e = 0; e < cfg.envs; ++e) {
    envs[e].rng = env_root.split(e);
    const ResetResult r = reset(cfg.queue, envs[e].rng);
    envs[e].state = r.state;
    envs[e].obs = r.obs;
  }

  const std::size_t n = cfg.envs * cfg.rollout_length;
  std::vector<MappoSample> batch(n);
  std::vector<double> rewards(n), costs(n), values(n), next_values(n), cvalues(n), next_cvalues(n);
  std::vector<std::uint8_t> ends(n);
  std::vector<std::size_t> order(n);
  double best_score = 0.0;

  auto run_eval = [&](std::size_t update) {
    Rng eval_rng = master.split(2).split(update);
    const RouterPolicyAdapter adapter(policy);
    const QueueEvaluation ev = evaluate(adapter, cfg.queue, cfg.eval_episodes, cfg.eval_steps, eval_rng);
    QueueEvalRecord rec{update, ev.throughput, ev.throughput_stderr, ev.wait, ev.wait_stderr, res.lagrange.multiplier};
    res.curve.push_back(rec);
    const bool feasible = ev.wait + cfg.feasibility_z * ev.wait_stderr <= cfg.queue.wait_limit;
    const double score = feasible ? ev.throughput : -ev.wait;
    if (!res.best_record || (feasible && !res.best_feasible) || (feasible == res.best_feasible && score > best_score)) {
      res.best_record = res.curve.size() - 1;
      res.best_feasible = feasible;
      best_score = score;
      res.best = policy;
    }
    if (progress) progress(rec);
  };

  for (std::size_t update = 0; update < cfg.updates; ++update) {
    // rollout
    double total_wait = 0.0;
    for (std::size_t e = 0; e < cfg.envs; ++e) {
      EnvSlot& env = envs[e];
      for (std::size_t t = 0; t < cfg.rollout_length; ++t) {
        const std::size_t i = e * cfg.rollout_length + t;
        MappoSample& s = batch[i];
        s = MappoSample{};
        s.state = env.state;
        s.obs = env.obs;
        sample_decision(policy, env.obs, env.rng, s);
        const StepOutcome o = step(cfg.queue, env.state, s.actions, env.obs, env.rng);
        s.reward = o.reward;
        s.cost = o.wait;
        rewards[i] = o.reward;
        costs[i] = o.wait;
        total_wait += o.wait;
        values[i] = res.value_scale.denormalize(res.value.value(env.state, env.obs));
        cvalues[i] = res.cost_scale.denormalize(res.cost.value(env.state, env.obs));
        next_values[i] = res.value_scale.denormalize(res.value.value(o.next, o.next_obs));
        next_cvalues[i] = res.cost_scale.denormalize(res.cost.value(o.next, o.next_obs));
        ++env.t;
        const bool episode_over = env.t >= cfg.queue.horizon;
        ends[i] = episode_over || t + 1 == cfg.rollout_length;
        if (episode_over) {
          const ResetResult r = reset(cfg.queue, env.rng);
          env.state = r.state;
          env.obs = r.obs;
          env.t = 0;
        } else {
          env.state = o.next;
          env.obs = o.next_obs;
        }
      }
    }

    const double measured = total_wait / (wait_divisor(cfg.queue) * static_cast<double>(n));
    res.lagrange = pid_update(res.lagrange, measured, cfg.queue.wait_limit, cfg.pid);

    GaeResult rg = gae_advantages(rewards, values, next_values, ends, cfg.gamma, cfg.gae_lambda);
    GaeResult cg = gae_advantages(costs, cvalues, next_cvalues, ends, cfg.gamma, cfg.gae_lambda);
    res.value_scale.update(rg.returns);
    res.cost_scale.update(cg.returns);
    normalize_advantages(rg.advantages);
    normalize_advantages(cg.advantages);
    for (std::size_t i = 0; i < n; ++i) {
      batch[i].advantage = rg.advantages[i];
      batch[i].cost_advantage = cg.advantages[i];
      batch[i].return_target = res.value_scale.normalize(rg.returns[i]);
      batch[i].cost_target = res.cost_scale.normalize(cg.returns[i]);
    }

    // update
    const SurrogateWeights w{cfg.clip_eps, res.lagrange.multiplier, cfg.entropy_coef, cfg.conditioning_coef};
    std::vector<MappoSample> mb;
    MappoGradients g;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);
      for (std::size_t start = 0; start < n; start += cfg.minibatch) {
        const std::size_t end = std::min(n, start + cfg.minibatch);
        mb.clear();
        for (std::size_t i = start; i < end; ++i) mb.push_back(batch[order[i]]);
        const MappoLoss l = mappo_surrogate(policy, res.value, res.cost, mb, w, &g);
        if (!std::isfinite(l.total) || !all_finite(g.policy) || !all_finite(g.value) || !all_finite(g.cost))
          fail(ErrorCode::Divergence, "non-finite MAPPO loss or gradient at update " + std::to_string(update));
        clip_norm(g.policy, cfg.max_grad_norm);
        clip_norm(g.value, cfg.max_grad_norm);
        clip_norm(g.cost, cfg.max_grad_norm);
        popt.step(theta, g.policy);
        policy.read_parameters(theta);
        vopt.step(res.value.net.parameters(), g.value);
        copt.step(res.cost.net.parameters(), g.cost);
      }
    }

    if ((update + 1) % cfg.eval_interval == 0 || update + 1 == cfg.updates) run_eval(update + 1);
  }
  if (res.curve.empty()) run_eval(0);
  res.last = policy;
  return res;
}

std::vector<SweepPoint> sweep_queueing(const MappoConfig& cfg, CoordinatorKind kind, std::span<const double> limits,
                                       std::size_t initial_runs, std::size_t eval_episodes, std::size_t eval_steps,
                                       const QueueProgress& progress) {
  require(!limits.empty(), ErrorCode::InvalidArgument, "sweep needs at least one wait limit");
  require(initial_runs > 0, ErrorCode::InvalidArgument, "sweep needs at least one initial run");
  std::vector<SweepPoint> points;
  QueueTrainResult current;
  auto evaluate_point = [&](const QueueTrainResult& r, double limit, std::size_t index) {
    MappoConfig c = cfg;
    c.queue.wait_limit = limit;
    Rng rng = Rng(cfg.seed).split(1000 + index);
    const RouterPolicyAdapter adapter(r.best);
    points.push_back(SweepPoint{limit, evaluate(adapter, c.queue, eval_episodes, eval_steps, rng), r.best, r.curve});
  };

  MappoConfig c = cfg;
  c.queue.wait_limit = limits[0];
  bool have = false;
  double best_score = 0.0;
  bool best_feasible = false;
  for (std::size_t run = 0; run < initial_runs; ++run) {
    c.seed = cfg.seed + run;
    QueueTrainResult r = train_queueing(c, kind, {}, progress);
    const QueueEvalRecord& rec = r.curve[*r.best_record];
    const double score = r.best_feasible ? rec.throughput : -rec.wait;
    if (!have || (r.best_feasible && !best_feasible) || (r.best_feasible == best_feasible && score > best_score)) {
      have = true;
      best_feasible = r.best_feasible;
      best_score = score;
      current = std::move(r);
    }
  }
  evaluate_point(current, limits[0], 0);
  for (std::size_t i = 1; i < limits.size(); ++i) {
    c.queue.wait_limit = limits[i];
    c.seed = cfg.seed + initial_runs + i;
    QueueTrainResult r = train_queueing(c, kind, QueueWarmStart{&current}, progress);
    current = std::move(r);
    evaluate_point(current, limits[i], i);
  }
  return points;
}

void write_sweep_csv(std::span<const SweepPoint> points, std::ostream& out) {
  out << "wait_limit,throughput,mean_wait,stderr_throughput,stderr_wait\n";
  const auto old = out.precision(17);
  for (const auto& p : points)
    out << p.wait_limit << ',' << p.evaluation.throughput << ',' << p.evaluation.wait << ','
        << p.evaluation.throughput_stderr << ',' << p.evaluation.wait_stderr << '\n';
  out.precision(old);
}

}  // namespace qcoord
