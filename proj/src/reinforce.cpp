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

#include "qcoord/reinforce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "qcoord/error.hpp"

namespace qcoord {

void GameTrainConfig::validate() const {
  require(batch_size >= 1, ErrorCode::InvalidArgument, "batch_size must be at least 1");
  require(steps >= 1, ErrorCode::InvalidArgument, "steps must be at least 1");
  require(entropy_coef >= 0.0, ErrorCode::InvalidArgument, "entropy_coef must be non-negative");
  require(conditioning_coef >= 0.0, ErrorCode::InvalidArgument, "conditioning_coef must be non-negative");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorCode::InvalidArgument,
          "learning_rate must be positive");
  require(local_dim >= 1, ErrorCode::InvalidArgument, "local_dim must be at least 1");
  require(init_scale > 0.0, ErrorCode::InvalidArgument, "init_scale must be positive");
}

Adam::Adam(std::size_t size, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  require(params.size() == m_.size() && grad.size() == m_.size(), ErrorCode::DimensionMismatch,
          "Adam: parameter size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, double(t_));
  const double c2 = 1.0 - std::pow(beta2_, double(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grad[k];
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grad[k] * grad[k];
    params[k] -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
  }
}

namespace {

/// Forward pass of an EntangledParameters instance, with per-question rows
/// computed on demand.
class PolicyForward {
 public:
  explicit PolicyForward(const EntangledParameters& p) : params_(p) {
    rho_ = density_from_factor(p.factor);
    fwd_.resize(p.space.agents());
    for (std::size_t i = 0; i < p.space.agents(); ++i)
      for (const auto& z : p.logits[i]) fwd_[i].push_back(quantum_softmax_forward(z));
    rows_.resize(p.space.joint_histories());
  }

  const FiniteHistorySpace& space() const { return params_.space; }
  const DensityMatrix& rho() const { return rho_; }

  std::vector<const Povm*> measurements(std::size_t joint_question) const {
    const auto h = params_.space.split_history(joint_question);
    std::vector<const Povm*> ms;
    for (std::size_t i = 0; i < h.size(); ++i) ms.push_back(&fwd_[i][h[i]].povm);
    return ms;
  }

  const std::vector<double>& row(std::size_t joint_question) {
    auto& r = rows_[joint_question];
    if (!r) r = born_joint(rho_, measurements(joint_question)).probabilities;
    return *r;
  }

  double penalty() const {
    double s = 0.0;
    for (const auto& per_agent : fwd_)
      for (const auto& f : per_agent) s += conditioning_penalty(f.s);
    return s;
  }

  /// Gradient of sum_o sum_a cot[o][a] pi(a|o) + coef * penalty, flat layout.
  std::vector<double> backprop(const std::vector<std::vector<double>>& prob_cots, double conditioning_coef) const {
    const FiniteHistorySpace& space = params_.space;
    CMat rho_cot = CMat::zeros(rho_.dim());
    std::vector<std::vector<std::vector<CMat>>> elem_cots(space.agents());
    for (std::size_t i = 0; i < space.agents(); ++i) {
      elem_cots[i].resize(space.histories[i]);
      for (std::size_t h = 0; h < space.histories[i]; ++h)
        elem_cots[i][h].assign(space.actions[i], CMat::zeros(fwd_[i][h].povm.dim()));
    }
    for (std::size_t o = 0; o < prob_cots.size(); ++o) {
      if (prob_cots[o].empty()) continue;
      const auto ms = measurements(o);
      const BornCotangents c = born_joint_vjp(rho_, ms, prob_cots[o]);
      rho_cot += c.rho;
      const auto h = space.split_history(o);
      for (std::size_t i = 0; i < h.size(); ++i)
        for (std::size_t a = 0; a < space.actions[i]; ++a) elem_cots[i][h[i]][a] += c.elements[i][a];
    }

    std::vector<double> grad(params_.parameter_count());
    std::size_t pos = 0;
    auto emit = [&](const CMat& m) {
      for (const auto& v : m.data()) {
        grad[pos++] = v.real();
        grad[pos++] = v.imag();
      }
    };
    emit(density_from_factor_vjp(params_.factor, rho_cot));
    for (std::size_t i = 0; i < space.agents(); ++i)
      for (std::size_t h = 0; h < space.histories[i]; ++h) {
        const auto& f = fwd_[i][h];
        std::optional<CMat> s_cot;
        if (conditioning_coef > 0.0) s_cot = conditioning_penalty_grad(f.s) * cplx(conditioning_coef);
        const PovmLogits z = quantum_softmax_vjp(f, elem_cots[i][h], s_cot);
        for (const auto& m : z.logits) emit(m);
      }
    return grad;
  }

 private:
  const EntangledParameters& params_;
  DensityMatrix rho_;
  std::vector<std::vector<SoftmaxForward>> fwd_;
  std::vector<std::optional<std::vector<double>>> rows_;
};

}  // namespace

namespace {

SurrogateResult surrogate_from_forward(PolicyForward& fwd, const GameBatch& batch, double entropy_coef,
                                       double conditioning_coef) {
  require(batch.size() > 0 && batch.answers.size() == batch.size() && batch.verdicts.size() == batch.size(),
          ErrorCode::InvalidArgument, "surrogate_loss: malformed batch");
  const FiniteHistorySpace& space = fwd.space();
  const double n = double(batch.size());
  std::vector<std::vector<double>> cots(space.joint_histories());
  SurrogateResult out;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const std::size_t o = batch.questions[j], a = batch.answers[j];
    require(o < space.joint_histories() && a < space.joint_actions(), ErrorCode::InvalidArgument,
            "surrogate_loss: batch entry out of range");
    const double pi = std::max(fwd.row(o)[a], kLogFloor);
    const double logp = std::log(pi);
    const double w = double(batch.verdicts[j]) - entropy_coef * (logp + 1.0);
    out.surrogate += w * logp / n;
    out.entropy_estimate -= logp / n;
    if (cots[o].empty()) cots[o].assign(space.joint_actions(), 0.0);
    // d(-w log pi)/d pi with w frozen.
    cots[o][a] -= w / (pi * n);
  }
  out.conditioning_penalty = fwd.penalty();
  out.loss = -out.surrogate + conditioning_coef * out.conditioning_penalty;
  out.gradient = fwd.backprop(cots, conditioning_coef);
  return out;
}

}  // namespace

SurrogateResult surrogate_loss(const EntangledParameters& params, const GameBatch& batch, double entropy_coef,
                               double conditioning_coef) {
  PolicyForward fwd(params);
  return surrogate_from_forward(fwd, batch, entropy_coef, conditioning_coef);
}

std::vector<double> expected_surrogate_gradient(const EntangledParameters& params, const NonlocalGame& game,
                                                double entropy_coef, double conditioning_coef) {
  require(params.space == game.space, ErrorCode::DimensionMismatch, "parameters do not match the game");
  PolicyForward fwd(params);
  const std::size_t na = game.space.joint_actions();
  std::vector<std::vector<double>> cots(game.space.joint_histories());
  for (std::size_t o = 0; o < cots.size(); ++o) {
    if (game.mu[o] == 0.0) continue;
    const auto& row = fwd.row(o);
    cots[o].assign(na, 0.0);
    for (std::size_t a = 0; a < na; ++a) {
      const double logp = std::log(std::max(row[a], kLogFloor));
      const double w = (game.wins(o, a) ? 1.0 : 0.0) - entropy_coef * (logp + 1.0);
      // E[w grad log pi] = sum_a pi w grad pi / pi.
      cots[o][a] = -game.mu[o] * w;
    }
  }
  return fwd.backprop(cots, conditioning_coef);
}

double exact_policy_entropy(const NonlocalGame& game, const AnyPolicy& policy) {
  double h = 0.0;
  for (std::size_t o = 0; o < game.mu.size(); ++o) {
    if (game.mu[o] == 0.0) continue;
    for (double p : joint_distribution(policy, o))
      if (p > 0.0) h -= game.mu[o] * p * std::log(p);
  }
  return h;
}

void write_train_csv(std::span<const TrainRecord> records, std::ostream& out) {
  out << "step,win_prob,empirical_win,entropy,loss,cond_penalty\n";
  const auto old = out.precision(10);
  for (const auto& r : records)
    out << r.step << "," << r.win_prob << "," << r.empirical_win << "," << r.entropy << "," << r.loss << ","
        << r.cond_penalty << "\n";
  out.precision(old);
}

EntangledParameters initial_parameters(const FiniteHistorySpace& space, const GameTrainConfig& cfg) {
  Rng rng = Rng(cfg.seed).split(0);
  const std::vector<std::size_t> dims(space.agents(), cfg.local_dim);
  return EntangledParameters::random(space, dims, rng, cfg.init_scale);
}

GameTrainResult train(const Referee& referee, EntangledParameters init, const GameTrainConfig& cfg,
                      const PolicyEvaluator& evaluate) {
  cfg.validate();
  require(init.space == referee.space(), ErrorCode::DimensionMismatch, "initial policy does not match the game");
  Rng rng = Rng(cfg.seed).split(1);
  EntangledParameters params = std::move(init);
  std::vector<double> flat(params.parameter_count());
  params.write_parameters(flat);
  Adam adam(flat.size(), cfg.learning_rate);

  GameTrainResult result;
  result.best = params;
  result.best_win = -1.0;
  result.records.reserve(cfg.steps);
  GameBatch batch;
  auto table_of = [&](PolicyForward& fwd) {
    JointPolicyTable t{params.space, {}};
    t.probs.reserve(params.space.joint_histories() * params.space.joint_actions());
    for (std::size_t o = 0; o < params.space.joint_histories(); ++o) {
      const auto& row = fwd.row(o);
      t.probs.insert(t.probs.end(), row.begin(), row.end());
    }
    return t;
  };
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    PolicyForward fwd(params);
    TrainRecord rec;
    rec.step = step;
    rec.win_prob = evaluate(table_of(fwd));
    if (rec.win_prob > result.best_win) {
      result.best_win = rec.win_prob;
      result.best_step = step;
      result.best = params;
    }

    batch.questions.clear();
    batch.answers.clear();
    batch.verdicts.clear();
    std::size_t wins = 0;
    for (std::size_t j = 0; j < cfg.batch_size; ++j) {
      const std::size_t o = referee.sample_question(rng);
      const std::size_t a = rng.categorical(fwd.row(o));
      const bool v = referee.judge(o, referee.space().split_action(a));
      batch.questions.push_back(o);
      batch.answers.push_back(a);
      batch.verdicts.push_back(v ? 1 : 0);
      wins += v ? 1 : 0;
    }
    rec.empirical_win = double(wins) / double(cfg.batch_size);

    const SurrogateResult s = surrogate_from_forward(fwd, batch, cfg.entropy_coef, cfg.conditioning_coef);
    rec.entropy = s.entropy_estimate;
    rec.loss = s.loss;
    rec.cond_penalty = s.conditioning_penalty;
    const bool finite = std::isfinite(s.loss) &&
                        std::all_of(s.gradient.begin(), s.gradient.end(), [](double g) { return std::isfinite(g); });
    if (!finite) {
      std::ostringstream msg;
      msg << "training diverged at step " << step << " (loss " << s.loss << ", seed " << cfg.seed << ")";
      fail(ErrorCode::Divergence, msg.str());
    }
    result.records.push_back(rec);
    adam.step(flat, s.gradient);
    params.read_parameters(flat);
  }
  PolicyForward last(params);
  const double final_win = evaluate(table_of(last));
  if (final_win > result.best_win) {
    result.best_win = final_win;
    result.best_step = cfg.steps;
    result.best = params;
  }
  return result;
}

GameTrainResult train_game(const NonlocalGame& game, const GameTrainConfig& cfg) {
  cfg.validate();
  const Referee referee(game);
  const PolicyEvaluator evaluator = [&game](const JointPolicyTable& p) { return exact_win_probability(game, p); };
  return train(referee, initial_parameters(game.space, cfg), cfg, evaluator);
}

double quantum_advantage_pct(double win, double classical_opt, double quantum_bound) {
  require(std::isfinite(quantum_bound) && quantum_bound - classical_opt > 1e-15, ErrorCode::InvalidArgument,
          "quantum_advantage_pct: degenerate denominator");
  return 100.0 * std::max(0.0, win - classical_opt) / (quantum_bound - classical_opt);
}

}  // namespace qcoord
