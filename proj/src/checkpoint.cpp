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

#include "qcoord/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qcoord/error.hpp"

namespace qcoord {

using nlohmann::json;

const char* to_string(RendezvousAnswers answers) {
  return answers == RendezvousAnswers::EdgeIndex ? "edge-index" : "destination";
}

RendezvousAnswers parse_rendezvous_answers(const std::string& name) {
  if (name == "edge-index" || name == "edge") return RendezvousAnswers::EdgeIndex;
  if (name == "destination") return RendezvousAnswers::Destination;
  fail(ErrorCode::InvalidArgument, "unknown answer encoding '" + name + "' (expected edge-index or destination)");
}

namespace {

const char* kSchema = "qcoord.checkpoint";

std::vector<double> interleave(const CMat& m) {
  std::vector<double> out;
  out.reserve(2 * m.data().size());
  for (const cplx& v : m.data()) {
    out.push_back(v.real());
    out.push_back(v.imag());
  }
  return out;
}

CMat deinterleave(const json& j, std::size_t dim) {
  const auto v = j.get<std::vector<double>>();
  require(v.size() == 2 * dim * dim, ErrorCode::InvalidArgument, "checkpoint matrix has the wrong size");
  CMat m(dim);
  for (std::size_t k = 0; k < dim * dim; ++k) m.data()[k] = cplx(v[2 * k], v[2 * k + 1]);
  return m;
}

const json& field(const json& j, const char* key) {
  require(j.is_object() && j.contains(key), ErrorCode::InvalidArgument,
          std::string("checkpoint is missing field '") + key + "'");
  return j.at(key);
}

json game_config_json(const GameTrainConfig& c) {
  return {{"batch_size", c.batch_size},       {"learning_rate", c.learning_rate}, {"entropy_coef", c.entropy_coef},
          {"steps", c.steps},                 {"seed", c.seed},                   {"conditioning_coef", c.conditioning_coef},
          {"local_dim", c.local_dim},         {"init_scale", c.init_scale}};
}

GameTrainConfig game_config_from(const json& j) {
  GameTrainConfig c;
  c.batch_size = field(j, "batch_size").get<std::size_t>();
  c.learning_rate = field(j, "learning_rate").get<double>();
  c.entropy_coef = field(j, "entropy_coef").get<double>();
  c.steps = field(j, "steps").get<std::size_t>();
  c.seed = field(j, "seed").get<std::uint64_t>();
  c.conditioning_coef = field(j, "conditioning_coef").get<double>();
  c.local_dim = field(j, "local_dim").get<std::size_t>();
  c.init_scale = field(j, "init_scale").get<double>();
  return c;
}

json mappo_config_json(const MappoConfig& c) {
  return {{"clip_eps", c.clip_eps},
          {"gamma", c.gamma},
          {"gae_lambda", c.gae_lambda},
          {"epochs", c.epochs},
          {"minibatch", c.minibatch},
          {"actor_lr", c.actor_lr},
          {"coordinator_lr", c.coordinator_lr},
          {"shared_logit_lr", c.shared_logit_lr},
          {"critic_lr", c.critic_lr},
          {"max_grad_norm", c.max_grad_norm},
          {"entropy_coef", c.entropy_coef},
          {"conditioning_coef", c.conditioning_coef},
          {"pid", {{"kp", c.pid.kp}, {"ki", c.pid.ki}, {"kd", c.pid.kd}, {"integral_bound", c.pid.integral_bound}}},
          {"rollout_length", c.rollout_length},
          {"envs", c.envs},
          {"updates", c.updates},
          {"eval_interval", c.eval_interval},
          {"eval_episodes", c.eval_episodes},
          {"eval_steps", c.eval_steps},
          {"feasibility_z", c.feasibility_z},
          {"hidden", c.hidden},
          {"shared_advice", c.shared_advice},
          {"learned_actors", c.learned_actors},
          {"queue",
           {{"lambda", c.queue.lambda_rate},
            {"mu", c.queue.mu_rate},
            {"throughput_exponent", c.queue.throughput_exponent},
            {"wait_limit", c.queue.wait_limit},
            {"horizon", c.queue.horizon},
            {"wait_normalization",
             c.queue.wait_normalization == WaitNormalization::PerRequest ? "per-request" : "per-step"}}},
          {"seed", c.seed}};
}

MappoConfig mappo_config_from(const json& j) {
  MappoConfig c;
  c.clip_eps = field(j, "clip_eps").get<double>();
  c.gamma = field(j, "gamma").get<double>();
  c.gae_lambda = field(j, "gae_lambda").get<double>();
  c.epochs = field(j, "epochs").get<std::size_t>();
  c.minibatch = field(j, "minibatch").get<std::size_t>();
  c.actor_lr = field(j, "actor_lr").get<double>();
  c.coordinator_lr = field(j, "coordinator_lr").get<double>();
  c.shared_logit_lr = field(j, "shared_logit_lr").get<double>();
  c.critic_lr = field(j, "critic_lr").get<double>();
  c.max_grad_norm = field(j, "max_grad_norm").get<double>();
  c.entropy_coef = field(j, "entropy_coef").get<double>();
  c.conditioning_coef = field(j, "conditioning_coef").get<double>();
  const json& pid = field(j, "pid");
  c.pid = PidGains{field(pid, "kp").get<double>(), field(pid, "ki").get<double>(), field(pid, "kd").get<double>(),
                   field(pid, "integral_bound").get<double>()};
  c.rollout_length = field(j, "rollout_length").get<std::size_t>();
  c.envs = field(j, "envs").get<std::size_t>();
  c.updates = field(j, "updates").get<std::size_t>();
  c.eval_interval = field(j, "eval_interval").get<std::size_t>();
  c.eval_episodes = field(j, "eval_episodes").get<std::size_t>();
  c.eval_steps = field(j, "eval_steps").get<std::size_t>();
  c.feasibility_z = field(j, "feasibility_z").get<double>();
  c.hidden = field(j, "hidden").get<std::size_t>();
  c.shared_advice = field(j, "shared_advice").get<std::size_t>();
  c.learned_actors = field(j, "learned_actors").get<bool>();
  const json& q = field(j, "queue");
  c.queue.lambda_rate = field(q, "lambda").get<double>();
  c.queue.mu_rate = field(q, "mu").get<double>();
  c.queue.throughput_exponent = field(q, "throughput_exponent").get<double>();
  c.queue.wait_limit = field(q, "wait_limit").get<double>();
  c.queue.horizon = field(q, "horizon").get<std::size_t>();
  const std::string norm = field(q, "wait_normalization").get<std::string>();
  require(norm == "per-request" || norm == "per-step", ErrorCode::InvalidArgument, "unknown wait normalization");
  c.queue.wait_normalization = norm == "per-request" ? WaitNormalization::PerRequest : WaitNormalization::PerStep;
  c.seed = field(j, "seed").get<std::uint64_t>();
  return c;
}

json mlp_json(const Mlp& net) {
  return {{"sizes", net.sizes()}, {"parameters", std::vector<double>(net.parameters().begin(), net.parameters().end())}};
}

Mlp mlp_from(const json& j) {
  Mlp net(field(j, "sizes").get<std::vector<std::size_t>>());
  const auto p = field(j, "parameters").get<std::vector<double>>();
  require(p.size() == net.parameter_count(), ErrorCode::InvalidArgument, "network parameter count mismatch");
  std::copy(p.begin(), p.end(), net.parameters().begin());
  return net;
}

json game_json(const GameCheckpoint& g) {
  const EntangledParameters& p = g.params;
  json params = json::object();
  params["density_factor"] = interleave(p.factor.factor);
  for (std::size_t i = 0; i < p.logits.size(); ++i)
    for (std::size_t h = 0; h < p.logits[i].size(); ++h)
      for (std::size_t j = 0; j < p.logits[i][h].logits.size(); ++j)
        params["povm_logits/" + std::to_string(i) + "/" + std::to_string(h) + "/" + std::to_string(j)] =
            interleave(p.logits[i][h].logits[j]);
  return {{"kind", "entangled-game"},
          {"game", g.game},
          {"answers", to_string(g.answers)},
          {"seed", g.config.seed},
          {"step", g.step},
          {"config", game_config_json(g.config)},
          {"structure",
           {{"histories", p.space.histories}, {"actions", p.space.actions}, {"local_dims", p.local_dims}}},
          {"parameters", params}};
}

GameCheckpoint game_from(const json& j) {
  GameCheckpoint g;
  g.game = field(j, "game").get<std::string>();
  g.answers = parse_rendezvous_answers(field(j, "answers").get<std::string>());
  g.step = field(j, "step").get<std::size_t>();
  g.config = game_config_from(field(j, "config"));
  const json& s = field(j, "structure");
  EntangledParameters& p = g.params;
  p.space.histories = field(s, "histories").get<std::vector<std::size_t>>();
  p.space.actions = field(s, "actions").get<std::vector<std::size_t>>();
  p.local_dims = field(s, "local_dims").get<std::vector<std::size_t>>();
  p.space.validate();
  require(p.local_dims.size() == p.space.agents(), ErrorCode::InvalidArgument, "local_dims size mismatch");
  std::size_t joint = 1;
  for (std::size_t d : p.local_dims) {
    require(d > 0 && d <= 16, ErrorCode::InvalidArgument, "local dimension out of range");
    joint *= d;
  }
  require(joint <= 256, ErrorCode::InvalidArgument, "joint dimension out of range");
  const json& params = field(j, "parameters");
  p.factor.factor = deinterleave(field(params, "density_factor"), joint);
  p.logits.assign(p.space.agents(), {});
  for (std::size_t i = 0; i < p.space.agents(); ++i)
    for (std::size_t h = 0; h < p.space.histories[i]; ++h) {
      PovmLogits z;
      for (std::size_t a = 0; a < p.space.actions[i]; ++a) {
        const std::string key = "povm_logits/" + std::to_string(i) + "/" + std::to_string(h) + "/" + std::to_string(a);
        z.logits.push_back(deinterleave(field(params, key.c_str()), p.local_dims[i]));
      }
      p.logits[i].push_back(std::move(z));
    }
  return g;
}

json router_json(const RouterCheckpoint& r) {
  const RouterPolicy& p = r.policy;
  json params = json::object();
  json nets = json::object();
  if (p.kind == CoordinatorKind::Quantum) {
    params["rho"] = interleave(p.rho.matrix());
    for (std::size_t i = 0; i < 2; ++i) nets["coordinator/" + std::to_string(i)] = mlp_json(p.coordinator_nets[i]);
  } else {
    params["shared_logits"] = p.shared_logits;
  }
  if (p.learned_actors)
    for (std::size_t i = 0; i < 2; ++i) nets["actor/" + std::to_string(i)] = mlp_json(p.actors[i]);
  return {{"kind", "router-policy"},
          {"coordinator", to_string(p.kind)},
          {"learned_actors", p.learned_actors},
          {"seed", r.config.seed},
          {"step", r.step},
          {"config", mappo_config_json(r.config)},
          {"parameters", params},
          {"networks", nets}};
}

RouterCheckpoint router_from(const json& j) {
  RouterCheckpoint r;
  r.step = field(j, "step").get<std::size_t>();
  r.config = mappo_config_from(field(j, "config"));
  RouterPolicy& p = r.policy;
  p.kind = parse_coordinator_kind(field(j, "coordinator").get<std::string>());
  p.learned_actors = field(j, "learned_actors").get<bool>();
  const json& params = field(j, "parameters");
  const json& nets = field(j, "networks");
  if (p.kind == CoordinatorKind::Quantum) {
    p.rho = DensityMatrix::make_checked(deinterleave(field(params, "rho"), 4));
    for (std::size_t i = 0; i < 2; ++i)
      p.coordinator_nets[i] = mlp_from(field(nets, ("coordinator/" + std::to_string(i)).c_str()));
  } else {
    p.shared_logits = field(params, "shared_logits").get<std::vector<double>>();
  }
  if (p.learned_actors)
    for (std::size_t i = 0; i < 2; ++i) p.actors[i] = mlp_from(field(nets, ("actor/" + std::to_string(i)).c_str()));
  p.validate();
  return r;
}

}  // namespace

std::string checkpoint_to_string(const Checkpoint& ckpt) {
  json j = std::visit(
      [](const auto& c) {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, GameCheckpoint>)
          return game_json(c);
        else
          return router_json(c);
      },
      ckpt);
  j["schema"] = kSchema;
  j["version"] = kCheckpointVersion;
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    require(field(j, "schema").get<std::string>() == kSchema, ErrorCode::InvalidArgument, "not a qcoord checkpoint");
    const int version = field(j, "version").get<int>();
    require(version == kCheckpointVersion, ErrorCode::InvalidArgument,
            "unsupported checkpoint version " + std::to_string(version));
    const std::string kind = field(j, "kind").get<std::string>();
    if (kind == "entangled-game") return game_from(j);
    if (kind == "router-policy") return router_from(j);
    fail(ErrorCode::InvalidArgument, "unknown checkpoint kind '" + kind + "'");
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string text = checkpoint_to_string(ckpt);
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  require(static_cast<bool>(out), ErrorCode::Io, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace qcoord
