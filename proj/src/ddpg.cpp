#include "powerarb/ddpg.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "powerarb/error.hpp"

namespace powerarb::rl {
namespace {

std::vector<int> Chain(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

MatrixXd Stack(const std::vector<const Transition*>& batch, const VectorXd Transition::*field) {
  const Eigen::Index rows = (batch.front()->*field).size();
  MatrixXd m(rows, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const VectorXd& v = batch[j]->*field;
    if (v.size() != rows) throw Error(ErrorCode::kDimensionMismatch, "ragged batch");
    m.col(static_cast<Eigen::Index>(j)) = v;
  }
  return m;
}

void ExpectKey(std::istream& in, const char* key) {
  std::string token;
  if (!(in >> token) || token != key) {
    throw Error(ErrorCode::kParseError, std::string("expected '") + key + "', got '" + token + "'",
                key);
  }
}

}  // namespace

void DdpgConfig::Validate() const {
  auto fail = [](const char* key, const char* msg) {
    throw Error(ErrorCode::kInvalidConfig, msg, key);
  };
  if (!(tau > 0.0 && tau <= 1.0)) fail("tau", "tau must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma", "gamma must lie in [0, 1]");
  if (!(actor_lr > 0.0)) fail("actor_lr", "actor_lr must be positive");
  if (!(critic_lr > 0.0)) fail("critic_lr", "critic_lr must be positive");
  if (replay_capacity == 0) fail("replay_capacity", "replay_capacity must be positive");
  if (batch_size == 0) fail("batch_size", "batch_size must be positive");
  if (batch_size > replay_capacity) fail("batch_size", "batch_size exceeds replay_capacity");
  if (!(noise_start >= 0.0) || !(noise_end >= 0.0)) fail("noise_start", "noise must be non-negative");
  if (!(noise_decay_fraction >= 0.0 && noise_decay_fraction <= 1.0)) {
    fail("noise_decay_fraction", "noise_decay_fraction must lie in [0, 1]");
  }
  if (!(reward_scale > 0.0)) fail("reward_scale", "reward_scale must be positive");
  if (!(preactivation_penalty >= 0.0)) {
    fail("preactivation_penalty", "preactivation_penalty must be non-negative");
  }
  for (int h : hidden) {
    if (h <= 0) fail("hidden", "hidden layer sizes must be positive");
  }
}

double DdpgConfig::NoiseStddev(std::size_t episode, std::size_t total_episodes) const {
  const double horizon = noise_decay_fraction * static_cast<double>(total_episodes);
  if (horizon <= 0.0 || static_cast<double>(episode) >= horizon) return noise_end;
  const double frac = static_cast<double>(episode) / horizon;
  return noise_start + (noise_end - noise_start) * frac;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error(ErrorCode::kInvalidConfig, "replay capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::Push(Transition t) {
  ++pushed_;
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::operator[](std::size_t i) const {
  if (i >= items_.size()) throw Error(ErrorCode::kInvalidConfig, "replay index out of range");
  return items_[(head_ + i) % items_.size()];
}

std::vector<const Transition*> ReplayBuffer::Sample(std::size_t n, Rng& rng) const {
  if (items_.size() < n || items_.empty()) {
    throw Error(ErrorCode::kInsufficientReplay, "replay holds " + std::to_string(items_.size()) +
                                                    " transitions, batch needs " +
                                                    std::to_string(n));
  }
  std::vector<const Transition*> out(n);
  for (auto& p : out) p = &items_[rng.UniformInt(items_.size())];
  return out;
}

DdpgAgent::DdpgAgent(int observation_dim, VectorXd action_low, VectorXd action_high,
                     DdpgConfig config, std::uint64_t seed)
    : observation_dim_(observation_dim),
      low_(std::move(action_low)),
      high_(std::move(action_high)),
      config_(std::move(config)),
      seed_(seed),
      rng_(seed),
      actor_opt_(config_.actor_lr),
      critic_opt_(config_.critic_lr),
      replay_(config_.replay_capacity) {
  config_.Validate();
  if (observation_dim <= 0) throw Error(ErrorCode::kInvalidConfig, "observation_dim must be positive");
  const int a = static_cast<int>(low_.size());
  actor_ = Mlp(Chain(observation_dim, config_.hidden, a), low_, high_);
  critic_ = Mlp(Chain(observation_dim + a, config_.hidden, 1));
  actor_.Initialize(rng_, config_.final_layer_init);
  critic_.Initialize(rng_, config_.final_layer_init);
  target_actor_ = actor_;
  target_critic_ = critic_;
}

void DdpgAgent::CheckObservation(const VectorXd& observation) const {
  if (observation.size() != observation_dim_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "observation has " + std::to_string(observation.size()) + " entries, agent expects " +
                    std::to_string(observation_dim_));
  }
}

VectorXd DdpgAgent::SelectAction(const VectorXd& observation, bool explore, Rng& rng,
                                 double noise_stddev, VectorXd* raw_action) const {
  CheckObservation(observation);
  VectorXd raw = actor_.ForwardRaw(observation);
  if (explore) {
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw(i) += rng.Normal(0.0, noise_stddev);
  }
  VectorXd action = actor_.Squash(raw);
  // tanh rounds to +-1 for large inputs.
  action = action.cwiseMax(low_).cwiseMin(high_);
  if (raw_action) *raw_action = std::move(raw);
  return action;
}

VectorXd DdpgAgent::SelectAction(const VectorXd& observation, bool explore,
                                 std::uint64_t rng_seed) const {
  Rng rng(rng_seed);
  return SelectAction(observation, explore, rng, config_.noise_start);
}

VectorXd DdpgAgent::NormalizeAction(const VectorXd& action) const {
  return (2.0 * (action - low_).array() / (high_ - low_).array() - 1.0).matrix();
}

MatrixXd DdpgAgent::CriticInput(const MatrixXd& observations, const MatrixXd& actions) const {
  MatrixXd x(observations.rows() + actions.rows(), observations.cols());
  x.topRows(observations.rows()) = observations;
  for (Eigen::Index j = 0; j < actions.cols(); ++j) {
    x.col(j).tail(actions.rows()) = NormalizeAction(actions.col(j));
  }
  return x;
}

double DdpgAgent::QValue(const VectorXd& observation, const VectorXd& action) const {
  CheckObservation(observation);
  VectorXd x(observation.size() + action.size());
  x << observation, NormalizeAction(action);
  return critic_.Forward(x)(0);
}

void DdpgAgent::Store(Transition t) {
  CheckObservation(t.observation);
  if (!t.terminal) CheckObservation(t.next_observation);
  if (t.action.size() != action_dim()) throw Error(ErrorCode::kDimensionMismatch, "action size");
  replay_.Push(std::move(t));
}

MatrixXd DdpgAgent::CriticTargets(const std::vector<const Transition*>& batch) const {
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  MatrixXd y(1, n);
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < n; ++j) {
    y(0, j) = config_.reward_scale * batch[j]->reward;
    if (!batch[j]->terminal && config_.gamma != 0.0) live.push_back(j);
  }
  if (live.empty()) return y;
  MatrixXd next(observation_dim_, static_cast<Eigen::Index>(live.size()));
  for (std::size_t k = 0; k < live.size(); ++k) {
    next.col(static_cast<Eigen::Index>(k)) = batch[live[k]]->next_observation;
  }
  const MatrixXd next_actions = target_actor_.ForwardBatch(next);
  const MatrixXd q_next = target_critic_.ForwardBatch(CriticInput(next, next_actions));
  for (std::size_t k = 0; k < live.size(); ++k) {
    y(0, live[k]) += config_.gamma * q_next(0, static_cast<Eigen::Index>(k));
  }
  return y;
}

LossAndGradient DdpgAgent::CriticLossGradient(const std::vector<const Transition*>& batch) const {
  if (batch.empty()) throw Error(ErrorCode::kInsufficientReplay, "empty batch");
  const MatrixXd obs = Stack(batch, &Transition::observation);
  const MatrixXd act = Stack(batch, &Transition::action);
  return SquaredLossGradient(critic_, CriticInput(obs, act), CriticTargets(batch));
}

LossAndGradient DdpgAgent::ActorLossGradient(const std::vector<const Transition*>& batch) const {
  if (batch.empty()) throw Error(ErrorCode::kInsufficientReplay, "empty batch");
  const MatrixXd obs = Stack(batch, &Transition::observation);
  const double n = static_cast<double>(batch.size());
  Mlp::Cache actor_cache, critic_cache;
  const MatrixXd actions = actor_.ForwardBatch(obs, &actor_cache);
  const MatrixXd q = critic_.ForwardBatch(CriticInput(obs, actions), &critic_cache);
  LossAndGradient out;
  out.loss = -q.sum() / n;
  const double lambda = config_.preactivation_penalty;
  if (lambda > 0.0) out.loss += lambda * actor_cache.raw_output.squaredNorm() / n;
  if (!std::isfinite(out.loss)) throw Error(ErrorCode::kNonFiniteLoss, "actor objective is not finite");
  MatrixXd d_input;
  critic_.Backward(critic_cache, MatrixXd::Constant(1, q.cols(), -1.0 / n), nullptr, &d_input);
  const Eigen::Index a = action_dim();
  MatrixXd d_action = d_input.bottomRows(a);
  const Eigen::ArrayXd scale = 2.0 / (high_ - low_).array();
  for (Eigen::Index j = 0; j < d_action.cols(); ++j) d_action.col(j).array() *= scale;
  if (lambda > 0.0) {
    const MatrixXd d_raw = (2.0 * lambda / n) * actor_cache.raw_output;
    actor_.Backward(actor_cache, d_action, &out.gradient, nullptr, &d_raw);
  } else {
    actor_.Backward(actor_cache, d_action, &out.gradient);
  }
  return out;
}

UpdateStats DdpgAgent::UpdateStep(const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw Error(ErrorCode::kInsufficientReplay, "empty batch");
  UpdateStats stats;
  const LossAndGradient critic = CriticLossGradient(batch);
  stats.critic_loss = critic.loss;
  critic_opt_.Step(critic_.parameters(), critic.gradient);
  const LossAndGradient actor = ActorLossGradient(batch);
  stats.actor_objective = -actor.loss;
  actor_opt_.Step(actor_.parameters(), actor.gradient);
  SoftUpdate(target_critic_, critic_, config_.tau);
  SoftUpdate(target_actor_, actor_, config_.tau);
  return stats;
}

UpdateStats DdpgAgent::Update() {
  return UpdateStep(replay_.Sample(config_.batch_size, rng_));
}

void DdpgAgent::Save(std::ostream& out) const {
  char buf[64];
  out << "ddpg 1\n";
  out << "observation_dim " << observation_dim_ << '\n';
  out << "action_dim " << action_dim() << '\n';
  out << "seed " << seed_ << '\n';
  out << "hidden " << config_.hidden.size();
  for (int h : config_.hidden) out << ' ' << h;
  out << '\n';
  const std::pair<const char*, double> reals[] = {
      {"actor_lr", config_.actor_lr},       {"critic_lr", config_.critic_lr},
      {"tau", config_.tau},                 {"gamma", config_.gamma},
      {"noise_start", config_.noise_start}, {"noise_end", config_.noise_end},
      {"noise_decay_fraction", config_.noise_decay_fraction},
      {"reward_scale", config_.reward_scale}, {"final_layer_init", config_.final_layer_init},
      {"preactivation_penalty", config_.preactivation_penalty}};
  for (const auto& [key, value] : reals) {
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out << key << ' ' << buf << '\n';
  }
  out << "replay_capacity " << config_.replay_capacity << '\n';
  out << "batch_size " << config_.batch_size << '\n';
  out << "[actor]\n";
  actor_.Write(out);
  out << "[critic]\n";
  critic_.Write(out);
  out << "[target_actor]\n";
  target_actor_.Write(out);
  out << "[target_critic]\n";
  target_critic_.Write(out);
  out << "[actor_optimizer]\n";
  actor_opt_.Write(out);
  out << "[critic_optimizer]\n";
  critic_opt_.Write(out);
}

DdpgAgent DdpgAgent::Load(std::istream& in) {
  ExpectKey(in, "ddpg");
  int version = 0;
  in >> version;
  if (version != 1) throw Error(ErrorCode::kParseError, "unsupported checkpoint version");
  DdpgConfig cfg;
  int obs_dim = 0, act_dim = 0;
  std::uint64_t seed = 0;
  ExpectKey(in, "observation_dim");
  in >> obs_dim;
  ExpectKey(in, "action_dim");
  in >> act_dim;
  ExpectKey(in, "seed");
  in >> seed;
  ExpectKey(in, "hidden");
  std::size_t nh = 0;
  in >> nh;
  cfg.hidden.assign(nh, 0);
  for (auto& h : cfg.hidden) in >> h;
  auto real = [&](const char* key, double& v) {
    ExpectKey(in, key);
    std::string token;
    in >> token;
    v = std::stod(token);
  };
  real("actor_lr", cfg.actor_lr);
  real("critic_lr", cfg.critic_lr);
  real("tau", cfg.tau);
  real("gamma", cfg.gamma);
  real("noise_start", cfg.noise_start);
  real("noise_end", cfg.noise_end);
  real("noise_decay_fraction", cfg.noise_decay_fraction);
  real("reward_scale", cfg.reward_scale);
  real("final_layer_init", cfg.final_layer_init);
  real("preactivation_penalty", cfg.preactivation_penalty);
  ExpectKey(in, "replay_capacity");
  in >> cfg.replay_capacity;
  ExpectKey(in, "batch_size");
  in >> cfg.batch_size;
  if (!in) throw Error(ErrorCode::kParseError, "truncated checkpoint header");

  ExpectKey(in, "[actor]");
  Mlp actor = Mlp::Read(in);
  if (actor.output_size() != act_dim || actor.input_size() != obs_dim) {
    throw Error(ErrorCode::kShapeMismatch, "actor shape disagrees with the header");
  }
  DdpgAgent agent(obs_dim, actor.low(), actor.high(), cfg, seed);
  agent.actor_ = std::move(actor);
  ExpectKey(in, "[critic]");
  agent.critic_ = Mlp::Read(in);
  ExpectKey(in, "[target_actor]");
  agent.target_actor_ = Mlp::Read(in);
  ExpectKey(in, "[target_critic]");
  agent.target_critic_ = Mlp::Read(in);
  if (!agent.critic_.SameShape(agent.target_critic_) ||
      !agent.actor_.SameShape(agent.target_actor_) ||
      agent.critic_.input_size() != obs_dim + act_dim) {
    throw Error(ErrorCode::kShapeMismatch, "network shapes disagree in checkpoint");
  }
  ExpectKey(in, "[actor_optimizer]");
  agent.actor_opt_.Read(in);
  ExpectKey(in, "[critic_optimizer]");
  agent.critic_opt_.Read(in);
  return agent;
}

std::string DdpgAgent::ParameterDump() const {
  std::ostringstream out;
  Save(out);
  return out.str();
}

}  // namespace powerarb::rl
