#ifndef POWERARB_DDPG_HPP
#define POWERARB_DDPG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "powerarb/mlp.hpp"
#include "powerarb/rng.hpp"

namespace powerarb::rl {

struct DdpgConfig {
  std::vector<int> hidden = {64, 32};
  double actor_lr = 2.5e-4;
  double critic_lr = 2.5e-3;
  double tau = 0.005;
  double gamma = 1.0;
  std::size_t replay_capacity = 100000;
  std::size_t batch_size = 64;
  // Gaussian noise in pre-squash space, decayed linearly over the first
  // noise_decay_fraction of training.
  double noise_start = 0.5;
  double noise_end = 0.05;
  double noise_decay_fraction = 0.6;
  // Multiplies stored rewards inside the critic target only.
  double reward_scale = 1e-3;
  double final_layer_init = 3e-3;
  // Weight of mean squared pre-squash actor output added to the actor loss.
  double preactivation_penalty = 0.0;

  void Validate() const;
  double NoiseStddev(std::size_t episode, std::size_t total_episodes) const;
};

struct Transition {
  VectorXd observation;
  VectorXd raw_action;  // pre-squash
  VectorXd action;      // bounded
  double reward = 0.0;
  VectorXd next_observation;  // empty when terminal
  bool terminal = true;
};

// Fixed-capacity ring; the oldest transition is overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  std::size_t total_pushed() const { return pushed_; }

  void Push(Transition t);
  // i = 0 is the oldest stored transition.
  const Transition& operator[](std::size_t i) const;
  // Uniform with replacement.
  std::vector<const Transition*> Sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t pushed_ = 0;
  std::size_t head_ = 0;
  std::vector<Transition> items_;
};

struct UpdateStats {
  double critic_loss = 0.0;
  // Mean Q(s, actor(s)) on the batch before the actor step.
  double actor_objective = 0.0;
};

class DdpgAgent {
 public:
  DdpgAgent(int observation_dim, VectorXd action_low, VectorXd action_high, DdpgConfig config,
            std::uint64_t seed);

  int observation_dim() const { return observation_dim_; }
  int action_dim() const { return static_cast<int>(low_.size()); }
  const VectorXd& action_low() const { return low_; }
  const VectorXd& action_high() const { return high_; }
  const DdpgConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& target_actor() const { return target_actor_; }
  const Mlp& target_critic() const { return target_critic_; }
  Mlp& mutable_actor() { return actor_; }
  Mlp& mutable_critic() { return critic_; }
  const ReplayBuffer& replay() const { return replay_; }
  Rng& rng() { return rng_; }

  // Noise, when exploring, is added to the raw actor output before squashing.
  VectorXd SelectAction(const VectorXd& observation, bool explore, Rng& rng, double noise_stddev,
                        VectorXd* raw_action = nullptr) const;
  // Draws exploration noise at noise_start from a generator seeded with rng_seed.
  VectorXd SelectAction(const VectorXd& observation, bool explore, std::uint64_t rng_seed) const;

  // Maps a bounded action to [-1, 1] per dimension.
  VectorXd NormalizeAction(const VectorXd& action) const;
  MatrixXd CriticInput(const MatrixXd& observations, const MatrixXd& actions) const;
  double QValue(const VectorXd& observation, const VectorXd& action) const;

  void Store(Transition t);

  // Critic regression toward r * reward_scale + gamma * Q'(s', mu'(s')), one Adam
  // step each for critic and actor, then soft target updates.
  UpdateStats UpdateStep(const std::vector<const Transition*>& batch);
  // Samples batch_size transitions from the replay with the agent's generator.
  UpdateStats Update();

  // Gradient of the critic loss on a batch with respect to critic parameters.
  LossAndGradient CriticLossGradient(const std::vector<const Transition*>& batch) const;
  // Gradient of -mean Q(s, actor(s)) with respect to actor parameters.
  LossAndGradient ActorLossGradient(const std::vector<const Transition*>& batch) const;

  // Parameters, targets and optimizer moments; the replay buffer is not saved.
  void Save(std::ostream& out) const;
  static DdpgAgent Load(std::istream& in);
  std::string ParameterDump() const;

 private:
  MatrixXd CriticTargets(const std::vector<const Transition*>& batch) const;
  void CheckObservation(const VectorXd& observation) const;

  int observation_dim_;
  VectorXd low_, high_;
  DdpgConfig config_;
  std::uint64_t seed_;
  Rng rng_;
  Mlp actor_, critic_, target_actor_, target_critic_;
  Adam actor_opt_, critic_opt_;
  ReplayBuffer replay_;
};

}  // namespace powerarb::rl

#endif  // POWERARB_DDPG_HPP
