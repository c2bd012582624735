#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "powerarb/ddpg.hpp"
#include "powerarb/error.hpp"
#include "powerarb/mlp.hpp"
#include "powerarb/rng.hpp"
#include "powerarb/training.hpp"
#include "support.hpp"

using namespace powerarb;
using namespace powerarb::rl;

namespace {

VectorXd V(std::initializer_list<double> xs) {
  VectorXd v(xs.size());
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Transition Terminal(const VectorXd& obs, const VectorXd& action, double reward) {
  Transition t;
  t.observation = obs;
  t.action = action;
  t.raw_action = action;
  t.reward = reward;
  return t;
}

// Max relative error of the analytic gradient against central differences, with the
// denominator floored at 1e-5. Coordinates whose difference quotient straddles a ReLU
// kink are retried with a smaller step.
template <typename Loss>
double WorstRelativeError(VectorXd& params, const VectorXd& analytic, Loss loss) {
  double worst = 0;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    double best = INFINITY;
    for (double h : {1e-5, 1e-7}) {
      params[i] = saved + h;
      const double up = loss();
      params[i] = saved - h;
      const double dn = loss();
      params[i] = saved;
      const double fd = (up - dn) / (2 * h);
      const double scale = std::max({std::abs(fd), std::abs(analytic[i]), 1e-5});
      best = std::min(best, std::abs(fd - analytic[i]) / scale);
      if (best < 1e-4) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST(Mlp, ZeroNetworkAndSquash) {
  Mlp net({3, 4, 2});
  EXPECT_TRUE(net.Forward(V({1, 2, 3})).isZero());
  Mlp bounded({1, 2, 1}, V({20}), V({200}));
  EXPECT_DOUBLE_EQ(bounded.Forward(V({5}))[0], 110);
  EXPECT_GT(bounded.Squash(V({50}))[0], 200 - 1e-6);
  EXPECT_LE(bounded.Squash(V({50}))[0], 200);
  EXPECT_THROW(net.Forward(V({1})), Error);
}

TEST(Mlp, HandGradients) {
  Mlp neuron({1, 1});
  neuron.parameters() = V({1.0, 0.0});  // w, b
  MatrixXd x(1, 1), y(1, 1);
  x << 1;
  y << 0;
  const auto g = SquaredLossGradient(neuron, x, y);
  EXPECT_DOUBLE_EQ(g.gradient[0], 2.0);

  Mlp zero({2, 3, 1});
  y << 4.0;
  MatrixXd x2(2, 1);
  x2 << 0.5, -1;
  const auto z = SquaredLossGradient(zero, x2, y);
  EXPECT_DOUBLE_EQ(z.gradient[z.gradient.size() - 1], -2.0 * 4.0);
}

TEST(Mlp, FiniteDifferenceGradient) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Mlp net({6, 64, 32, 2}, V({-1, 20}), V({1, 200}));
    net.Initialize(rng, 0.5);
    MatrixXd x(6, 5), y(2, 5);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.Normal();
    y = net.ForwardBatch(x);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += rng.Normal();
    const VectorXd analytic = SquaredLossGradient(net, x, y).gradient;
    const double err = WorstRelativeError(net.parameters(), analytic,
                                          [&] { return SquaredLossGradient(net, x, y).loss; });
    EXPECT_LT(err, 1e-4) << "seed " << seed;
  }
}

TEST(Mlp, SerializationRoundTrip) {
  Rng rng(4);
  Mlp net({3, 5, 2}, V({-2, 0}), V({2, 9}));
  net.Initialize(rng);
  std::stringstream s;
  net.Write(s);
  const Mlp back = Mlp::Read(s);
  EXPECT_EQ(back.parameters(), net.parameters());
  EXPECT_EQ(back.low(), net.low());
  EXPECT_TRUE(back.SameShape(net));
}

TEST(SoftUpdate, Examples) {
  Mlp a({1, 1}), b({1, 1});
  a.parameters() = V({2, 2});
  b.parameters() = V({4, 4});
  Mlp t = a;
  SoftUpdate(t, b, 0.5);
  EXPECT_EQ(t.parameters(), V({3, 3}));
  t = a;
  SoftUpdate(t, b, 1.0);
  EXPECT_EQ(t.parameters(), b.parameters());
  t = a;
  SoftUpdate(t, b, 0.0);
  EXPECT_EQ(t.parameters(), a.parameters());
  EXPECT_THROW(SoftUpdate(t, Mlp({2, 1}), 0.5), Error);
}

TEST(SoftUpdate, TargetTrackingBound) {
  Rng rng(8);
  Mlp source({4, 8, 2}), target({4, 8, 2});
  source.Initialize(rng);
  target.Initialize(rng);
  const double d0 = (target.parameters() - source.parameters()).norm();
  const double tau = 0.05;
  for (int n = 1; n <= 100; ++n) {
    SoftUpdate(target, source, tau);
    ASSERT_LE((target.parameters() - source.parameters()).norm(), std::pow(1 - tau, n) * d0 * (1 + 1e-12));
  }
}

TEST(Replay, RingDropsOldest) {
  ReplayBuffer buf(5);
  for (int i = 0; i < 8; ++i) buf.Push(Terminal(V({double(i)}), V({0}), i));
  EXPECT_EQ(buf.size(), 5u);
  EXPECT_EQ(buf.total_pushed(), 8u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(buf[i].reward, 3.0 + i);
  Rng rng(1);
  EXPECT_EQ(buf.Sample(4, rng).size(), 4u);
  ReplayBuffer empty(3);
  EXPECT_THROW(empty.Sample(1, rng), Error);
}

TEST(Ddpg, ActionBoundsUnderNoise) {
  DdpgAgent bm(3, V({-200, -200}), V({200, 200}), {}, 5);
  EXPECT_EQ(bm.action_dim(), 2);
  Rng rng(2);
  const VectorXd obs = V({0.3, -1, 2});
  for (int i = 0; i < 1000000; ++i) {
    const VectorXd a = bm.SelectAction(obs, true, rng, 25.0);
    ASSERT_TRUE(a[0] >= -200 && a[0] <= 200 && a[1] >= -200 && a[1] <= 200);
  }
  EXPECT_EQ(bm.SelectAction(obs, false, 1), bm.SelectAction(obs, false, 2));
}

TEST(Ddpg, TerminalTargetIsScaledReward) {
  DdpgConfig cfg;
  cfg.gamma = 0;
  cfg.reward_scale = 1;
  DdpgAgent agent(2, V({-1}), V({1}), cfg, 3);
  std::vector<Transition> ts;
  for (int i = 0; i < 4; ++i) ts.push_back(Terminal(V({i * 0.1, 1}), V({0.2 * i - 0.3}), 1.5 * i));
  std::vector<const Transition*> batch;
  for (auto& t : ts) batch.push_back(&t);
  // With gamma 0 the loss is the mean of (Q - r)^2.
  double expected = 0;
  for (auto& t : ts) expected += std::pow(agent.QValue(t.observation, t.action) - t.reward, 2);
  EXPECT_NEAR(agent.CriticLossGradient(batch).loss, expected / ts.size(), 1e-12);
}

TEST(Ddpg, ActorAndCriticGradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    DdpgConfig cfg;
    cfg.gamma = 0.9;
    cfg.final_layer_init = 0.3;
    cfg.preactivation_penalty = seed % 2 ? 0.1 : 0.0;
    DdpgAgent agent(5, V({20}), V({200}), cfg, seed);
    Rng rng(seed + 100);
    std::vector<Transition> ts;
    for (int i = 0; i < 8; ++i) {
      Transition t = Terminal(VectorXd::NullaryExpr(5, [&] { return rng.Normal(); }),
                              V({rng.Uniform(20, 200)}), rng.Normal(0, 500));
      if (i % 2) {
        t.terminal = false;
        t.next_observation = VectorXd::NullaryExpr(5, [&] { return rng.Normal(); });
      }
      ts.push_back(t);
    }
    std::vector<const Transition*> batch;
    for (auto& t : ts) batch.push_back(&t);
    const VectorXd gc = agent.CriticLossGradient(batch).gradient;
    EXPECT_LT(WorstRelativeError(agent.mutable_critic().parameters(), gc,
                                 [&] { return agent.CriticLossGradient(batch).loss; }), 1e-4);
    const VectorXd ga = agent.ActorLossGradient(batch).gradient;
    EXPECT_LT(WorstRelativeError(agent.mutable_actor().parameters(), ga,
                                 [&] { return agent.ActorLossGradient(batch).loss; }), 1e-4);
  }
}

TEST(Ddpg, CriticLossDecreasesOnFrozenBatch) {
  int decreased = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    DdpgConfig cfg;
    cfg.critic_lr = 1e-4;
    cfg.gamma = 0;
    DdpgAgent agent(3, V({-1}), V({1}), cfg, seed);
    Rng rng(seed);
    std::vector<Transition> ts;
    for (int i = 0; i < 32; ++i) {
      ts.push_back(Terminal(VectorXd::NullaryExpr(3, [&] { return rng.Normal(); }),
                            V({rng.Uniform(-1, 1)}), rng.Normal(0, 1000)));
    }
    std::vector<const Transition*> batch;
    for (auto& t : ts) batch.push_back(&t);
    const double before = agent.CriticLossGradient(batch).loss;
    agent.UpdateStep(batch);
    decreased += agent.CriticLossGradient(batch).loss <= before;
  }
  EXPECT_GE(decreased, 90);
}

TEST(Ddpg, CheckpointRoundTrip) {
  DdpgAgent agent(4, V({-200, -200}), V({200, 200}), {}, 12);
  for (int i = 0; i < 70; ++i) agent.Store(Terminal(VectorXd::Constant(4, i * 0.01), V({1, 2}), i));
  agent.Update();
  std::stringstream s;
  agent.Save(s);
  const DdpgAgent back = DdpgAgent::Load(s);
  EXPECT_EQ(back.ParameterDump(), agent.ParameterDump());
  EXPECT_EQ(back.actor().parameters(), agent.actor().parameters());
}

TEST(Ddpg, NoiseSchedule) {
  const DdpgConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.NoiseStddev(0, 100), 0.5);
  EXPECT_NEAR(cfg.NoiseStddev(30, 100), 0.275, 1e-12);
  EXPECT_DOUBLE_EQ(cfg.NoiseStddev(60, 100), 0.05);
  EXPECT_DOUBLE_EQ(cfg.NoiseStddev(99, 100), 0.05);
}

namespace {

std::shared_ptr<const data::MarketTable> CheapMarket(std::size_t hours) {
  return std::make_shared<const data::MarketTable>(fixtures::QuarterTable(hours * 4, [](std::size_t) {
    return fixtures::QuarterSpec{50, -300, 300, data::RegulationState::kBalanced};
  }));
}

env::EnvConfig TinyEnv() {
  env::EnvConfig c;
  c.da_observation = {data::Level::kDayAhead, {"da_price"}, 0};
  c.bm_observation = {data::Level::kBalancing, {"x"}, 0};
  c.bm_context_features = false;
  return c;
}

}  // namespace

TEST(Training, ZeroEpisodesGivesFreshAgents) {
  const env::MarketEnv env(CheapMarket(4), TinyEnv());
  TrainConfig cfg;
  cfg.episodes = 0;
  const TrainingResult r = TrainDualAgents(env, env.AllHours(), cfg);
  EXPECT_TRUE(r.curve.empty());
  EXPECT_EQ(r.da_agent.ParameterDump(), MakeDaAgent(env, cfg.da_agent, DaAgentSeed(cfg.seed)).ParameterDump());
}

TEST(Training, DeterministicAndDaDriftsToMax) {
  const env::MarketEnv env(CheapMarket(48), TinyEnv());
  TrainConfig cfg;
  cfg.episodes = 3000;
  cfg.seed = 21;
  const TrainingResult a = TrainDualAgents(env, env.AllHours(), cfg);
  const TrainingResult b = TrainDualAgents(env, env.AllHours(), cfg);
  EXPECT_EQ(a.da_agent.ParameterDump(), b.da_agent.ParameterDump());
  EXPECT_EQ(a.bm_agent.ParameterDump(), b.bm_agent.ParameterDump());
  double mean = 0;
  for (std::size_t i = a.da_actions.size() - 500; i < a.da_actions.size(); ++i) mean += a.da_actions[i];
  EXPECT_GT(mean / 500, 150.0);
}
