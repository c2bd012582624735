#ifndef POWERARB_TRAINING_HPP
#define POWERARB_TRAINING_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "powerarb/ddpg.hpp"
#include "powerarb/market_env.hpp"
#include "powerarb/pnl.hpp"

namespace powerarb::rl {

struct TrainConfig {
  std::size_t episodes = 50000;
  env::RewardMode reward_mode = env::RewardMode::kRaw;
  // Ladder orders; implied by the tranched reward modes.
  bool ladder = false;
  std::uint64_t seed = 7;
  DdpgConfig da_agent;
  DdpgConfig bm_agent = [] {
    DdpgConfig c;
    c.preactivation_penalty = 0.1;
    return c;
  }();
  std::size_t updates_per_episode = 1;
  std::size_t moving_average_window = 100;

  bool UsesLadder() const { return ladder || env::IsTranched(reward_mode); }
};

struct CurvePoint {
  std::size_t episode = 0;
  double raw_reward = 0.0;
  double shaped_reward = 0.0;
  double moving_average = 0.0;
};

struct TrainingResult {
  DdpgAgent da_agent;
  DdpgAgent bm_agent;
  std::vector<CurvePoint> curve;
  std::vector<double> da_actions;  // per episode, including exploration
};

// Bounds of the two agents' actions.
VectorXd DaActionLow();
VectorXd DaActionHigh();
VectorXd BmActionLow();
VectorXd BmActionHigh();

DdpgAgent MakeDaAgent(const env::MarketEnv& environment, const DdpgConfig& config,
                      std::uint64_t seed);
DdpgAgent MakeBmAgent(const env::MarketEnv& environment, const DdpgConfig& config,
                      std::uint64_t seed);

// Per-role seeds derived from the run seed.
std::uint64_t DaAgentSeed(std::uint64_t seed);
std::uint64_t BmAgentSeed(std::uint64_t seed);
std::uint64_t EpisodeSeed(std::uint64_t seed);

env::BmOrder MakeBmOrder(const VectorXd& bm_action, const env::VolumeBounds& bounds, bool ladder);

using ProgressCallback = std::function<void(const CurvePoint&)>;

// Episodes sample training hours uniformly. The day-ahead agent stores one
// terminal transition per episode rewarded with the hour's summed quarter
// rewards; the balancing agent stores four chained quarter transitions.
TrainingResult TrainDualAgents(const env::MarketEnv& environment,
                               const std::vector<std::size_t>& train_hours,
                               const TrainConfig& config,
                               const ProgressCallback& progress = nullptr);

void WriteTrainingCurve(std::ostream& out, const std::vector<CurvePoint>& curve);

struct Evaluation {
  PnlSeries pnl;
  std::vector<env::TraceRow> trace;
  std::vector<double> da_actions;
  std::vector<double> bid_prices;
  std::vector<double> ask_prices;
};

// Greedy rollout over the given hours with unshaped accounting.
Evaluation EvaluateAgents(const env::MarketEnv& environment, const DdpgAgent& da_agent,
                          const DdpgAgent& bm_agent, const std::vector<std::size_t>& hours,
                          bool ladder, bool record_trace = false);

}  // namespace powerarb::rl

#endif  // POWERARB_TRAINING_HPP
