#include "powerarb/training.hpp"

#include <cstdio>
#include <ostream>

#include "powerarb/error.hpp"

namespace powerarb::rl {

VectorXd DaActionLow() { return VectorXd::Constant(1, env::kMinDaVolume); }
VectorXd DaActionHigh() { return VectorXd::Constant(1, env::kMaxDaVolume); }
VectorXd BmActionLow() { return VectorXd::Constant(2, env::kMinBmPrice); }
VectorXd BmActionHigh() { return VectorXd::Constant(2, env::kMaxBmPrice); }

std::uint64_t DaAgentSeed(std::uint64_t seed) { return Rng::SplitMix(seed ^ 0xDA); }
std::uint64_t BmAgentSeed(std::uint64_t seed) { return Rng::SplitMix(seed ^ 0xB3); }
std::uint64_t EpisodeSeed(std::uint64_t seed) { return Rng::SplitMix(seed ^ 0xE9); }

DdpgAgent MakeDaAgent(const env::MarketEnv& environment, const DdpgConfig& config,
                      std::uint64_t seed) {
  return DdpgAgent(static_cast<int>(environment.da_observation_dim()), DaActionLow(),
                   DaActionHigh(), config, seed);
}

DdpgAgent MakeBmAgent(const env::MarketEnv& environment, const DdpgConfig& config,
                      std::uint64_t seed) {
  return DdpgAgent(static_cast<int>(environment.bm_observation_dim()), BmActionLow(),
                   BmActionHigh(), config, seed);
}

env::BmOrder MakeBmOrder(const VectorXd& bm_action, const env::VolumeBounds& bounds, bool ladder) {
  const env::BmAction prices{bm_action(0), bm_action(1)};
  if (ladder) return env::BuildLadder(prices, bounds);
  return prices;
}

TrainingResult TrainDualAgents(const env::MarketEnv& environment,
                               const std::vector<std::size_t>& train_hours,
                               const TrainConfig& config, const ProgressCallback& progress) {
  TrainingResult result{MakeDaAgent(environment, config.da_agent, DaAgentSeed(config.seed)),
                        MakeBmAgent(environment, config.bm_agent, BmAgentSeed(config.seed)),
                        {},
                        {}};
  if (config.episodes == 0) return result;
  if (train_hours.empty()) throw Error(ErrorCode::kCoverageGap, "no training hours");
  if (config.moving_average_window == 0) {
    throw Error(ErrorCode::kInvalidConfig, "moving_average_window must be positive",
                "moving_average_window");
  }

  DdpgAgent& da = result.da_agent;
  DdpgAgent& bm = result.bm_agent;
  Rng episode_rng(EpisodeSeed(config.seed));
  Rng noise_rng(Rng::SplitMix(config.seed ^ 0x17));
  const bool ladder = config.UsesLadder();
  double window_sum = 0.0;
  result.curve.reserve(config.episodes);
  result.da_actions.reserve(config.episodes);

  for (std::size_t ep = 0; ep < config.episodes; ++ep) {
    const std::size_t hour = train_hours[episode_rng.UniformInt(train_hours.size())];
    VectorXd da_obs;
    env::EpisodeState state = environment.Reset(hour, &da_obs);

    VectorXd da_raw;
    const VectorXd da_action = da.SelectAction(da_obs, true, noise_rng,
                                               config.da_agent.NoiseStddev(ep, config.episodes),
                                               &da_raw);
    VectorXd bm_obs = environment.StepDayAhead(state, env::DaAction{da_action(0)});
    result.da_actions.push_back(state.s_da);

    const double bm_noise = config.bm_agent.NoiseStddev(ep, config.episodes);
    while (!state.done) {
      VectorXd bm_raw;
      const VectorXd bm_action = bm.SelectAction(bm_obs, true, noise_rng, bm_noise, &bm_raw);
      const env::BmOrder order = MakeBmOrder(bm_action, environment.Bounds(state), ladder);
      env::StepResult step = environment.StepBalancing(state, order, config.reward_mode);
      Transition t;
      t.observation = std::move(bm_obs);
      t.raw_action = std::move(bm_raw);
      t.action = bm_action;
      t.reward = step.reward;
      t.terminal = step.done;
      if (!step.done) t.next_observation = step.next_observation;
      bm_obs = std::move(step.next_observation);
      bm.Store(std::move(t));
    }

    Transition da_t;
    da_t.observation = std::move(da_obs);
    da_t.raw_action = std::move(da_raw);
    da_t.action = da_action;
    da_t.reward = state.cumulative_shaped;
    da_t.terminal = true;
    da.Store(std::move(da_t));

    for (std::size_t u = 0; u < config.updates_per_episode; ++u) {
      if (da.replay().size() >= config.da_agent.batch_size) da.Update();
      if (bm.replay().size() >= config.bm_agent.batch_size) bm.Update();
    }

    CurvePoint point;
    point.episode = ep;
    point.raw_reward = state.cumulative_pnl;
    point.shaped_reward = state.cumulative_shaped;
    window_sum += point.raw_reward;
    if (ep >= config.moving_average_window) {
      window_sum -= result.curve[ep - config.moving_average_window].raw_reward;
    }
    point.moving_average =
        window_sum / static_cast<double>(std::min(ep + 1, config.moving_average_window));
    result.curve.push_back(point);
    if (progress) progress(point);
  }
  return result;
}

void WriteTrainingCurve(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "episode,raw_reward,shaped_reward,moving_average\n";
  char buf[160];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", p.episode, p.raw_reward,
                  p.shaped_reward, p.moving_average);
    out << buf;
  }
}

Evaluation EvaluateAgents(const env::MarketEnv& environment, const DdpgAgent& da_agent,
                          const DdpgAgent& bm_agent, const std::vector<std::size_t>& hours,
                          bool ladder, bool record_trace) {
  Evaluation eval;
  Rng unused(0);
  for (std::size_t hour : hours) {
    VectorXd da_obs;
    env::EpisodeState state = environment.Reset(hour, &da_obs);
    const VectorXd da_action = da_agent.SelectAction(da_obs, false, unused, 0.0);
    VectorXd bm_obs = environment.StepDayAhead(state, env::DaAction{da_action(0)});
    eval.da_actions.push_back(state.s_da);
    if (record_trace) eval.trace.push_back(env::DayAheadTraceRow(state));
    while (!state.done) {
      const VectorXd bm_action = bm_agent.SelectAction(bm_obs, false, unused, 0.0);
      eval.bid_prices.push_back(bm_action(0));
      eval.ask_prices.push_back(bm_action(1));
      const env::BmOrder order = MakeBmOrder(bm_action, environment.Bounds(state), ladder);
      const env::EpisodeState before = state;
      const env::PriceContext ctx = environment.QuarterContext(state);
      env::StepResult step = environment.StepBalancing(state, order, env::RewardMode::kRaw);
      if (record_trace) eval.trace.push_back(env::BalancingTraceRow(before, ctx, order, step));
      bm_obs = std::move(step.next_observation);
    }
    eval.pnl.Append(state.hour_start, state.cumulative_pnl);
  }
  return eval;
}

}  // namespace powerarb::rl
