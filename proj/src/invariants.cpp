#include "powerarb/invariants.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include "powerarb/error.hpp"
#include "powerarb/market_env.hpp"
#include "powerarb/policies.hpp"
#include "powerarb/rng.hpp"

namespace powerarb::invariants {
namespace {

std::shared_ptr<const data::MarketTable> Borrow(const data::MarketTable& market) {
  return {&market, [](const data::MarketTable*) {}};
}

env::MarketEnv PlainEnv(const data::MarketTable& market) {
  env::EnvConfig c;
  c.bm_context_features = false;
  return env::MarketEnv(Borrow(market), c);
}

env::BmOrder RandomOrder(Rng& rng, const env::VolumeBounds& bounds) {
  switch (rng.UniformInt(4)) {
    case 0: return env::NoOrder{};
    case 1: return env::BmAction{rng.Uniform(-200.0, 200.0), rng.Uniform(-200.0, 200.0)};
    case 2: return env::FullLadder(bounds);
    default:
      return env::BuildLadder({rng.Uniform(-200.0, 200.0), rng.Uniform(-200.0, 200.0)}, bounds);
  }
}

CheckResult Result(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

std::string Fmt(const char* fmt, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), fmt, a, b);
  return buf;
}

}  // namespace

CheckResult CheckAccounting(const data::MarketTable& market, std::size_t episodes,
                            std::uint64_t seed) {
  const env::MarketEnv environment = PlainEnv(market);
  const auto hours = environment.AllHours();
  if (hours.empty()) return Result("accounting", false, "market has no complete hour");
  Rng rng(seed);
  double worst = 0.0, worst_zero = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    env::EpisodeState st = environment.Reset(hours[rng.UniformInt(hours.size())]);
    environment.StepDayAhead(st, {rng.Uniform(env::kMinDaVolume, env::kMaxDaVolume)});
    const bool trade = rng.Bernoulli(0.5);
    while (!st.done) {
      const env::BmOrder order =
          trade ? RandomOrder(rng, environment.Bounds(st)) : env::BmOrder{env::NoOrder{}};
      environment.StepBalancing(st, order, env::RewardMode::kRaw);
    }
    worst = std::max(worst, std::fabs(env::HourlyReward(st.quarter_rewards) - st.cumulative_pnl));
    if (!trade) {
      const double p_da = market.row(st.first_row).da_price;
      worst_zero = std::max(worst_zero,
                            std::fabs(st.cumulative_pnl - st.s_da * (env::kHydrogenPrice - p_da)));
    }
  }
  return Result("accounting", worst <= 1e-9 && worst_zero <= 1e-9,
                Fmt("max |hourly - sum| = %.3g, max |no-fill - s_da(p_h - p_da)| = %.3g", worst,
                    worst_zero));
}

CheckResult CheckShapingNeutrality(const data::MarketTable& market, std::size_t episodes,
                                   std::uint64_t seed) {
  const env::MarketEnv environment = PlainEnv(market);
  const auto hours = environment.AllHours();
  if (hours.empty()) return Result("shaping_neutrality", false, "market has no complete hour");
  Rng rng(seed);
  std::size_t mismatches = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    const std::size_t hour = hours[rng.UniformInt(hours.size())];
    const double s_da = rng.Uniform(env::kMinDaVolume, env::kMaxDaVolume);
    const std::uint64_t order_seed = rng.NextU64();
    double reference = 0.0;
    bool first = true;
    for (env::RewardMode mode : {env::RewardMode::kRaw, env::RewardMode::kImitation,
                                 env::RewardMode::kTranched, env::RewardMode::kTranchedImitation}) {
      Rng orders(order_seed);
      env::EpisodeState st = environment.Reset(hour);
      environment.StepDayAhead(st, {s_da});
      while (!st.done) environment.StepBalancing(st, RandomOrder(orders, environment.Bounds(st)), mode);
      if (first) reference = st.cumulative_pnl;
      else if (st.cumulative_pnl != reference) ++mismatches;
      first = false;
    }
  }
  return Result("shaping_neutrality", mismatches == 0,
                std::to_string(mismatches) + " episodes with mode-dependent P&L");
}

CheckResult CheckFeasibility(const data::MarketTable& market, std::size_t episodes,
                             std::uint64_t seed) {
  const env::MarketEnv environment = PlainEnv(market);
  const auto hours = environment.AllHours();
  if (hours.empty()) return Result("feasibility", false, "market has no complete hour");
  Rng rng(seed);
  std::size_t violations = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    env::EpisodeState st = environment.Reset(hours[rng.UniformInt(hours.size())]);
    environment.StepDayAhead(st, {rng.Uniform(-100.0, 400.0)});
    while (!st.done) {
      env::BmOrder order = RandomOrder(rng, environment.Bounds(st));
      if (auto* single = std::get_if<env::BmAction>(&order)) {
        single->p_bid = rng.Uniform(-1000.0, 1000.0);
        single->p_ask = rng.Uniform(-1000.0, 1000.0);
      }
      const env::StepResult r = environment.StepBalancing(st, order, env::RewardMode::kRaw);
      if (r.net_consumption < env::kMinQuarterEnergy - env::kVolumeTolerance ||
          r.net_consumption > env::kMaxQuarterEnergy + env::kVolumeTolerance) {
        ++violations;
      }
    }
  }
  return Result("feasibility", violations == 0,
                std::to_string(violations) + " quarters outside [5, 50] MWh");
}

CheckResult CheckClearing(std::size_t cases, std::uint64_t seed) {
  Rng rng(seed);
  std::size_t mismatches = 0;
  for (std::size_t c = 0; c < cases; ++c) {
    env::PriceContext ctx;
    ctx.regulation_state = static_cast<data::RegulationState>(rng.UniformInt(3));
    ctx.bm_bid_clearing = rng.Uniform(-250.0, 150.0);
    ctx.bm_ask_clearing = rng.Uniform(0.0, 300.0);
    const double e = rng.Uniform(env::kMinQuarterEnergy, env::kMaxQuarterEnergy);
    const env::VolumeBounds bounds = env::FeasibleVolumeBounds(e);
    const env::TranchedOrder order =
        env::BuildLadder({rng.Uniform(-200.0, 200.0), rng.Uniform(-200.0, 200.0)}, bounds);
    const env::Execution exec = env::ClearOrders(order, bounds, ctx);
    double volume = 0.0, cash = 0.0;
    if (ctx.regulation_state == data::RegulationState::kSurplus) {
      for (const auto& l : order.bid.levels) {
        if (l.price >= ctx.bm_bid_clearing) {
          volume += l.volume;
          cash += l.volume * l.price;
        }
      }
    } else if (ctx.regulation_state == data::RegulationState::kShortage) {
      for (const auto& l : order.ask.levels) {
        if (l.price <= ctx.bm_ask_clearing) {
          volume -= l.volume;
          cash -= l.volume * l.price;
        }
      }
    }
    double exec_cash = 0.0;
    for (const auto& f : exec.fills) exec_cash += f.volume * f.price;
    if (exec.s_bm != volume || exec_cash != cash) ++mismatches;
  }
  return Result("clearing", mismatches == 0, std::to_string(mismatches) + " mismatching cases");
}

CheckResult CheckP3DominatesP2(const data::MarketTable& market) {
  if (market.empty()) return Result("p3_dominates_p2", false, "empty market");
  const PnlSeries p2 = policies::RunBenchmark(policies::BenchmarkId::kP2, market, market.start(), market.end());
  const PnlSeries p3 = policies::RunBenchmark(policies::BenchmarkId::kP3, market, market.start(), market.end());
  std::size_t violations = 0;
  for (std::size_t i = 0; i < p2.size(); ++i) {
    if (p3.hourly[i] < p2.hourly[i]) ++violations;
  }
  return Result("p3_dominates_p2", violations == 0 && p2.size() == p3.size(),
                std::to_string(violations) + " of " + std::to_string(p2.size()) +
                    " hours with P3 below P2");
}

CheckResult CheckPnlSeries(const std::string& name, const PnlSeries& series) {
  double sum = 0.0;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += series.hourly[i];
    if (series.cumulative[i] != sum || !std::isfinite(series.hourly[i])) ++bad;
    if (i > 0 && series.timestamps[i] <= series.timestamps[i - 1]) ++bad;
  }
  return Result("pnl_series:" + name, bad == 0, std::to_string(bad) + " inconsistent rows");
}

std::vector<CheckResult> RunMarketChecks(const data::MarketTable& market, std::uint64_t seed) {
  return {CheckAccounting(market, 1000, seed), CheckShapingNeutrality(market, 200, seed + 1),
          CheckFeasibility(market, 2000, seed + 2), CheckClearing(10000, seed + 3),
          CheckP3DominatesP2(market)};
}

}  // namespace powerarb::invariants
