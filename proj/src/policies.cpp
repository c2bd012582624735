#include "powerarb/policies.hpp"

#include <memory>

#include "powerarb/error.hpp"
#include "powerarb/market_env.hpp"

namespace powerarb::policies {

std::string_view BenchmarkName(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::kP1: return "P1";
    case BenchmarkId::kP2: return "P2";
    case BenchmarkId::kP3: return "P3";
    case BenchmarkId::kP4: return "P4";
    case BenchmarkId::kP5: return "P5";
  }
  return "P1";
}

BenchmarkId ParseBenchmark(std::string_view name) {
  for (BenchmarkId id : kAllBenchmarks) {
    if (BenchmarkName(id) == name) return id;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown benchmark '" + std::string(name) + "'",
              std::string(name));
}

namespace {

env::DaAction ConditionalPosition(const env::PriceContext& ctx) {
  return env::DaAction{ctx.p_h > ctx.p_da ? env::kMaxDaVolume : env::kMinDaVolume};
}

}  // namespace

env::DaAction BenchmarkDaAction(BenchmarkId id, const env::PriceContext& ctx,
                                std::optional<env::DaAction> hint) {
  switch (id) {
    case BenchmarkId::kP1: return env::DaAction{kP1Position};
    case BenchmarkId::kP2: return env::DaAction{env::kMaxDaVolume};
    case BenchmarkId::kP3: return ConditionalPosition(ctx);
    case BenchmarkId::kP4: return hint.value_or(env::DaAction{kStandaloneP4Position});
    case BenchmarkId::kP5: return ConditionalPosition(ctx);
  }
  return env::DaAction{};
}

env::BmOrder BenchmarkBmOrder(BenchmarkId id, const env::VolumeBounds& volumes) {
  switch (id) {
    case BenchmarkId::kP1: return env::BmAction{kP1Bid, kP1Ask};
    case BenchmarkId::kP2:
    case BenchmarkId::kP3: return env::NoOrder{};
    case BenchmarkId::kP4:
    case BenchmarkId::kP5: return env::FullLadder(volumes);
  }
  return env::NoOrder{};
}

BenchmarkDecision BenchmarkAction(BenchmarkId id, Phase phase, const env::PriceContext& ctx,
                                  std::optional<env::DaAction> hint,
                                  const env::VolumeBounds& volumes) {
  if (phase == Phase::kDayAhead) return BenchmarkDaAction(id, ctx, hint);
  return BenchmarkBmOrder(id, volumes);
}

double BenchmarkQuarterPnl(BenchmarkId id, const env::PriceContext& ctx,
                           std::optional<env::DaAction> hint, bool literal_eq1) {
  const double s_da = BenchmarkDaAction(id, ctx, hint).s_da;
  const env::VolumeBounds volumes = env::FeasibleVolumeBounds(s_da / env::kQuartersPerHour);
  const env::Execution exec = env::ClearOrders(BenchmarkBmOrder(id, volumes), volumes, ctx);
  return env::QuarterReward(exec, s_da, ctx, literal_eq1).unshaped();
}

std::vector<double> BaselineQuarterPnls(std::span<const BenchmarkId> ids,
                                        const env::PriceContext& ctx,
                                        std::optional<env::DaAction> hint, bool literal_eq1) {
  std::vector<double> out;
  out.reserve(ids.size());
  for (BenchmarkId id : ids) out.push_back(BenchmarkQuarterPnl(id, ctx, hint, literal_eq1));
  return out;
}

PnlSeries RunBenchmark(BenchmarkId id, const data::MarketTable& market, Timestamp begin,
                       Timestamp end, const BenchmarkRunOptions& options) {
  if (market.empty() || begin >= end || begin < market.start() || end > market.end()) {
    throw Error(ErrorCode::kPeriodOutOfRange,
                "period [" + FormatIso8601(begin) + ", " + FormatIso8601(end) +
                    ") is not covered by the market");
  }
  env::EnvConfig config;
  config.hydrogen_price = options.hydrogen_price;
  config.literal_eq1 = options.literal_eq1;
  config.bm_context_features = false;
  // Benchmarks need no observations; the market is shared, not copied.
  const env::MarketEnv environment(
      std::shared_ptr<const data::MarketTable>(&market, [](const data::MarketTable*) {}), config);

  PnlSeries series;
  for (std::size_t hour : environment.HoursIn(begin, end)) {
    env::EpisodeState state = environment.Reset(hour);
    const env::PriceContext ctx = environment.QuarterContext(state);
    environment.StepDayAhead(state, BenchmarkDaAction(id, ctx));
    while (!state.done) {
      const env::BmOrder order = BenchmarkBmOrder(id, environment.Bounds(state));
      environment.StepBalancing(state, order, env::RewardMode::kRaw);
    }
    series.Append(state.hour_start, state.cumulative_pnl);
  }
  return series;
}

}  // namespace powerarb::policies
