#include <gtest/gtest.h>

#include <variant>

#include "powerarb/error.hpp"
#include "powerarb/policies.hpp"
#include "powerarb/rng.hpp"
#include "powerarb/synthetic.hpp"
#include "support.hpp"

using namespace powerarb;
using namespace powerarb::policies;
using data::RegulationState;

namespace {

env::PriceContext Ctx(double p_da, RegulationState s = RegulationState::kBalanced) {
  env::PriceContext c;
  c.p_da = p_da;
  c.regulation_state = s;
  c.bm_bid_clearing = -50;
  c.bm_ask_clearing = 150;
  return c;
}

data::MarketTable Constant(double p_da, std::size_t hours) {
  return fixtures::QuarterTable(hours * 4, [p_da](std::size_t) {
    return fixtures::QuarterSpec{p_da, 0, 100, RegulationState::kBalanced};
  });
}

}  // namespace

TEST(Benchmarks, P3DayAheadRule) {
  EXPECT_DOUBLE_EQ(BenchmarkDaAction(BenchmarkId::kP3, Ctx(80)).s_da, 20);
  EXPECT_DOUBLE_EQ(BenchmarkDaAction(BenchmarkId::kP3, Ctx(60)).s_da, 200);
  EXPECT_DOUBLE_EQ(BenchmarkDaAction(BenchmarkId::kP2, Ctx(80)).s_da, 200);
}

TEST(Benchmarks, BalancingOrders) {
  const env::VolumeBounds v{25, 20};
  const auto p1 = std::get<env::BmAction>(BenchmarkBmOrder(BenchmarkId::kP1, v));
  EXPECT_DOUBLE_EQ(p1.p_bid, -100);
  EXPECT_DOUBLE_EQ(p1.p_ask, 100);
  const auto p4 = std::get<env::TranchedOrder>(BenchmarkBmOrder(BenchmarkId::kP4, v));
  ASSERT_EQ(p4.ask.levels.size(), 11u);
  EXPECT_DOUBLE_EQ(p4.ask.levels.front().price, 75);
  EXPECT_DOUBLE_EQ(p4.ask.levels.back().price, 275);
  for (const auto& l : p4.ask.levels) EXPECT_DOUBLE_EQ(l.volume, 20.0 / 11);
  EXPECT_TRUE(std::holds_alternative<env::NoOrder>(BenchmarkBmOrder(BenchmarkId::kP2, v)));
}

TEST(Benchmarks, P2OnConstantMarkets) {
  const data::MarketTable at_cost = Constant(75, 24);
  EXPECT_DOUBLE_EQ(RunBenchmark(BenchmarkId::kP2, at_cost, at_cost.start(), at_cost.end()).total(), 0);
  const data::MarketTable cheap = Constant(50, 24);
  const PnlSeries s = RunBenchmark(BenchmarkId::kP2, cheap, cheap.start(), cheap.end());
  ASSERT_EQ(s.size(), 24u);
  EXPECT_DOUBLE_EQ(s.total(), 200.0 * 25 * 24);
  EXPECT_THROW(RunBenchmark(BenchmarkId::kP2, cheap, cheap.start(), cheap.end() + 3600), Error);
}

TEST(Benchmarks, P3DominatesP2OnRandomHours) {
  Rng rng(9);
  for (int i = 0; i < 10000; ++i) {
    env::PriceContext c = Ctx(rng.Uniform(-100, 300), static_cast<RegulationState>(rng.UniformInt(3)));
    c.bm_bid_clearing = rng.Uniform(-300, 100);
    c.bm_ask_clearing = c.bm_bid_clearing + rng.Uniform(0, 300);
    const double p3 = BenchmarkQuarterPnl(BenchmarkId::kP3, c, std::nullopt);
    const double p2 = BenchmarkQuarterPnl(BenchmarkId::kP2, c, std::nullopt);
    ASSERT_GE(p3, p2) << c.p_da;
  }
}

TEST(Benchmarks, BaselineExamples) {
  const BenchmarkId p2[] = {BenchmarkId::kP2};
  EXPECT_EQ(BaselineQuarterPnls(p2, Ctx(75), std::nullopt), std::vector<double>{0.0});
  const BenchmarkId three[] = {BenchmarkId::kP1, BenchmarkId::kP2, BenchmarkId::kP3};
  const auto b = BaselineQuarterPnls(three, Ctx(60), std::nullopt);
  EXPECT_DOUBLE_EQ(b[0], 37.5 * 15);
  EXPECT_DOUBLE_EQ(b[1], 750);
  EXPECT_DOUBLE_EQ(b[2], 750);
}

TEST(Benchmarks, P1ExecutesOnlyBeyondHundred) {
  env::PriceContext c = Ctx(60, RegulationState::kShortage);
  c.bm_ask_clearing = 99.9;
  const double base = 37.5 * 15;
  EXPECT_DOUBLE_EQ(BenchmarkQuarterPnl(BenchmarkId::kP1, c, std::nullopt), base);
  c.bm_ask_clearing = 100;
  EXPECT_DOUBLE_EQ(BenchmarkQuarterPnl(BenchmarkId::kP1, c, std::nullopt),
                   (37.5 - 32.5) * 75 - 37.5 * 60 + 32.5 * 100);
}

TEST(Benchmarks, Determinism) {
  const data::MarketTable t = data::GenerateSyntheticMarket(data::SynthConfig{.days = 4});
  for (BenchmarkId id : kAllBenchmarks) {
    const PnlSeries a = RunBenchmark(id, t, t.start(), t.end());
    const PnlSeries b = RunBenchmark(id, t, t.start(), t.end());
    EXPECT_EQ(a.hourly, b.hourly) << BenchmarkName(id);
  }
}
