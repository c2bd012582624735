#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "powerarb/error.hpp"
#include "powerarb/market_table.hpp"
#include "powerarb/observation.hpp"
#include "powerarb/rng.hpp"
#include "powerarb/state_predictor.hpp"
#include "powerarb/synthetic.hpp"
#include "support.hpp"

using namespace powerarb;
using namespace powerarb::data;

namespace {

std::string QuarterCsv(int rows, int skip = -1) {
  std::ostringstream s;
  s << "timestamp,da_price,bm_bid_clearing,bm_ask_clearing,regulation_state,load\n";
  for (int i = 0; i < rows; ++i) {
    if (i == skip) continue;
    char ts[32];
    std::snprintf(ts, sizeof(ts), "2016-03-01T%02d:%02d:00Z", i / 4, (i % 4) * 15);
    s << ts << ",50,10,90," << (i % 2 ? "shortage" : "surplus") << "," << 1000 + i << "\n";
  }
  return s.str();
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kIoError;
}

}  // namespace

TEST(LoadMarketTable, QuarterHourDay) {
  std::istringstream in(QuarterCsv(96));
  const MarketTable t = ReadMarketTable(in, {{"load"}, Resolution::kQuarterHourly, false});
  EXPECT_EQ(t.size(), 96u);
  EXPECT_EQ(t.row(1).regulation_state, RegulationState::kShortage);
  EXPECT_DOUBLE_EQ(t.Column("load")[95], 1095.0);
}

TEST(LoadMarketTable, GapNamesMissingInterval) {
  std::istringstream in(QuarterCsv(96, 13));  // 03:15
  try {
    ReadMarketTable(in, {{"load"}, Resolution::kQuarterHourly, false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGapInTimestamps);
    EXPECT_NE(e.subject().find("03:15"), std::string::npos) << e.subject();
  }
}

TEST(LoadMarketTable, HourlyExpandsToQuarters) {
  std::istringstream in(
      "timestamp,da_price,bm_bid_clearing,bm_ask_clearing,regulation_state\n"
      "2016-03-01T00:00:00Z,41.5,0,80,balanced\n"
      "2016-03-01T01:00:00Z,63.25,0,80,shortage\n");
  const MarketTable t = ReadMarketTable(in, {{}, Resolution::kHourly, true});
  ASSERT_EQ(t.size(), 8u);
  EXPECT_EQ(t.resolution(), Resolution::kQuarterHourly);
  for (int i = 0; i < 8; ++i) {
    EXPECT_DOUBLE_EQ(t.row(i).da_price, i < 4 ? 41.5 : 63.25);
    EXPECT_EQ(t.row(i).timestamp, MakeTimestamp(2016, 3, 1, i / 4, (i % 4) * 15));
  }
}

TEST(LoadMarketTable, RejectsInvertedSpreadAndMissingColumn) {
  std::istringstream bad(
      "timestamp,da_price,bm_bid_clearing,bm_ask_clearing,regulation_state\n"
      "2016-03-01T00:00:00Z,41.5,90,80,balanced\n");
  EXPECT_EQ(CodeOf([&] { ReadMarketTable(bad, {{}, Resolution::kHourly, false}); }),
            ErrorCode::kInvalidRecord);
  std::istringstream in(QuarterCsv(4));
  EXPECT_EQ(CodeOf([&] { ReadMarketTable(in, {{"wind"}, Resolution::kQuarterHourly, false}); }),
            ErrorCode::kMissingColumn);
}

TEST(LoadMarketTable, WriteReadRoundTrip) {
  const MarketTable a = GenerateSyntheticMarket(SynthConfig{.days = 2});
  std::stringstream s;
  WriteMarketTable(s, a);
  const MarketTable b = ReadMarketTable(s, {SyntheticFundamentalNames(), Resolution::kQuarterHourly, false});
  ASSERT_EQ(a.size(), b.size());
  std::stringstream again;
  WriteMarketTable(again, b);
  std::stringstream first;
  WriteMarketTable(first, a);
  EXPECT_EQ(first.str(), again.str());
}

TEST(LaggedFeatures, ZeroLagIsIdentity) {
  const MarketTable t = fixtures::HourlyTable(48);
  const MarketTable l = BuildLaggedFeatures(t, {{{"x", 0}}});
  EXPECT_EQ(l.Column("x_lag0"), t.Column("x"));
}

TEST(LaggedFeatures, Lag24PointsAtHourOne) {
  const MarketTable t = fixtures::HourlyTable(48);
  const MarketTable l = BuildLaggedFeatures(t, {{{"x", 24}}});
  ASSERT_EQ(l.size(), 24u);
  // Output row 0 is hour 25 (x = 25); its lag-24 value is x at hour 1.
  EXPECT_DOUBLE_EQ(l.Column("x")[0], 25.0);
  EXPECT_DOUBLE_EQ(l.Column("x_lag24")[0], 1.0);
}

TEST(LaggedFeatures, TwoLagsOnOneFeature) {
  const MarketTable t = fixtures::HourlyTable(30);
  const MarketTable l = BuildLaggedFeatures(t, {{{"x", 1}, {"x", 24}}});
  ASSERT_EQ(l.size(), 6u);
  const auto x = l.Column("x"), a = l.Column("x_lag1"), b = l.Column("x_lag24");
  for (std::size_t i = 0; i < l.size(); ++i) {
    EXPECT_DOUBLE_EQ(x[i], 25.0 + i);
    EXPECT_DOUBLE_EQ(a[i], 24.0 + i);
    EXPECT_DOUBLE_EQ(b[i], 1.0 + i);
  }
}

TEST(LaggedFeatures, LagsCompose) {
  const MarketTable t = GenerateSyntheticMarket(SynthConfig{.days = 3});
  for (auto [a, b] : {std::pair{1, 4}, std::pair{4, 96}, std::pair{7, 0}}) {
    const MarketTable once = BuildLaggedFeatures(t, {{{"da_price", a}}});
    const MarketTable twice = BuildLaggedFeatures(once, {{{"da_price_lag" + std::to_string(a), b}}});
    const MarketTable direct = BuildLaggedFeatures(t, {{{"da_price", a + b}}});
    const auto composed = twice.Column(LagColumnName(LagColumnName("da_price", a), b));
    const auto single = direct.Column(LagColumnName("da_price", a + b));
    ASSERT_EQ(composed.size(), single.size());
    EXPECT_EQ(composed, single) << a << "+" << b;
  }
}

TEST(LaggedFeatures, Errors) {
  const MarketTable t = fixtures::HourlyTable(10);
  EXPECT_EQ(CodeOf([&] { BuildLaggedFeatures(t, {{{"x", -1}}}); }), ErrorCode::kInvalidLagSpec);
  EXPECT_EQ(CodeOf([&] { BuildLaggedFeatures(t, {{{"x", 10}}}); }), ErrorCode::kLagExceedsHistory);
  EXPECT_EQ(CodeOf([&] { BuildLaggedFeatures(t, {{{"nope", 1}}}); }), ErrorCode::kMissingColumn);
}

TEST(Observation, Dimensions) {
  const MarketTable t = fixtures::HourlyTable(100);
  EXPECT_EQ(ObservationDimension({Level::kDayAhead, {"x", "da_price"}, 3}, Resolution::kHourly), 144u);
  EXPECT_EQ(ObservationDimension({Level::kDayAhead, {"a", "b", "c", "d", "e"}, 0}, Resolution::kHourly), 5u);
  const ObservationBuilder b(t, {Level::kDayAhead, {"x", "da_price"}, 3});
  EXPECT_EQ(b.dimension(), 144u);
  EXPECT_EQ(b.first_valid_row(), 71u);
  const auto v = b.AtRow(80);
  EXPECT_EQ(v.size(), 144);
  // Oldest sample first, features in spec order.
  EXPECT_DOUBLE_EQ(v[0], 10.0);
  EXPECT_DOUBLE_EQ(v[143], 40.0 + 80.0);
  EXPECT_EQ(CodeOf([&] { b.AtRow(70); }), ErrorCode::kInsufficientHistory);
}

TEST(Observation, DeterministicAndStandardized) {
  const MarketTable t = GenerateSyntheticMarket(SynthConfig{.days = 5});
  const ObservationSpec spec{Level::kBalancing, {"da_price", "regulation_state"}, 1};
  const Standardizer z = Standardizer::Fit(t, {"da_price"}, t.start(), t.end());
  const ObservationBuilder b(t, spec, &z);
  const auto r = b.first_valid_row() + 17;
  const auto v1 = b.AtRow(r), v2 = b.AtRow(r);
  ASSERT_EQ(v1.size(), v2.size());
  EXPECT_EQ(0, std::memcmp(v1.data(), v2.data(), sizeof(double) * v1.size()));
  EXPECT_DOUBLE_EQ(v1[v1.size() - 2], (t.row(r).da_price - z.means()[0]) / z.stddevs()[0]);
  EXPECT_DOUBLE_EQ(v1[v1.size() - 1], EncodeRegulation(t.row(r).regulation_state));
}

TEST(Synthetic, SeedDeterminism) {
  SynthConfig c{.days = 20, .seed = 11};
  std::stringstream a, b, d;
  WriteMarketTable(a, GenerateSyntheticMarket(c));
  WriteMarketTable(b, GenerateSyntheticMarket(c));
  c.seed = 12;
  WriteMarketTable(d, GenerateSyntheticMarket(c));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), d.str());
}

TEST(Synthetic, DegenerateShortage) {
  const MarketTable t = GenerateSyntheticMarket(SynthConfig{.days = 10, .shortage_base_prob = 1.0});
  for (const auto& r : t.rows()) ASSERT_EQ(r.regulation_state, RegulationState::kShortage);
}

TEST(Synthetic, ShortageFrequency) {
  const MarketTable t = GenerateSyntheticMarket(SynthConfig{.days = 365, .shortage_base_prob = 0.4});
  ASSERT_EQ(t.size(), 35040u);
  double shortage = 0;
  for (const auto& r : t.rows()) shortage += r.regulation_state == RegulationState::kShortage;
  EXPECT_NEAR(shortage / t.size(), 0.4, 0.02);
}

TEST(Predictor, ZeroWeightsGiveHalf) {
  StatePredictor p{{"a", "b"}, {0, 0}, {0, 0}, {1, 1}, 0.0};
  const double x[] = {3.0, -7.0};
  EXPECT_DOUBLE_EQ(PredictStateProb(p, x), 0.5);
  p.bias = 50;
  EXPECT_GT(PredictStateProb(p, x), 1 - 1e-9);
  const double y[] = {1.0};
  EXPECT_EQ(CodeOf([&] { PredictStateProb(p, y); }), ErrorCode::kDimensionMismatch);
}

TEST(Predictor, HandPredictor) {
  const StatePredictor p{{"a"}, {1.0}, {0.0}, {1.0}, 0.0};
  const double x[] = {std::log(3.0)};
  EXPECT_NEAR(PredictStateProb(p, x), 0.75, 1e-12);
}

TEST(Predictor, OneDimensionalSeparator) {
  Eigen::MatrixXd X(2, 1);
  X << -1, 1;
  Eigen::VectorXd y(2);
  y << 0, 1;
  const auto fit = FitStatePredictor(X, y, {"x"}, {.learning_rate = 0, .iterations = 10000, .l2 = 0});
  EXPECT_GT(fit.predictor.weights[0], 0.0);
  const double lo[] = {-1.0}, hi[] = {1.0};
  EXPECT_LT(PredictStateProb(fit.predictor, lo), 0.5);
  EXPECT_GT(PredictStateProb(fit.predictor, hi), 0.5);
}

TEST(Predictor, SeparableBlobs) {
  Rng rng(3);
  const int n = 2000;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % 2;
    const double c = y[i] ? 2.0 : -2.0;  // centers 4 sigma apart
    X(i, 0) = c + rng.Normal();
    X(i, 1) = -c + rng.Normal();
  }
  const auto fit = FitStatePredictor(X.topRows(n / 2), y.head(n / 2), {"a", "b"});
  int correct = 0;
  for (int i = n / 2; i < n; ++i) {
    const double x[] = {X(i, 0), X(i, 1)};
    correct += (PredictStateProb(fit.predictor, x) >= 0.5) == (y[i] == 1.0);
  }
  EXPECT_GE(correct / double(n / 2), 0.99);
}

TEST(Predictor, LossMonotoneAndGradientMatchesFiniteDifferences) {
  Rng rng(5);
  const int n = 300;
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = rng.Normal();
    y[i] = rng.Bernoulli(1.0 / (1.0 + std::exp(-(X(i, 0) - 0.5 * X(i, 2))))) ? 1.0 : 0.0;
  }
  const auto fit = FitStatePredictor(X, y, {"a", "b", "c"}, {.iterations = 500, .tolerance = 0});
  for (std::size_t k = 1; k < fit.loss_history.size(); ++k) {
    ASSERT_LE(fit.loss_history[k], fit.loss_history[k - 1] + 1e-15) << k;
  }

  const double h = 1e-6;
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd w(4);
    for (int j = 0; j < 4; ++j) w[j] = rng.Normal();
    Eigen::VectorXd grad;
    LogisticLoss(X, y, w.head(3), w[3], 1e-3, &grad);
    for (int j = 0; j < 4; ++j) {
      Eigen::VectorXd up = w, dn = w;
      up[j] += h;
      dn[j] -= h;
      const double fd = (LogisticLoss(X, y, up.head(3), up[3], 1e-3, nullptr) -
                         LogisticLoss(X, y, dn.head(3), dn[3], 1e-3, nullptr)) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad[j]) / std::max(1e-8, std::abs(fd) + std::abs(grad[j])));
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Predictor, SerializationRoundTrip) {
  const StatePredictor p{{"a", "b"}, {0.1 / 3, -2.0 / 7}, {1e-5, 123.456789}, {3.0, 0.7}, 1.0 / 9};
  std::stringstream s;
  WriteStatePredictor(s, p);
  const StatePredictor q = ReadStatePredictor(s);
  EXPECT_EQ(q.feature_names, p.feature_names);
  EXPECT_EQ(q.weights, p.weights);
  EXPECT_EQ(q.means, p.means);
  EXPECT_EQ(q.stddevs, p.stddevs);
  EXPECT_EQ(q.bias, p.bias);
}
