#ifndef POWERARB_POLICIES_HPP
#define POWERARB_POLICIES_HPP

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "powerarb/clearing.hpp"
#include "powerarb/market_table.hpp"
#include "powerarb/pnl.hpp"

namespace powerarb::policies {

// Heuristic benchmarks:
//   P1  150 MWh day-ahead; bid -100 / ask +100 single-price orders.
//   P2  200 MWh day-ahead, no balancing orders.
//   P3  200 MWh if p_h > p_da else 20 MWh, no balancing orders.
//   P4  day-ahead from the live agent (150 MWh standalone); full equal-weight ladders.
//   P5  P3's day-ahead rule; full equal-weight ladders.
enum class BenchmarkId { kP1, kP2, kP3, kP4, kP5 };

inline constexpr std::array<BenchmarkId, 5> kAllBenchmarks = {
    BenchmarkId::kP1, BenchmarkId::kP2, BenchmarkId::kP3, BenchmarkId::kP4, BenchmarkId::kP5};

inline constexpr double kP1Position = 150.0;
inline constexpr double kP1Bid = -100.0;
inline constexpr double kP1Ask = 100.0;
inline constexpr double kStandaloneP4Position = 150.0;

std::string_view BenchmarkName(BenchmarkId id);
BenchmarkId ParseBenchmark(std::string_view name);

enum class Phase { kDayAhead, kBalancing };

env::DaAction BenchmarkDaAction(BenchmarkId id, const env::PriceContext& ctx,
                                std::optional<env::DaAction> da_agent_hint = std::nullopt);
env::BmOrder BenchmarkBmOrder(BenchmarkId id, const env::VolumeBounds& volumes);

using BenchmarkDecision = std::variant<env::DaAction, env::BmOrder>;

// `volumes` sizes the balancing ladders; it is ignored in the day-ahead phase.
BenchmarkDecision BenchmarkAction(BenchmarkId id, Phase phase, const env::PriceContext& ctx,
                                  std::optional<env::DaAction> da_agent_hint = std::nullopt,
                                  const env::VolumeBounds& volumes = {});

// One policy's P&L for a single quarter, simulated from scratch on `ctx`.
double BenchmarkQuarterPnl(BenchmarkId id, const env::PriceContext& ctx,
                           std::optional<env::DaAction> da_agent_hint, bool literal_eq1 = false);

std::vector<double> BaselineQuarterPnls(std::span<const BenchmarkId> ids,
                                        const env::PriceContext& ctx,
                                        std::optional<env::DaAction> da_agent_hint,
                                        bool literal_eq1 = false);

struct BenchmarkRunOptions {
  double hydrogen_price = env::kHydrogenPrice;
  bool literal_eq1 = false;
};

// Replays the policy hour by hour over [begin, end) with unshaped rewards.
PnlSeries RunBenchmark(BenchmarkId id, const data::MarketTable& market, Timestamp begin,
                       Timestamp end, const BenchmarkRunOptions& options = {});

}  // namespace powerarb::policies

#endif  // POWERARB_POLICIES_HPP
