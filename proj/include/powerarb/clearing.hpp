#ifndef POWERARB_CLEARING_HPP
#define POWERARB_CLEARING_HPP

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "powerarb/market_table.hpp"

namespace powerarb::env {

using data::RegulationState;

inline constexpr double kMinDaVolume = 20.0;     // MWh per hour
inline constexpr double kMaxDaVolume = 200.0;
inline constexpr double kMinBmPrice = -200.0;    // EUR/MWh
inline constexpr double kMaxBmPrice = 200.0;
inline constexpr double kHydrogenPrice = 75.0;   // EUR/MWh
inline constexpr double kQuartersPerHour = 4.0;
// Electrolyzer 20-200 MW over a quarter-hour.
inline constexpr double kMinQuarterEnergy = 5.0;
inline constexpr double kMaxQuarterEnergy = 50.0;

inline constexpr int kLadderLevels = 11;
inline constexpr double kLadderSpacing = 20.0;
inline constexpr double kAskLadderFirst = 75.0;    // 75, 95, ..., 275
inline constexpr double kBidLadderFirst = -125.0;  // -125, -105, ..., 75

// Slack for comparing volume sums built from equal splits.
inline constexpr double kVolumeTolerance = 1e-9;

struct DaAction {
  double s_da = kMinDaVolume;
};

// Single-price balancing order: one bid price and one ask price.
struct BmAction {
  double p_bid = 0.0;
  double p_ask = 0.0;
};

enum class Side { kBid, kAsk };

struct LadderLevel {
  double price = 0.0;
  double volume = 0.0;
};

struct LadderOrder {
  Side side = Side::kBid;
  std::vector<LadderLevel> levels;
};

struct TranchedOrder {
  LadderOrder bid{Side::kBid, {}};
  LadderOrder ask{Side::kAsk, {}};
};

struct NoOrder {};

using BmOrder = std::variant<NoOrder, BmAction, TranchedOrder>;

struct VolumeBounds {
  double max_bid_volume = 0.0;
  double max_ask_volume = 0.0;
};

// Signed volume: positive = bought through a bid, negative = sold through an ask.
struct Fill {
  double price = 0.0;
  double volume = 0.0;
};

struct Execution {
  double s_bm = 0.0;
  // Volume-weighted settlement price of the fills; 0 when nothing executed.
  double p_bm = 0.0;
  std::vector<Fill> fills;
};

struct PriceContext {
  double p_da = 0.0;
  double p_h = kHydrogenPrice;
  double bm_bid_clearing = 0.0;
  double bm_ask_clearing = 0.0;
  RegulationState regulation_state = RegulationState::kBalanced;
};

PriceContext ContextFromRecord(const data::MarketRecord& record, double hydrogen_price);

struct RewardBreakdown {
  double hydrogen_revenue = 0.0;
  double da_cost = 0.0;
  // Sum of volume * price over fills; negative when the quarter sold energy.
  double bm_cashflow = 0.0;
  double shaping_term = 0.0;
  double total = 0.0;

  double unshaped() const { return hydrogen_revenue - da_cost - bm_cashflow; }
};

// Admissible ladder prices for a side, ascending.
const std::vector<double>& LadderPrices(Side side);

// Throws InvalidOrder when levels are off-grid, unsorted or carry negative volume.
void ValidateLadder(const LadderOrder& ladder);
// Throws InvalidOrder for non-finite prices or prices outside [-200, 200].
void ValidateBmAction(const BmAction& action);

double TotalVolume(const LadderOrder& ladder);

// Headroom per side for a quarter whose day-ahead energy is `e_da` MWh.
VolumeBounds FeasibleVolumeBounds(double e_da);

// Equal split of each side's volume over the 11 ladder levels. Levels priced
// above `limits.p_bid` (bids) or below `limits.p_ask` (asks) are left out, so
// the limits act as the order's reservation prices.
TranchedOrder BuildLadder(const BmAction& limits, const VolumeBounds& volumes);
// Every level on both sides: the equally weighted portfolio.
TranchedOrder FullLadder(const VolumeBounds& volumes);

// Paid-as-bid clearing of one quarter. Only the bid side can execute in
// Surplus and only the ask side in Shortage; nothing executes when Balanced.
// A single-price order commits the full per-side volume or nothing; ladder
// levels execute independently, all-or-nothing per level.
Execution ClearOrders(const BmOrder& order, const VolumeBounds& volumes, const PriceContext& ctx);

// Quarter P&L (s_bm + e) p_h - e p_da - sum_l s_l p_l with e = s_da / 4.
// With literal_eq1 the full hourly s_da replaces e in both day-ahead terms.
RewardBreakdown QuarterReward(const Execution& exec, double s_da, const PriceContext& ctx,
                              bool literal_eq1 = false);

double HourlyReward(std::span<const double> quarter_rewards);

// raw - mean(baselines).
double ShapeReward(double raw, std::span<const double> baselines);

std::string DescribeFills(const Execution& exec);

}  // namespace powerarb::env

#endif  // POWERARB_CLEARING_HPP
