#include "powerarb/clearing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "powerarb/error.hpp"

namespace powerarb::env {
namespace {

std::vector<double> MakeLadder(double first) {
  std::vector<double> prices;
  for (int i = 0; i < kLadderLevels; ++i) prices.push_back(first + kLadderSpacing * i);
  return prices;
}

bool OnGrid(double price, const std::vector<double>& grid) {
  return std::find(grid.begin(), grid.end(), price) != grid.end();
}

void Finish(Execution& exec) {
  double volume = 0.0, notional = 0.0;
  for (const auto& f : exec.fills) {
    exec.s_bm += f.volume;
    volume += std::abs(f.volume);
    notional += std::abs(f.volume) * f.price;
  }
  exec.p_bm = volume > 0.0 ? notional / volume : 0.0;
}

void CheckLadderVolume(const LadderOrder& ladder, double available) {
  const double total = TotalVolume(ladder);
  if (total > available + kVolumeTolerance) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s ladder volume %.6f exceeds feasible %.6f",
                  ladder.side == Side::kBid ? "bid" : "ask", total, available);
    throw Error(ErrorCode::kVolumeExceedsFeasibility, buf);
  }
}

}  // namespace

PriceContext ContextFromRecord(const data::MarketRecord& record, double hydrogen_price) {
  return PriceContext{record.da_price, hydrogen_price, record.bm_bid_clearing,
                      record.bm_ask_clearing, record.regulation_state};
}

const std::vector<double>& LadderPrices(Side side) {
  static const std::vector<double> bid = MakeLadder(kBidLadderFirst);
  static const std::vector<double> ask = MakeLadder(kAskLadderFirst);
  return side == Side::kBid ? bid : ask;
}

void ValidateLadder(const LadderOrder& ladder) {
  const auto& grid = LadderPrices(ladder.side);
  for (std::size_t i = 0; i < ladder.levels.size(); ++i) {
    const LadderLevel& l = ladder.levels[i];
    if (!OnGrid(l.price, grid)) {
      throw Error(ErrorCode::kInvalidOrder, "ladder price " + std::to_string(l.price) +
                                                " is not an admissible level");
    }
    if (!(l.volume >= 0.0) || !std::isfinite(l.volume)) {
      throw Error(ErrorCode::kInvalidOrder, "ladder volume must be finite and non-negative");
    }
    if (i > 0 && !(l.price > ladder.levels[i - 1].price)) {
      throw Error(ErrorCode::kInvalidOrder, "ladder prices must be strictly increasing");
    }
  }
}

void ValidateBmAction(const BmAction& a) {
  auto ok = [](double p) { return std::isfinite(p) && p >= kMinBmPrice && p <= kMaxBmPrice; };
  if (!ok(a.p_bid) || !ok(a.p_ask)) {
    throw Error(ErrorCode::kInvalidOrder, "balancing prices must lie in [-200, 200]");
  }
}

double TotalVolume(const LadderOrder& ladder) {
  double total = 0.0;
  for (const auto& l : ladder.levels) total += l.volume;
  return total;
}

VolumeBounds FeasibleVolumeBounds(double e_da) {
  return VolumeBounds{std::max(0.0, kMaxQuarterEnergy - e_da),
                      std::max(0.0, e_da - kMinQuarterEnergy)};
}

TranchedOrder BuildLadder(const BmAction& limits, const VolumeBounds& volumes) {
  TranchedOrder order;
  const double bid_each = volumes.max_bid_volume / kLadderLevels;
  const double ask_each = volumes.max_ask_volume / kLadderLevels;
  for (double p : LadderPrices(Side::kBid)) {
    if (p <= limits.p_bid) order.bid.levels.push_back({p, bid_each});
  }
  for (double p : LadderPrices(Side::kAsk)) {
    if (p >= limits.p_ask) order.ask.levels.push_back({p, ask_each});
  }
  return order;
}

TranchedOrder FullLadder(const VolumeBounds& volumes) {
  return BuildLadder(BmAction{kMaxBmPrice, kMinBmPrice}, volumes);
}

Execution ClearOrders(const BmOrder& order, const VolumeBounds& volumes, const PriceContext& ctx) {
  Execution exec;
  const bool surplus = ctx.regulation_state == RegulationState::kSurplus;
  const bool shortage = ctx.regulation_state == RegulationState::kShortage;

  if (const auto* single = std::get_if<BmAction>(&order)) {
    ValidateBmAction(*single);
    // NaN clearing prices compare false, so an unpublished side never executes.
    if (surplus && volumes.max_bid_volume > 0.0 && single->p_bid >= ctx.bm_bid_clearing) {
      exec.fills.push_back({single->p_bid, volumes.max_bid_volume});
    } else if (shortage && volumes.max_ask_volume > 0.0 &&
               single->p_ask <= ctx.bm_ask_clearing) {
      exec.fills.push_back({single->p_ask, -volumes.max_ask_volume});
    }
  } else if (const auto* ladder = std::get_if<TranchedOrder>(&order)) {
    if (ladder->bid.side != Side::kBid || ladder->ask.side != Side::kAsk) {
      throw Error(ErrorCode::kInvalidOrder, "tranched order sides are swapped");
    }
    ValidateLadder(ladder->bid);
    ValidateLadder(ladder->ask);
    CheckLadderVolume(ladder->bid, volumes.max_bid_volume);
    CheckLadderVolume(ladder->ask, volumes.max_ask_volume);
    if (surplus) {
      for (const auto& l : ladder->bid.levels) {
        if (l.volume > 0.0 && l.price >= ctx.bm_bid_clearing) exec.fills.push_back({l.price, l.volume});
      }
    } else if (shortage) {
      for (const auto& l : ladder->ask.levels) {
        if (l.volume > 0.0 && l.price <= ctx.bm_ask_clearing) exec.fills.push_back({l.price, -l.volume});
      }
    }
  }
  Finish(exec);
  return exec;
}

RewardBreakdown QuarterReward(const Execution& exec, double s_da, const PriceContext& ctx,
                              bool literal_eq1) {
  const double e_da = s_da / kQuartersPerHour;
  const double consumed = e_da + exec.s_bm;
  if (consumed < kMinQuarterEnergy - kVolumeTolerance ||
      consumed > kMaxQuarterEnergy + kVolumeTolerance) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "post-trade consumption %.6f MWh outside [5, 50]", consumed);
    throw Error(ErrorCode::kInfeasiblePostTradePosition, buf);
  }
  const double position = literal_eq1 ? s_da : e_da;
  RewardBreakdown r;
  r.hydrogen_revenue = (exec.s_bm + position) * ctx.p_h;
  r.da_cost = position * ctx.p_da;
  for (const auto& f : exec.fills) r.bm_cashflow += f.volume * f.price;
  r.total = r.hydrogen_revenue - r.da_cost - r.bm_cashflow;
  return r;
}

double HourlyReward(std::span<const double> quarter_rewards) {
  if (quarter_rewards.size() != 4) {
    throw Error(ErrorCode::kWrongArity,
                "hourly reward needs 4 quarters, got " + std::to_string(quarter_rewards.size()));
  }
  double sum = 0.0;
  for (double r : quarter_rewards) sum += r;
  return sum;
}

double ShapeReward(double raw, std::span<const double> baselines) {
  if (baselines.empty()) throw Error(ErrorCode::kEmptyBaselines, "no shaping baselines");
  double sum = 0.0;
  for (double b : baselines) sum += b;
  return raw - sum / static_cast<double>(baselines.size());
}

std::string DescribeFills(const Execution& exec) {
  std::string out;
  char buf[64];
  for (const auto& f : exec.fills) {
    if (!out.empty()) out += ';';
    std::snprintf(buf, sizeof(buf), "%g@%g", f.volume, f.price);
    out += buf;
  }
  return out;
}

}  // namespace powerarb::env
