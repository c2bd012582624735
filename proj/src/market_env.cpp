#include "powerarb/market_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "powerarb/error.hpp"
#include "powerarb/policies.hpp"

namespace powerarb::env {
namespace {

using policies::BenchmarkId;

constexpr std::array<BenchmarkId, 3> kSimpleBaselines = {BenchmarkId::kP1, BenchmarkId::kP2,
                                                         BenchmarkId::kP3};
constexpr std::array<BenchmarkId, 2> kPortfolioBaselines = {BenchmarkId::kP4, BenchmarkId::kP5};

constexpr std::size_t kContextFeatures = 3;

void RejectLookAhead(const data::ObservationSpec& spec) {
  for (const auto& f : spec.features) {
    if (f == data::kBidClearingColumn || f == data::kAskClearingColumn ||
        f == data::kRegulationColumn) {
      throw Error(ErrorCode::kInvalidConfig,
                  "feature '" + f + "' is settled after bidding; use a lagged column", f);
    }
  }
}

double ClipPrice(double p, const char* name, EpisodeState& state) {
  if (std::isnan(p)) throw Error(ErrorCode::kInvalidOrder, std::string(name) + " is NaN");
  const double clipped = std::clamp(p, kMinBmPrice, kMaxBmPrice);
  if (clipped != p) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "q%d %s %.6g clipped to %.6g", state.quarter, name, p, clipped);
    state.clip_log.emplace_back(buf);
  }
  return clipped;
}

}  // namespace

std::string_view RewardModeName(RewardMode mode) {
  switch (mode) {
    case RewardMode::kRaw: return "raw";
    case RewardMode::kImitation: return "imitation";
    case RewardMode::kTranched: return "tranched";
    case RewardMode::kTranchedImitation: return "tranched-imitation";
  }
  return "raw";
}

RewardMode ParseRewardMode(std::string_view text) {
  for (RewardMode m : {RewardMode::kRaw, RewardMode::kImitation, RewardMode::kTranched,
                       RewardMode::kTranchedImitation}) {
    if (RewardModeName(m) == text) return m;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown reward mode '" + std::string(text) + "'",
              "reward_mode");
}

bool IsTranched(RewardMode mode) {
  return mode == RewardMode::kTranched || mode == RewardMode::kTranchedImitation;
}

bool IsShaped(RewardMode mode) {
  return mode == RewardMode::kImitation || mode == RewardMode::kTranchedImitation;
}

MarketEnv::MarketEnv(std::shared_ptr<const data::MarketTable> market, EnvConfig config,
                     std::shared_ptr<const data::Standardizer> standardizer)
    : market_(std::move(market)),
      config_(std::move(config)),
      standardizer_(std::move(standardizer)),
      da_builder_(*market_, config_.da_observation, standardizer_.get()),
      bm_builder_(*market_, config_.bm_observation, standardizer_.get()) {
  if (market_->resolution() != data::Resolution::kQuarterHourly) {
    throw Error(ErrorCode::kInvalidConfig, "the environment needs a quarter-hourly market");
  }
  if (config_.da_observation.level != data::Level::kDayAhead ||
      config_.bm_observation.level != data::Level::kBalancing) {
    throw Error(ErrorCode::kInvalidConfig, "observation specs have the wrong level");
  }
  RejectLookAhead(config_.da_observation);
  RejectLookAhead(config_.bm_observation);
  if (!market_->empty()) {
    const Timestamp start = market_->start();
    first_hour_ = start - ((start % kSecondsPerHour) + kSecondsPerHour) % kSecondsPerHour;
    first_hour_offset_ = static_cast<std::ptrdiff_t>((first_hour_ - start) / kSecondsPerQuarter);
  }
  if (standardizer_) da_price_index_ = standardizer_->Find(std::string(data::kDaPriceColumn));
}

std::size_t MarketEnv::bm_observation_dim() const {
  return bm_builder_.dimension() + (config_.bm_context_features ? kContextFeatures : 0);
}

std::size_t MarketEnv::num_hours() const {
  if (market_->empty()) return 0;
  return static_cast<std::size_t>((market_->end() - first_hour_ + kSecondsPerHour - 1) /
                                  kSecondsPerHour);
}

Timestamp MarketEnv::HourStart(std::size_t hour_index) const {
  return first_hour_ + static_cast<Timestamp>(hour_index) * kSecondsPerHour;
}

std::optional<std::ptrdiff_t> MarketEnv::FirstRow(std::size_t hour_index) const {
  const std::ptrdiff_t row = first_hour_offset_ + static_cast<std::ptrdiff_t>(hour_index) * 4;
  if (row < 0 || row + 3 >= static_cast<std::ptrdiff_t>(market_->size())) return std::nullopt;
  return row;
}

std::vector<std::size_t> MarketEnv::HoursIn(Timestamp begin, Timestamp end) const {
  std::vector<std::size_t> hours;
  const std::size_t history = std::max(da_builder_.first_valid_row(), bm_builder_.first_valid_row());
  for (std::size_t h = 0; h < num_hours(); ++h) {
    const Timestamp t = HourStart(h);
    if (t < begin || t >= end) continue;
    const auto row = FirstRow(h);
    if (!row || static_cast<std::size_t>(*row) < history) continue;
    hours.push_back(h);
  }
  return hours;
}

std::vector<std::size_t> MarketEnv::AllHours() const {
  return HoursIn(std::numeric_limits<Timestamp>::min(), std::numeric_limits<Timestamp>::max());
}

EpisodeState MarketEnv::Reset(std::size_t hour_index, ObservationVector* da_observation) const {
  const auto row = FirstRow(hour_index);
  if (!row) {
    throw Error(ErrorCode::kIncompleteHour,
                "hour " + FormatIso8601(HourStart(hour_index)) + " lacks four quarter records",
                FormatIso8601(HourStart(hour_index)));
  }
  EpisodeState state;
  state.hour_index = hour_index;
  state.first_row = static_cast<std::size_t>(*row);
  state.hour_start = HourStart(hour_index);
  if (state.first_row < bm_builder_.first_valid_row()) {
    throw Error(ErrorCode::kInsufficientHistory,
                "balancing look-back before " + FormatIso8601(state.hour_start) + " leaves the table",
                FormatIso8601(state.hour_start));
  }
  ObservationVector obs = da_builder_.AtRow(state.first_row);
  if (da_observation) *da_observation = std::move(obs);
  return state;
}

ObservationVector MarketEnv::DaObservation(const EpisodeState& state) const {
  return da_builder_.AtRow(state.first_row);
}

ObservationVector MarketEnv::StepDayAhead(EpisodeState& state, DaAction action) const {
  if (state.da_taken) throw Error(ErrorCode::kDoubleDaStep, "day-ahead step already taken");
  if (std::isnan(action.s_da)) throw Error(ErrorCode::kInvalidOrder, "s_da is NaN");
  const double clipped = std::clamp(action.s_da, kMinDaVolume, kMaxDaVolume);
  if (clipped != action.s_da) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "s_da %.6g clipped to %.6g", action.s_da, clipped);
    state.clip_log.emplace_back(buf);
  }
  state.s_da = clipped;
  state.e_da = clipped / kQuartersPerHour;
  state.da_taken = true;
  return BmObservation(state);
}

ObservationVector MarketEnv::BmObservation(const EpisodeState& state) const {
  const std::size_t base = bm_builder_.dimension();
  ObservationVector obs(static_cast<Eigen::Index>(bm_observation_dim()));
  bm_builder_.AtRow(state.first_row + static_cast<std::size_t>(state.quarter), obs.data());
  if (config_.bm_context_features) {
    const double p_da = market_->row(state.first_row).da_price;
    const double mid = 0.5 * (kMinDaVolume + kMaxDaVolume);
    const double half = 0.5 * (kMaxDaVolume - kMinDaVolume);
    obs(static_cast<Eigen::Index>(base)) = (state.s_da - mid) / half;
    obs(static_cast<Eigen::Index>(base + 1)) =
        standardizer_ ? standardizer_->Apply(da_price_index_, p_da) : p_da / 100.0;
    obs(static_cast<Eigen::Index>(base + 2)) = state.quarter / 3.0;
  }
  return obs;
}

PriceContext MarketEnv::QuarterContext(const EpisodeState& state) const {
  const int q = std::min(state.quarter, 3);
  return ContextFromRecord(market_->row(state.first_row + static_cast<std::size_t>(q)),
                           config_.hydrogen_price);
}

VolumeBounds MarketEnv::Bounds(const EpisodeState& state) const {
  return FeasibleVolumeBounds(state.e_da);
}

std::vector<double> MarketEnv::Baselines(const EpisodeState& state, RewardMode mode) const {
  const PriceContext ctx = QuarterContext(state);
  const DaAction hint{state.s_da};
  if (mode == RewardMode::kImitation) {
    return policies::BaselineQuarterPnls(kSimpleBaselines, ctx, hint, config_.literal_eq1);
  }
  if (mode == RewardMode::kTranchedImitation) {
    return policies::BaselineQuarterPnls(kPortfolioBaselines, ctx, hint, config_.literal_eq1);
  }
  return {};
}

StepResult MarketEnv::StepBalancing(EpisodeState& state, const BmOrder& order,
                                    RewardMode mode) const {
  if (!state.da_taken) throw Error(ErrorCode::kDaStepMissing, "balancing step before day-ahead step");
  if (state.done) throw Error(ErrorCode::kEpisodeDone, "episode already finished");

  const std::size_t log_size = state.clip_log.size();
  BmOrder effective = order;
  try {
    if (auto* single = std::get_if<BmAction>(&effective)) {
      single->p_bid = ClipPrice(single->p_bid, "p_bid", state);
      single->p_ask = ClipPrice(single->p_ask, "p_ask", state);
    }
    const PriceContext ctx = QuarterContext(state);
    StepResult result;
    result.execution = ClearOrders(effective, Bounds(state), ctx);
    result.breakdown = QuarterReward(result.execution, state.s_da, ctx, config_.literal_eq1);
    const double raw = result.breakdown.total;
    if (IsShaped(mode)) {
      const std::vector<double> baselines = Baselines(state, mode);
      result.breakdown.shaping_term = raw - ShapeReward(raw, baselines);
      result.breakdown.total = raw - result.breakdown.shaping_term;
    }
    result.reward = result.breakdown.total;
    result.net_consumption = state.e_da + result.execution.s_bm;

    state.quarter_rewards.push_back(raw);
    state.shaped_rewards.push_back(result.reward);
    state.breakdowns.push_back(result.breakdown);
    state.cumulative_pnl += raw;
    state.cumulative_shaped += result.reward;
    ++state.quarter;
    if (state.quarter == 4) {
      state.done = true;
      result.done = true;
    } else {
      result.next_observation = BmObservation(state);
    }
    return result;
  } catch (...) {
    state.clip_log.resize(log_size);
    throw;
  }
}

TraceRow DayAheadTraceRow(const EpisodeState& state) {
  TraceRow row;
  row.hour_start = state.hour_start;
  row.quarter = -1;
  row.s_da = state.s_da;
  row.order_kind = "day_ahead";
  return row;
}

TraceRow BalancingTraceRow(const EpisodeState& before, const PriceContext& ctx,
                           const BmOrder& order, const StepResult& result) {
  TraceRow row;
  row.hour_start = before.hour_start;
  row.quarter = before.quarter;
  row.s_da = before.s_da;
  if (const auto* single = std::get_if<BmAction>(&order)) {
    row.order_kind = "single";
    row.p_bid = single->p_bid;
    row.p_ask = single->p_ask;
  } else if (const auto* ladder = std::get_if<TranchedOrder>(&order)) {
    row.order_kind = "ladder";
    row.p_bid = ladder->bid.levels.empty() ? std::nan("") : ladder->bid.levels.back().price;
    row.p_ask = ladder->ask.levels.empty() ? std::nan("") : ladder->ask.levels.front().price;
  } else {
    row.order_kind = "none";
    row.p_bid = row.p_ask = std::nan("");
  }
  row.regulation = std::string(data::RegulationName(ctx.regulation_state));
  row.fills = DescribeFills(result.execution);
  row.s_bm = result.execution.s_bm;
  row.p_bm = result.execution.p_bm;
  row.breakdown = result.breakdown;
  return row;
}

void WriteTrace(std::ostream& out, const std::vector<TraceRow>& rows) {
  out << "hour,quarter,s_da,order,p_bid,p_ask,regulation,fills,s_bm,p_bm,hydrogen_revenue,"
         "da_cost,bm_cashflow,shaping_term,total\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), ",%d,%.6f,%s,%.6f,%.6f,%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  r.quarter, r.s_da, r.order_kind.c_str(), r.p_bid, r.p_ask, r.regulation.c_str(),
                  r.fills.c_str(), r.s_bm, r.p_bm, r.breakdown.hydrogen_revenue,
                  r.breakdown.da_cost, r.breakdown.bm_cashflow, r.breakdown.shaping_term,
                  r.breakdown.total);
    out << FormatIso8601(r.hour_start) << buf;
  }
}

}  // namespace powerarb::env
