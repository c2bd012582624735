#ifndef POWERARB_MARKET_ENV_HPP
#define POWERARB_MARKET_ENV_HPP

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "powerarb/clearing.hpp"
#include "powerarb/observation.hpp"

namespace powerarb::env {

using data::ObservationVector;

// Learning signal for the balancing agent. Tranched modes differ from their
// single-price counterparts only in which benchmarks form the baseline; the
// order type itself is carried by the action passed to StepBalancing.
enum class RewardMode { kRaw, kImitation, kTranched, kTranchedImitation };

std::string_view RewardModeName(RewardMode mode);
RewardMode ParseRewardMode(std::string_view text);
bool IsTranched(RewardMode mode);
bool IsShaped(RewardMode mode);

struct EnvConfig {
  double hydrogen_price = kHydrogenPrice;
  bool literal_eq1 = false;
  data::ObservationSpec da_observation{data::Level::kDayAhead, {}, 0};
  data::ObservationSpec bm_observation{data::Level::kBalancing, {}, 0};
  // Append scaled s_da, standardized p_da and quarter/3 to balancing observations.
  bool bm_context_features = true;
};

// One hour of play. Owned by a single caller and mutated in sequence.
struct EpisodeState {
  std::size_t hour_index = 0;
  std::size_t first_row = 0;
  Timestamp hour_start = 0;
  bool da_taken = false;
  double s_da = 0.0;
  double e_da = 0.0;
  int quarter = 0;
  bool done = false;
  // Unshaped P&L; shaping never reaches reported numbers.
  double cumulative_pnl = 0.0;
  double cumulative_shaped = 0.0;
  std::vector<double> quarter_rewards;
  std::vector<double> shaped_rewards;
  std::vector<RewardBreakdown> breakdowns;
  std::vector<std::string> clip_log;
};

struct StepResult {
  // Learning signal under the requested mode.
  double reward = 0.0;
  RewardBreakdown breakdown;
  Execution execution;
  // e_da + s_bm after the trade.
  double net_consumption = 0.0;
  bool done = false;
  // Observation for the next quarter; empty once the episode is done.
  ObservationVector next_observation;
};

class MarketEnv {
 public:
  MarketEnv(std::shared_ptr<const data::MarketTable> market, EnvConfig config,
            std::shared_ptr<const data::Standardizer> standardizer = nullptr);

  const data::MarketTable& market() const { return *market_; }
  const EnvConfig& config() const { return config_; }
  const data::Standardizer* standardizer() const { return standardizer_.get(); }

  std::size_t da_observation_dim() const { return da_builder_.dimension(); }
  std::size_t bm_observation_dim() const;

  // Hour h starts at floor_hour(market start) + h hours.
  std::size_t num_hours() const;
  Timestamp HourStart(std::size_t hour_index) const;
  // Complete hours starting in [begin, end) whose observation windows fit in the table.
  std::vector<std::size_t> HoursIn(Timestamp begin, Timestamp end) const;
  std::vector<std::size_t> AllHours() const;

  EpisodeState Reset(std::size_t hour_index, ObservationVector* da_observation = nullptr) const;
  ObservationVector DaObservation(const EpisodeState& state) const;

  // Records the day-ahead position and returns the first balancing observation.
  // Out-of-range positions are clipped to [20, 200] and noted in state.clip_log.
  ObservationVector StepDayAhead(EpisodeState& state, DaAction action) const;

  PriceContext QuarterContext(const EpisodeState& state) const;
  VolumeBounds Bounds(const EpisodeState& state) const;
  std::vector<double> Baselines(const EpisodeState& state, RewardMode mode) const;

  // Clears one quarter. The state is left untouched when the order is rejected.
  StepResult StepBalancing(EpisodeState& state, const BmOrder& order, RewardMode mode) const;

 private:
  std::optional<std::ptrdiff_t> FirstRow(std::size_t hour_index) const;
  ObservationVector BmObservation(const EpisodeState& state) const;

  std::shared_ptr<const data::MarketTable> market_;
  EnvConfig config_;
  std::shared_ptr<const data::Standardizer> standardizer_;
  data::ObservationBuilder da_builder_;
  data::ObservationBuilder bm_builder_;
  Timestamp first_hour_ = 0;
  std::ptrdiff_t first_hour_offset_ = 0;
  int da_price_index_ = -1;
};

// Audit record for one environment step.
struct TraceRow {
  Timestamp hour_start = 0;
  // -1 for the day-ahead step, 0..3 for balancing quarters.
  int quarter = -1;
  double s_da = 0.0;
  double p_bid = 0.0;
  double p_ask = 0.0;
  std::string order_kind;
  std::string regulation;
  std::string fills;
  double s_bm = 0.0;
  double p_bm = 0.0;
  RewardBreakdown breakdown;
};

TraceRow DayAheadTraceRow(const EpisodeState& state);
TraceRow BalancingTraceRow(const EpisodeState& state_before, const PriceContext& ctx,
                           const BmOrder& order, const StepResult& result);
void WriteTrace(std::ostream& out, const std::vector<TraceRow>& rows);

}  // namespace powerarb::env

#endif  // POWERARB_MARKET_ENV_HPP
