#ifndef POWERARB_MARKET_TABLE_HPP
#define POWERARB_MARKET_TABLE_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "powerarb/timestamp.hpp"

namespace powerarb::data {

enum class Resolution { kHourly, kQuarterHourly };

enum class RegulationState { kSurplus, kShortage, kBalanced };

Timestamp StepSeconds(Resolution resolution);
std::string_view RegulationName(RegulationState state);
// Accepts "surplus" / "shortage" / "balanced" (any case) or the numeric codes -1 / 1 / 0.
RegulationState ParseRegulation(std::string_view text);
// Numeric encoding used whenever the state is consumed as a feature.
double EncodeRegulation(RegulationState state);

inline constexpr std::string_view kTimestampColumn = "timestamp";
inline constexpr std::string_view kDaPriceColumn = "da_price";
inline constexpr std::string_view kBidClearingColumn = "bm_bid_clearing";
inline constexpr std::string_view kAskClearingColumn = "bm_ask_clearing";
inline constexpr std::string_view kRegulationColumn = "regulation_state";

struct MarketRecord {
  Timestamp timestamp = 0;
  double da_price = 0.0;
  // NaN when the interval has no published price on that side.
  double bm_bid_clearing = 0.0;
  double bm_ask_clearing = 0.0;
  RegulationState regulation_state = RegulationState::kBalanced;
  // Aligned with MarketTable::fundamental_names().
  std::vector<double> fundamentals;
};

// Resolved handle to a named numeric column (core field or fundamental).
struct FeatureRef {
  enum class Kind { kDaPrice, kBidClearing, kAskClearing, kRegulation, kFundamental };
  Kind kind = Kind::kDaPrice;
  std::size_t index = 0;

  double Of(const MarketRecord& record) const;
};

// Immutable, validated sequence of equally spaced market intervals.
class MarketTable {
 public:
  // Validates the invariants: constant step, no gaps, aligned timestamps,
  // finite values, bid clearing <= ask clearing.
  MarketTable(Resolution resolution, std::vector<std::string> fundamental_names,
              std::vector<MarketRecord> rows);

  Resolution resolution() const { return resolution_; }
  Timestamp step() const { return StepSeconds(resolution_); }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  std::span<const MarketRecord> rows() const { return rows_; }
  const MarketRecord& row(std::size_t i) const { return rows_.at(i); }
  const std::vector<std::string>& fundamental_names() const { return fundamental_names_; }

  // Half-open period [start, end).
  Timestamp start() const;
  Timestamp end() const;

  std::optional<std::size_t> RowAt(Timestamp t) const;
  bool HasColumn(std::string_view name) const;
  // Throws MissingColumn.
  FeatureRef Resolve(std::string_view name) const;
  std::vector<double> Column(std::string_view name) const;

  // Rows with timestamps in [begin, end).
  MarketTable Slice(Timestamp begin, Timestamp end) const;
  MarketTable WithColumn(std::string name, std::span<const double> values) const;
  std::vector<int> Years() const;

 private:
  Resolution resolution_;
  std::vector<std::string> fundamental_names_;
  std::vector<MarketRecord> rows_;
};

struct LoadOptions {
  // Fundamental columns that must be present. The core columns are always required.
  std::vector<std::string> schema;
  // Resolution of the file's rows.
  Resolution resolution = Resolution::kQuarterHourly;
  // Repeat each hourly row onto its four quarter-hours.
  bool expand_to_quarter_hour = false;
};

MarketTable LoadMarketTable(const std::string& path, const LoadOptions& options);
MarketTable ReadMarketTable(std::istream& in, const LoadOptions& options);
void WriteMarketTable(std::ostream& out, const MarketTable& table);
void SaveMarketTable(const std::string& path, const MarketTable& table);

// Repeats each hourly row four times at :00, :15, :30 and :45.
MarketTable ExpandToQuarterHour(const MarketTable& hourly);

struct LagEntry {
  std::string feature;
  int lag = 0;
};

struct LagSpec {
  std::vector<LagEntry> entries;
};

std::string LagColumnName(std::string_view feature, int lag);

// Appends one column per entry holding the value `lag` rows earlier and drops
// the first max-lag rows.
MarketTable BuildLaggedFeatures(const MarketTable& table, const LagSpec& spec);

}  // namespace powerarb::data

#endif  // POWERARB_MARKET_TABLE_HPP
