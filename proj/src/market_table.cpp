#include "powerarb/market_table.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <unordered_map>

#include "powerarb/error.hpp"

namespace powerarb::data {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(Trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string Where(std::size_t row, std::string_view column) {
  return "row " + std::to_string(row) + ", column " + std::string(column);
}

double ParseNumber(std::string_view text, std::size_t row, std::string_view column,
                   bool allow_empty) {
  if (text.empty()) {
    if (allow_empty) return std::numeric_limits<double>::quiet_NaN();
    throw Error(ErrorCode::kNonFiniteValue, "empty value at " + Where(row, column),
                Where(row, column));
  }
  std::string buf(text);
  char* end = nullptr;
  const double value = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size()) {
    throw Error(ErrorCode::kParseError, "cannot parse number '" + buf + "' at " + Where(row, column),
                Where(row, column));
  }
  return value;
}

void WriteNumber(std::ostream& out, double v) {
  if (std::isnan(v)) return;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  out << buf;
}

}  // namespace

Timestamp StepSeconds(Resolution resolution) {
  return resolution == Resolution::kHourly ? kSecondsPerHour : kSecondsPerQuarter;
}

std::string_view RegulationName(RegulationState state) {
  switch (state) {
    case RegulationState::kSurplus: return "surplus";
    case RegulationState::kShortage: return "shortage";
    case RegulationState::kBalanced: return "balanced";
  }
  return "balanced";
}

RegulationState ParseRegulation(std::string_view text) {
  const std::string s = Lower(Trim(text));
  if (s == "surplus" || s == "-1") return RegulationState::kSurplus;
  if (s == "shortage" || s == "1") return RegulationState::kShortage;
  if (s == "balanced" || s == "0") return RegulationState::kBalanced;
  throw Error(ErrorCode::kParseError, "unknown regulation state '" + s + "'", s);
}

double EncodeRegulation(RegulationState state) {
  switch (state) {
    case RegulationState::kSurplus: return -1.0;
    case RegulationState::kShortage: return 1.0;
    case RegulationState::kBalanced: return 0.0;
  }
  return 0.0;
}

double FeatureRef::Of(const MarketRecord& record) const {
  switch (kind) {
    case Kind::kDaPrice: return record.da_price;
    case Kind::kBidClearing: return record.bm_bid_clearing;
    case Kind::kAskClearing: return record.bm_ask_clearing;
    case Kind::kRegulation: return EncodeRegulation(record.regulation_state);
    case Kind::kFundamental: return record.fundamentals[index];
  }
  return 0.0;
}

MarketTable::MarketTable(Resolution resolution, std::vector<std::string> fundamental_names,
                         std::vector<MarketRecord> rows)
    : resolution_(resolution),
      fundamental_names_(std::move(fundamental_names)),
      rows_(std::move(rows)) {
  std::set<std::string_view> seen;
  for (const auto& name : fundamental_names_) {
    if (name == kTimestampColumn || name == kDaPriceColumn || name == kBidClearingColumn ||
        name == kAskClearingColumn || name == kRegulationColumn || !seen.insert(name).second) {
      throw Error(ErrorCode::kInvalidRecord, "duplicate column '" + name + "'", name);
    }
  }
  const Timestamp dt = step();
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const MarketRecord& r = rows_[i];
    if (r.timestamp % dt != 0) {
      throw Error(ErrorCode::kInvalidRecord,
                  "timestamp " + FormatIso8601(r.timestamp) + " not aligned to the table step",
                  FormatIso8601(r.timestamp));
    }
    if (i > 0) {
      const Timestamp prev = rows_[i - 1].timestamp;
      if (r.timestamp <= prev) {
        throw Error(ErrorCode::kInvalidRecord,
                    "timestamps not strictly increasing at " + FormatIso8601(r.timestamp),
                    FormatIso8601(r.timestamp));
      }
      if (r.timestamp != prev + dt) {
        const std::string gap = FormatIso8601(prev + dt);
        throw Error(ErrorCode::kGapInTimestamps, "missing interval " + gap, gap);
      }
    }
    if (r.fundamentals.size() != fundamental_names_.size()) {
      throw Error(ErrorCode::kInvalidRecord, "fundamental count mismatch at row " + std::to_string(i));
    }
    if (!std::isfinite(r.da_price)) {
      throw Error(ErrorCode::kNonFiniteValue, "non-finite value at " + Where(i, kDaPriceColumn),
                  Where(i, kDaPriceColumn));
    }
    if (std::isinf(r.bm_bid_clearing)) {
      throw Error(ErrorCode::kNonFiniteValue, "non-finite value at " + Where(i, kBidClearingColumn),
                  Where(i, kBidClearingColumn));
    }
    if (std::isinf(r.bm_ask_clearing)) {
      throw Error(ErrorCode::kNonFiniteValue, "non-finite value at " + Where(i, kAskClearingColumn),
                  Where(i, kAskClearingColumn));
    }
    for (std::size_t k = 0; k < r.fundamentals.size(); ++k) {
      if (!std::isfinite(r.fundamentals[k])) {
        throw Error(ErrorCode::kNonFiniteValue,
                    "non-finite value at " + Where(i, fundamental_names_[k]),
                    Where(i, fundamental_names_[k]));
      }
    }
    if (r.bm_bid_clearing > r.bm_ask_clearing) {
      throw Error(ErrorCode::kInvalidRecord,
                  "bid clearing above ask clearing at " + FormatIso8601(r.timestamp),
                  FormatIso8601(r.timestamp));
    }
  }
}

Timestamp MarketTable::start() const { return rows_.empty() ? 0 : rows_.front().timestamp; }

Timestamp MarketTable::end() const { return rows_.empty() ? 0 : rows_.back().timestamp + step(); }

std::optional<std::size_t> MarketTable::RowAt(Timestamp t) const {
  if (rows_.empty() || t < start() || t >= end()) return std::nullopt;
  const Timestamp offset = t - start();
  if (offset % step() != 0) return std::nullopt;
  return static_cast<std::size_t>(offset / step());
}

bool MarketTable::HasColumn(std::string_view name) const {
  if (name == kDaPriceColumn || name == kBidClearingColumn || name == kAskClearingColumn ||
      name == kRegulationColumn) {
    return true;
  }
  return std::find(fundamental_names_.begin(), fundamental_names_.end(), name) !=
         fundamental_names_.end();
}

FeatureRef MarketTable::Resolve(std::string_view name) const {
  using Kind = FeatureRef::Kind;
  if (name == kDaPriceColumn) return {Kind::kDaPrice, 0};
  if (name == kBidClearingColumn) return {Kind::kBidClearing, 0};
  if (name == kAskClearingColumn) return {Kind::kAskClearing, 0};
  if (name == kRegulationColumn) return {Kind::kRegulation, 0};
  const auto it = std::find(fundamental_names_.begin(), fundamental_names_.end(), name);
  if (it == fundamental_names_.end()) {
    throw Error(ErrorCode::kMissingColumn, "no column named '" + std::string(name) + "'",
                std::string(name));
  }
  return {Kind::kFundamental, static_cast<std::size_t>(it - fundamental_names_.begin())};
}

std::vector<double> MarketTable::Column(std::string_view name) const {
  const FeatureRef ref = Resolve(name);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(ref.Of(r));
  return out;
}

MarketTable MarketTable::Slice(Timestamp begin, Timestamp end) const {
  std::vector<MarketRecord> rows;
  for (const auto& r : rows_) {
    if (r.timestamp >= begin && r.timestamp < end) rows.push_back(r);
  }
  return MarketTable(resolution_, fundamental_names_, std::move(rows));
}

MarketTable MarketTable::WithColumn(std::string name, std::span<const double> values) const {
  if (values.size() != rows_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "column length does not match table", name);
  }
  auto names = fundamental_names_;
  names.push_back(std::move(name));
  auto rows = rows_;
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].fundamentals.push_back(values[i]);
  return MarketTable(resolution_, std::move(names), std::move(rows));
}

std::vector<int> MarketTable::Years() const {
  std::vector<int> years;
  if (rows_.empty()) return years;
  const int first = YearOf(start());
  const int last = YearOf(end() - 1);
  for (int y = first; y <= last; ++y) years.push_back(y);
  return years;
}

MarketTable ReadMarketTable(std::istream& in, const LoadOptions& options) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kParseError, "empty market file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = SplitCsv(line);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index.emplace(std::string(header[i]), i);

  auto require = [&](std::string_view name) {
    const auto it = index.find(std::string(name));
    if (it == index.end()) {
      throw Error(ErrorCode::kMissingColumn, "missing column '" + std::string(name) + "'",
                  std::string(name));
    }
    return it->second;
  };
  const std::size_t ts_col = require(kTimestampColumn);
  const std::size_t da_col = require(kDaPriceColumn);
  const std::size_t bid_col = require(kBidClearingColumn);
  const std::size_t ask_col = require(kAskClearingColumn);
  const std::size_t reg_col = require(kRegulationColumn);
  std::vector<std::size_t> fundamental_cols;
  for (const auto& name : options.schema) fundamental_cols.push_back(require(name));

  std::vector<MarketRecord> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    const auto cells = SplitCsv(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kParseError,
                  "row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(header.size()),
                  "row " + std::to_string(row));
    }
    MarketRecord r;
    r.timestamp = ParseIso8601(cells[ts_col]);
    r.da_price = ParseNumber(cells[da_col], row, kDaPriceColumn, false);
    r.bm_bid_clearing = ParseNumber(cells[bid_col], row, kBidClearingColumn, true);
    r.bm_ask_clearing = ParseNumber(cells[ask_col], row, kAskClearingColumn, true);
    r.regulation_state = ParseRegulation(cells[reg_col]);
    r.fundamentals.reserve(fundamental_cols.size());
    for (std::size_t k = 0; k < fundamental_cols.size(); ++k) {
      r.fundamentals.push_back(
          ParseNumber(cells[fundamental_cols[k]], row, options.schema[k], false));
    }
    rows.push_back(std::move(r));
    ++row;
  }
  MarketTable table(options.resolution, options.schema, std::move(rows));
  if (options.expand_to_quarter_hour && options.resolution == Resolution::kHourly) {
    return ExpandToQuarterHour(table);
  }
  return table;
}

MarketTable LoadMarketTable(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'", path);
  return ReadMarketTable(in, options);
}

void WriteMarketTable(std::ostream& out, const MarketTable& table) {
  out << kTimestampColumn << ',' << kDaPriceColumn << ',' << kBidClearingColumn << ','
      << kAskClearingColumn << ',' << kRegulationColumn;
  for (const auto& name : table.fundamental_names()) out << ',' << name;
  out << '\n';
  for (const auto& r : table.rows()) {
    out << FormatIso8601(r.timestamp) << ',';
    WriteNumber(out, r.da_price);
    out << ',';
    WriteNumber(out, r.bm_bid_clearing);
    out << ',';
    WriteNumber(out, r.bm_ask_clearing);
    out << ',' << RegulationName(r.regulation_state);
    for (double v : r.fundamentals) {
      out << ',';
      WriteNumber(out, v);
    }
    out << '\n';
  }
}

void SaveMarketTable(const std::string& path, const MarketTable& table) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'", path);
  WriteMarketTable(out, table);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for '" + path + "'", path);
}

MarketTable ExpandToQuarterHour(const MarketTable& hourly) {
  if (hourly.resolution() != Resolution::kHourly) {
    throw Error(ErrorCode::kInvalidConfig, "quarter-hour expansion needs an hourly table");
  }
  std::vector<MarketRecord> rows;
  rows.reserve(hourly.size() * 4);
  for (const auto& r : hourly.rows()) {
    for (int q = 0; q < 4; ++q) {
      MarketRecord copy = r;
      copy.timestamp = r.timestamp + q * kSecondsPerQuarter;
      rows.push_back(std::move(copy));
    }
  }
  return MarketTable(Resolution::kQuarterHourly, hourly.fundamental_names(), std::move(rows));
}

std::string LagColumnName(std::string_view feature, int lag) {
  return std::string(feature) + "_lag" + std::to_string(lag);
}

MarketTable BuildLaggedFeatures(const MarketTable& table, const LagSpec& spec) {
  std::set<std::pair<std::string, int>> seen;
  int max_lag = 0;
  std::vector<FeatureRef> refs;
  std::vector<std::string> names = table.fundamental_names();
  for (const auto& e : spec.entries) {
    if (e.lag < 0) {
      throw Error(ErrorCode::kInvalidLagSpec, "negative lag for '" + e.feature + "'", e.feature);
    }
    if (!seen.emplace(e.feature, e.lag).second) {
      throw Error(ErrorCode::kInvalidLagSpec,
                  "duplicate lag (" + e.feature + ", " + std::to_string(e.lag) + ")", e.feature);
    }
    refs.push_back(table.Resolve(e.feature));
    std::string name = LagColumnName(e.feature, e.lag);
    if (table.HasColumn(name)) {
      throw Error(ErrorCode::kInvalidLagSpec, "column '" + name + "' already exists", name);
    }
    names.push_back(std::move(name));
    max_lag = std::max(max_lag, e.lag);
  }
  if (static_cast<std::size_t>(max_lag) >= table.size()) {
    throw Error(ErrorCode::kLagExceedsHistory,
                "lag " + std::to_string(max_lag) + " exceeds table length " +
                    std::to_string(table.size()));
  }
  std::vector<MarketRecord> rows;
  rows.reserve(table.size() - max_lag);
  const auto src = table.rows();
  for (std::size_t t = max_lag; t < src.size(); ++t) {
    MarketRecord r = src[t];
    for (std::size_t k = 0; k < refs.size(); ++k) {
      r.fundamentals.push_back(refs[k].Of(src[t - spec.entries[k].lag]));
    }
    rows.push_back(std::move(r));
  }
  return MarketTable(table.resolution(), std::move(names), std::move(rows));
}

}  // namespace powerarb::data
