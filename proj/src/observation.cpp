#include "powerarb/observation.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "powerarb/error.hpp"

namespace powerarb::data {

std::size_t WindowStride(Level level, Resolution resolution) {
  if (level == Level::kDayAhead && resolution == Resolution::kQuarterHourly) return 4;
  return 1;
}

std::size_t WindowSteps(const ObservationSpec& spec, Resolution resolution) {
  if (spec.lookback_days < 0) {
    throw Error(ErrorCode::kInvalidConfig, "lookback_days must be non-negative", "lookback_days");
  }
  if (spec.lookback_days == 0) return 1;
  const std::size_t per_day =
      (spec.level == Level::kBalancing && resolution == Resolution::kQuarterHourly) ? 96 : 24;
  return static_cast<std::size_t>(spec.lookback_days) * per_day;
}

std::size_t ObservationDimension(const ObservationSpec& spec, Resolution resolution) {
  return WindowSteps(spec, resolution) * spec.features.size();
}

Standardizer::Standardizer(std::vector<std::string> names, std::vector<double> means,
                           std::vector<double> stddevs)
    : names_(std::move(names)), means_(std::move(means)), stddevs_(std::move(stddevs)) {
  if (means_.size() != names_.size() || stddevs_.size() != names_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "standardizer arrays differ in length");
  }
  for (std::size_t i = 0; i < stddevs_.size(); ++i) {
    if (!(stddevs_[i] > 0.0) || !std::isfinite(means_[i])) {
      throw Error(ErrorCode::kInvalidConfig, "standardizer needs finite mean and stddev > 0",
                  names_[i]);
    }
  }
}

Standardizer Standardizer::Fit(const MarketTable& table, const std::vector<std::string>& features,
                               Timestamp begin, Timestamp end) {
  std::vector<double> means, stds;
  for (const auto& name : features) {
    const FeatureRef ref = table.Resolve(name);
    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;
    for (const auto& r : table.rows()) {
      if (r.timestamp < begin || r.timestamp >= end) continue;
      const double v = ref.Of(r);
      if (std::isnan(v)) continue;
      sum += v;
      ++n;
    }
    if (n == 0) {
      throw Error(ErrorCode::kCoverageGap, "no rows to standardize '" + name + "'", name);
    }
    const double mean = sum / static_cast<double>(n);
    for (const auto& r : table.rows()) {
      if (r.timestamp < begin || r.timestamp >= end) continue;
      const double v = ref.Of(r);
      if (std::isnan(v)) continue;
      sum_sq += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(sum_sq / static_cast<double>(n));
    means.push_back(mean);
    stds.push_back(sd > 1e-12 ? sd : 1.0);
  }
  return Standardizer(features, std::move(means), std::move(stds));
}

int Standardizer::Find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void Standardizer::Write(std::ostream& out) const {
  out << "# standardizer: feature mean stddev\n";
  char buf[128];
  for (std::size_t i = 0; i < names_.size(); ++i) {
    std::snprintf(buf, sizeof(buf), " %.17g %.17g\n", means_[i], stddevs_[i]);
    out << names_[i] << buf;
  }
}

Standardizer Standardizer::Read(std::istream& in) {
  std::vector<std::string> names;
  std::vector<double> means, stds;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name;
    double m = 0.0, s = 0.0;
    if (!(ls >> name >> m >> s)) {
      throw Error(ErrorCode::kParseError, "bad standardizer line '" + line + "'");
    }
    names.push_back(name);
    means.push_back(m);
    stds.push_back(s);
  }
  return Standardizer(std::move(names), std::move(means), std::move(stds));
}

ObservationBuilder::ObservationBuilder(const MarketTable& table, ObservationSpec spec,
                                       const Standardizer* standardizer)
    : table_(&table),
      spec_(std::move(spec)),
      standardizer_(standardizer),
      stride_(WindowStride(spec_.level, table.resolution())),
      steps_(WindowSteps(spec_, table.resolution())) {
  for (const auto& name : spec_.features) {
    refs_.push_back(table.Resolve(name));
    standardizer_index_.push_back(standardizer ? standardizer->Find(name) : -1);
  }
}

void ObservationBuilder::AtRow(std::size_t row, double* out) const {
  if (row >= table_->size()) {
    throw Error(ErrorCode::kInsufficientHistory, "row outside the table");
  }
  if (row < first_valid_row()) {
    throw Error(ErrorCode::kInsufficientHistory,
                "look-back window before " + FormatIso8601(table_->row(row).timestamp) +
                    " leaves the table",
                FormatIso8601(table_->row(row).timestamp));
  }
  const auto rows = table_->rows();
  std::size_t k = 0;
  for (std::size_t s = 0; s < steps_; ++s) {
    const MarketRecord& r = rows[row - (steps_ - 1 - s) * stride_];
    for (std::size_t f = 0; f < refs_.size(); ++f) {
      const double v = refs_[f].Of(r);
      out[k++] = standardizer_ ? standardizer_->Apply(standardizer_index_[f], v) : v;
    }
  }
}

ObservationVector ObservationBuilder::AtRow(std::size_t row) const {
  ObservationVector v(static_cast<Eigen::Index>(dimension()));
  AtRow(row, v.data());
  return v;
}

ObservationVector ObservationBuilder::At(Timestamp t) const {
  const auto row = table_->RowAt(t);
  if (!row) {
    throw Error(ErrorCode::kInsufficientHistory, FormatIso8601(t) + " is not in the table",
                FormatIso8601(t));
  }
  return AtRow(*row);
}

ObservationVector AssembleObservation(const MarketTable& table, Timestamp t,
                                      const ObservationSpec& spec,
                                      const Standardizer* standardizer) {
  return ObservationBuilder(table, spec, standardizer).At(t);
}

}  // namespace powerarb::data
