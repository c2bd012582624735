#ifndef POWERARB_OBSERVATION_HPP
#define POWERARB_OBSERVATION_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "powerarb/market_table.hpp"

namespace powerarb::data {

using ObservationVector = Eigen::VectorXd;

enum class Level { kDayAhead, kBalancing };

// Day-ahead windows step hourly; balancing windows step at the table's own resolution.
struct ObservationSpec {
  Level level = Level::kDayAhead;
  std::vector<std::string> features;
  int lookback_days = 3;
};

// Number of rows between consecutive window samples.
std::size_t WindowStride(Level level, Resolution resolution);
// lookback_days * samples-per-day, or 1 when lookback_days == 0.
std::size_t WindowSteps(const ObservationSpec& spec, Resolution resolution);
std::size_t ObservationDimension(const ObservationSpec& spec, Resolution resolution);

// Per-feature z-score parameters. Features absent from the standardizer pass through unchanged.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<std::string> names, std::vector<double> means,
               std::vector<double> stddevs);

  // Statistics over rows with timestamps in [begin, end). A zero spread is stored as 1.
  static Standardizer Fit(const MarketTable& table, const std::vector<std::string>& features,
                          Timestamp begin, Timestamp end);

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& stddevs() const { return stddevs_; }
  bool empty() const { return names_.empty(); }

  // Index of the feature or -1.
  int Find(const std::string& name) const;
  double Apply(int index, double value) const {
    return index < 0 ? value : (value - means_[index]) / stddevs_[index];
  }

  void Write(std::ostream& out) const;
  static Standardizer Read(std::istream& in);

 private:
  std::vector<std::string> names_;
  std::vector<double> means_;
  std::vector<double> stddevs_;
};

// Flattens the look-back window ending at a given row. Layout is time-major,
// oldest sample first, features in spec order within each sample.
class ObservationBuilder {
 public:
  ObservationBuilder(const MarketTable& table, ObservationSpec spec,
                     const Standardizer* standardizer = nullptr);

  std::size_t dimension() const { return steps_ * refs_.size(); }
  const ObservationSpec& spec() const { return spec_; }
  // Earliest row index that has a complete window.
  std::size_t first_valid_row() const { return (steps_ - 1) * stride_; }

  ObservationVector AtRow(std::size_t row) const;
  void AtRow(std::size_t row, double* out) const;
  ObservationVector At(Timestamp t) const;

 private:
  const MarketTable* table_;
  ObservationSpec spec_;
  std::vector<FeatureRef> refs_;
  std::vector<int> standardizer_index_;
  const Standardizer* standardizer_;
  std::size_t stride_;
  std::size_t steps_;
};

ObservationVector AssembleObservation(const MarketTable& table, Timestamp t,
                                      const ObservationSpec& spec,
                                      const Standardizer* standardizer = nullptr);

}  // namespace powerarb::data

#endif  // POWERARB_OBSERVATION_HPP
