#ifndef POWERARB_PNL_HPP
#define POWERARB_PNL_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "powerarb/timestamp.hpp"

namespace powerarb {

// Hourly P&L with its running sum; cumulative[k] = hourly[0] + ... + hourly[k].
struct PnlSeries {
  std::vector<Timestamp> timestamps;
  std::vector<double> hourly;
  std::vector<double> cumulative;

  void Append(Timestamp t, double pnl) {
    timestamps.push_back(t);
    hourly.push_back(pnl);
    cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + pnl);
  }
  void Extend(const PnlSeries& other) {
    for (std::size_t i = 0; i < other.size(); ++i) Append(other.timestamps[i], other.hourly[i]);
  }
  std::size_t size() const { return hourly.size(); }
  double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

// Columns: timestamp,hourly_pnl,cumulative_pnl
void WritePnlSeries(std::ostream& out, const PnlSeries& series);
PnlSeries ReadPnlSeries(std::istream& in);
void SavePnlSeries(const std::string& path, const PnlSeries& series);
PnlSeries LoadPnlSeries(const std::string& path);

}  // namespace powerarb

#endif  // POWERARB_PNL_HPP
