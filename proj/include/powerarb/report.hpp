#ifndef POWERARB_REPORT_HPP
#define POWERARB_REPORT_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "powerarb/pnl.hpp"

namespace powerarb::report {

// counts[i] covers [edges[i], edges[i+1]); the last bin also takes edges.back().
struct Histogram {
  std::string name;
  std::vector<double> edges;
  std::vector<std::size_t> counts;

  std::size_t total() const;
};

// Equal-width bins over [lo, hi]; values outside are clamped into the end bins.
Histogram BuildHistogram(std::string name, const std::vector<double>& values, std::size_t bins,
                         double lo, double hi);
// Range taken from the data; a constant sample gets a unit-width range.
Histogram BuildHistogram(std::string name, const std::vector<double>& values, std::size_t bins);

// Columns: bin_lo,bin_hi,count
void WriteHistogram(std::ostream& out, const Histogram& h);

struct NamedSeries {
  std::string name;
  PnlSeries series;
};

// Cumulative P&L of every strategy on the union of their timestamps; a
// strategy's value carries forward over timestamps it lacks.
struct AlignedCurves {
  std::vector<Timestamp> timestamps;
  std::vector<std::string> names;
  std::vector<std::vector<double>> cumulative;  // one row per strategy
};

AlignedCurves AlignCurves(const std::vector<NamedSeries>& series);
void WriteAlignedCurves(std::ostream& out, const AlignedCurves& curves);

// "+48%", "-12%"; whole percent rounded half away from zero.
std::string FormatPercentChange(double value, double reference);

struct SummaryRow {
  std::string strategy;
  double total = 0.0;
  std::string vs_best_benchmark;
};

// `agent_names` are compared against the best total among the other strategies.
std::vector<SummaryRow> Summarize(const std::vector<NamedSeries>& series,
                                  const std::vector<std::string>& agent_names);
void WriteSummary(std::ostream& out, const std::vector<SummaryRow>& rows,
                  const std::string& fingerprint);

std::string RenderCurvesSvg(const AlignedCurves& curves, const std::string& title);
std::string RenderHistogramSvg(const Histogram& h);

}  // namespace powerarb::report

#endif  // POWERARB_REPORT_HPP
