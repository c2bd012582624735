#include "powerarb/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "powerarb/error.hpp"

namespace powerarb::report {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double width = 720, height = 420, left = 70, right = 150, top = 40, bottom = 50;
  double x0, x1, y0, y1;
  double X(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double Y(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

void Axes(std::ostringstream& svg, const Frame& f, const std::string& title) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\""
      << f.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << f.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << Escape(title) << "</text>\n";
  svg << "<line x1=\"" << f.left << "\" y1=\"" << f.height - f.bottom << "\" x2=\""
      << f.width - f.right << "\" y2=\"" << f.height - f.bottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\"" << f.left << "\" y2=\""
      << f.height - f.bottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
    svg << "<text x=\"" << f.left - 4 << "\" y=\"" << Num(f.Y(y) + 4)
        << "\" text-anchor=\"end\">" << Num(y) << "</text>\n";
    svg << "<text x=\"" << Num(f.X(x)) << "\" y=\"" << f.height - f.bottom + 16
        << "\" text-anchor=\"middle\">" << Num(x) << "</text>\n";
  }
}

}  // namespace

std::size_t Histogram::total() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

Histogram BuildHistogram(std::string name, const std::vector<double>& values, std::size_t bins,
                         double lo, double hi) {
  if (bins == 0) throw Error(ErrorCode::kInvalidConfig, "histogram needs at least one bin", name);
  if (!(hi > lo)) throw Error(ErrorCode::kInvalidConfig, "histogram range is empty", name);
  Histogram h;
  h.name = std::move(name);
  h.counts.assign(bins, 0);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins));
  }
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    auto idx = static_cast<long>(std::floor((v - lo) / (hi - lo) * static_cast<double>(bins)));
    idx = std::clamp<long>(idx, 0, static_cast<long>(bins) - 1);
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

Histogram BuildHistogram(std::string name, const std::vector<double>& values, std::size_t bins) {
  double lo = 0.0, hi = 1.0;
  bool any = false;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    if (!any) lo = hi = v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    any = true;
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  return BuildHistogram(std::move(name), values, bins, lo, hi);
}

void WriteHistogram(std::ostream& out, const Histogram& h) {
  out << "bin_lo,bin_hi,count\n";
  char buf[96];
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%zu\n", h.edges[i], h.edges[i + 1], h.counts[i]);
    out << buf;
  }
}

AlignedCurves AlignCurves(const std::vector<NamedSeries>& series) {
  AlignedCurves out;
  std::vector<Timestamp> all;
  for (const auto& s : series) all.insert(all.end(), s.series.timestamps.begin(), s.series.timestamps.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  out.timestamps = all;
  for (const auto& s : series) {
    out.names.push_back(s.name);
    std::vector<double> row(all.size(), 0.0);
    std::size_t k = 0;
    double last = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      while (k < s.series.size() && s.series.timestamps[k] <= all[i]) last = s.series.cumulative[k++];
      row[i] = last;
    }
    out.cumulative.push_back(std::move(row));
  }
  return out;
}

void WriteAlignedCurves(std::ostream& out, const AlignedCurves& curves) {
  out << "timestamp";
  for (const auto& n : curves.names) out << ',' << n;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < curves.timestamps.size(); ++i) {
    out << FormatIso8601(curves.timestamps[i]);
    for (const auto& row : curves.cumulative) {
      std::snprintf(buf, sizeof(buf), ",%.17g", row[i]);
      out << buf;
    }
    out << '\n';
  }
}

std::string FormatPercentChange(double value, double reference) {
  if (reference == 0.0 || !std::isfinite(value) || !std::isfinite(reference)) return "n/a";
  const double pct = std::round((value - reference) / std::fabs(reference) * 100.0);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.0f%%", pct == 0.0 ? 0.0 : pct);
  return buf;
}

std::vector<SummaryRow> Summarize(const std::vector<NamedSeries>& series,
                                  const std::vector<std::string>& agent_names) {
  auto is_agent = [&](const std::string& n) {
    return std::find(agent_names.begin(), agent_names.end(), n) != agent_names.end();
  };
  bool have_best = false;
  double best = 0.0;
  for (const auto& s : series) {
    if (is_agent(s.name)) continue;
    if (!have_best || s.series.total() > best) best = s.series.total();
    have_best = true;
  }
  std::vector<SummaryRow> rows;
  for (const auto& s : series) {
    SummaryRow r{s.name, s.series.total(), ""};
    r.vs_best_benchmark = have_best ? FormatPercentChange(r.total, best) : "n/a";
    rows.push_back(std::move(r));
  }
  return rows;
}

void WriteSummary(std::ostream& out, const std::vector<SummaryRow>& rows,
                  const std::string& fingerprint) {
  out << "# fingerprint=" << fingerprint << '\n';
  out << "strategy,total_pnl,vs_best_benchmark\n";
  char buf[48];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.total);
    out << r.strategy << ',' << buf << ',' << r.vs_best_benchmark << '\n';
  }
}

std::string RenderCurvesSvg(const AlignedCurves& curves, const std::string& title) {
  Frame f;
  f.x0 = 0;
  f.x1 = std::max<double>(1.0, static_cast<double>(curves.timestamps.size()) - 1);
  f.y0 = 0.0;
  f.y1 = 0.0;
  for (const auto& row : curves.cumulative) {
    for (double v : row) {
      f.y0 = std::min(f.y0, v);
      f.y1 = std::max(f.y1, v);
    }
  }
  if (f.y1 <= f.y0) f.y1 = f.y0 + 1.0;
  std::ostringstream svg;
  Axes(svg, f, title);
  const std::size_t n = curves.timestamps.size();
  const std::size_t step = std::max<std::size_t>(1, n / 1500);
  for (std::size_t s = 0; s < curves.cumulative.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < n; i += step) {
      svg << Num(f.X(static_cast<double>(i))) << ',' << Num(f.Y(curves.cumulative[s][i])) << ' ';
    }
    if (n > 0) svg << Num(f.X(static_cast<double>(n - 1))) << ',' << Num(f.Y(curves.cumulative[s][n - 1]));
    svg << "\"/>\n";
    const double ly = f.top + 16.0 * static_cast<double>(s);
    svg << "<rect x=\"" << f.width - f.right + 10 << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\""
        << color << "\"/>\n";
    svg << "<text x=\"" << f.width - f.right + 24 << "\" y=\"" << ly + 9 << "\">"
        << Escape(curves.names[s]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string RenderHistogramSvg(const Histogram& h) {
  Frame f;
  f.right = 30;
  f.x0 = h.edges.front();
  f.x1 = h.edges.back();
  f.y0 = 0.0;
  f.y1 = 1.0;
  for (auto c : h.counts) f.y1 = std::max(f.y1, static_cast<double>(c));
  std::ostringstream svg;
  Axes(svg, f, h.name);
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double x = f.X(h.edges[i]);
    const double w = std::max(0.5, f.X(h.edges[i + 1]) - x - 1.0);
    const double y = f.Y(static_cast<double>(h.counts[i]));
    svg << "<rect x=\"" << Num(x) << "\" y=\"" << Num(y) << "\" width=\"" << Num(w) << "\" height=\""
        << Num(f.Y(0.0) - y) << "\" fill=\"" << kPalette[0] << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace powerarb::report
