#include "powerarb/pnl.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "powerarb/error.hpp"

namespace powerarb {

void WritePnlSeries(std::ostream& out, const PnlSeries& s) {
  out << "timestamp,hourly_pnl,cumulative_pnl\n";
  char buf[96];
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", s.hourly[i], s.cumulative[i]);
    out << FormatIso8601(s.timestamps[i]) << buf;
  }
}

PnlSeries ReadPnlSeries(std::istream& in) {
  PnlSeries s;
  std::string line;
  if (!std::getline(in, line) || line.rfind("timestamp,hourly_pnl", 0) != 0) {
    throw Error(ErrorCode::kParseError, "not a P&L series file");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw Error(ErrorCode::kParseError, "bad P&L row '" + line + "'");
    }
    s.Append(ParseIso8601(line.substr(0, c1)), std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
  }
  return s;
}

void SavePnlSeries(const std::string& path, const PnlSeries& series) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'", path);
  WritePnlSeries(out, series);
}

PnlSeries LoadPnlSeries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'", path);
  return ReadPnlSeries(in);
}

}  // namespace powerarb
