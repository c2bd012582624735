#ifndef POWERARB_TEST_SUPPORT_HPP
#define POWERARB_TEST_SUPPORT_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "powerarb/market_table.hpp"
#include "powerarb/timestamp.hpp"

namespace powerarb::fixtures {

struct QuarterSpec {
  double da_price = 60.0;
  double bid_clear = 0.0;
  double ask_clear = 100.0;
  data::RegulationState state = data::RegulationState::kBalanced;
};

// Quarter-hourly table starting 2015-01-01 with one fundamental `x` = row index.
inline data::MarketTable QuarterTable(std::size_t rows,
                                      const std::function<QuarterSpec(std::size_t)>& spec) {
  std::vector<data::MarketRecord> out(rows);
  const Timestamp t0 = MakeTimestamp(2015, 1, 1);
  for (std::size_t i = 0; i < rows; ++i) {
    const QuarterSpec q = spec(i);
    auto& r = out[i];
    r.timestamp = t0 + static_cast<Timestamp>(i) * 900;
    r.da_price = q.da_price;
    r.bm_bid_clearing = q.bid_clear;
    r.bm_ask_clearing = q.ask_clear;
    r.regulation_state = q.state;
    r.fundamentals = {static_cast<double>(i)};
  }
  return data::MarketTable(data::Resolution::kQuarterHourly, {"x"}, std::move(out));
}

inline data::MarketTable HourlyTable(std::size_t rows) {
  std::vector<data::MarketRecord> out(rows);
  const Timestamp t0 = MakeTimestamp(2015, 1, 1);
  for (std::size_t i = 0; i < rows; ++i) {
    out[i].timestamp = t0 + static_cast<Timestamp>(i) * 3600;
    out[i].da_price = 40.0 + static_cast<double>(i);
    out[i].bm_bid_clearing = 0.0;
    out[i].bm_ask_clearing = 100.0;
    out[i].fundamentals = {static_cast<double>(i + 1)};
  }
  return data::MarketTable(data::Resolution::kHourly, {"x"}, std::move(out));
}

}  // namespace powerarb::fixtures

#endif  // POWERARB_TEST_SUPPORT_HPP
