#ifndef POWERARB_INVARIANTS_HPP
#define POWERARB_INVARIANTS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "powerarb/market_table.hpp"
#include "powerarb/pnl.hpp"

namespace powerarb::invariants {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Random episodes on the market: hourly total equals the quarter sum, and an
// hour without fills earns s_da (p_h - p_da).
CheckResult CheckAccounting(const data::MarketTable& market, std::size_t episodes,
                            std::uint64_t seed);
// Reported P&L is identical across reward modes for one action sequence.
CheckResult CheckShapingNeutrality(const data::MarketTable& market, std::size_t episodes,
                                   std::uint64_t seed);
// Adversarial actions never leave quarter consumption outside [5, 50] MWh.
CheckResult CheckFeasibility(const data::MarketTable& market, std::size_t episodes,
                             std::uint64_t seed);
// Ladder clearing equals a per-level enumeration on random cases.
CheckResult CheckClearing(std::size_t cases, std::uint64_t seed);
// P3 earns at least P2 in every hour.
CheckResult CheckP3DominatesP2(const data::MarketTable& market);
CheckResult CheckPnlSeries(const std::string& name, const PnlSeries& series);

std::vector<CheckResult> RunMarketChecks(const data::MarketTable& market, std::uint64_t seed);

}  // namespace powerarb::invariants

#endif  // POWERARB_INVARIANTS_HPP
