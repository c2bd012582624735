#ifndef POWERARB_SYNTHETIC_HPP
#define POWERARB_SYNTHETIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "powerarb/market_table.hpp"

namespace powerarb::data {

// One component of the daily price-regime mixture. Each day draws a regime;
// the day-ahead price is centred on da_mean and balancing clearing prices
// deviate from it by exponential tails of mean bm_scale.
struct PriceRegime {
  double weight = 1.0;
  double da_mean = 50.0;
  double da_std = 10.0;
  double bm_scale = 40.0;
};

struct SynthConfig {
  int days = 365;
  std::uint64_t seed = 7;
  int start_year = 2015;
  // Marginal probability of a Shortage quarter.
  double shortage_base_prob = 0.4;
  // Marginal probability of a Balanced quarter; capped at 1 - shortage_base_prob.
  double balanced_prob = 0.05;
  // Probability that a quarter repeats the previous quarter's state.
  double persistence = 0.6;
  // How strongly the forecast residual load tilts the shortage probability, in [0, 1].
  double signal_strength = 0.9;
  // Extra day-ahead price per unit of standardized forecast residual load.
  double da_load_sensitivity = 8.0;
  // Minimum gap between the day-ahead price and the clearing price on the active side.
  double bm_offset = 10.0;
  // Linear drift per elapsed year, applied to every regime.
  double da_trend_per_year = 0.0;
  double bm_scale_trend_per_year = 0.0;
  std::vector<PriceRegime> price_regimes = {{0.7, 45.0, 8.0, 30.0}, {0.3, 70.0, 20.0, 70.0}};
};

void ValidateSynthConfig(const SynthConfig& config);

// Fundamental columns produced by the generator, in order.
const std::vector<std::string>& SyntheticFundamentalNames();

struct SyntheticMarket {
  MarketTable table;
  // Per row: probability of Shortage given a non-Balanced fresh draw. Ground
  // truth for Bayes-rate calculations; not part of the table.
  std::vector<double> shortage_signal_prob;
};

MarketTable GenerateSyntheticMarket(const SynthConfig& config);
SyntheticMarket GenerateSyntheticMarketWithTruth(const SynthConfig& config);

// Parses "w:da_mean:da_std:bm_scale;..." into regimes.
std::vector<PriceRegime> ParsePriceRegimes(const std::string& text);
std::string FormatPriceRegimes(const std::vector<PriceRegime>& regimes);

}  // namespace powerarb::data

#endif  // POWERARB_SYNTHETIC_HPP
