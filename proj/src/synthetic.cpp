#include "powerarb/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "powerarb/error.hpp"
#include "powerarb/rng.hpp"

namespace powerarb::data {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Nominal centre and spread of the forecast residual load, used to turn it
// into a dimensionless signal.
constexpr double kResidualCentre = 8500.0;
constexpr double kResidualSpread = 2500.0;

enum Col : std::size_t {
  kLoadForecast,
  kActualLoad,
  kWindForecast,
  kGenWind,
  kSolarForecast,
  kGenSolar,
  kGenGas,
  kNtcForecast,
  kCrossBorderFlow,
  kResidualLoad,
  kWeekend,
  kNumCols,
};

std::size_t PickRegime(const std::vector<PriceRegime>& regimes, double total, Rng& rng) {
  double u = rng.Uniform() * total;
  for (std::size_t i = 0; i < regimes.size(); ++i) {
    u -= regimes[i].weight;
    if (u < 0.0) return i;
  }
  return regimes.size() - 1;
}

}  // namespace

const std::vector<std::string>& SyntheticFundamentalNames() {
  static const std::vector<std::string> names = {
      "load_forecast", "actual_load",  "wind_forecast", "gen_wind",
      "solar_forecast", "gen_solar",   "gen_gas",       "ntc_forecast",
      "cross_border_flow", "residual_load", "weekend"};
  return names;
}

void ValidateSynthConfig(const SynthConfig& c) {
  auto bad = [](const std::string& key, const std::string& why) {
    throw Error(ErrorCode::kInvalidConfig, key + ": " + why, key);
  };
  if (c.days < 1) bad("days", "must be >= 1");
  auto prob = [&](double p, const char* key) {
    if (!(p >= 0.0 && p <= 1.0)) bad(key, "must lie in [0, 1]");
  };
  prob(c.shortage_base_prob, "shortage_base_prob");
  prob(c.balanced_prob, "balanced_prob");
  prob(c.persistence, "persistence");
  prob(c.signal_strength, "signal_strength");
  if (c.price_regimes.empty()) bad("price_regimes", "at least one regime required");
  for (const auto& r : c.price_regimes) {
    if (!(r.weight > 0.0) || !std::isfinite(r.weight)) bad("price_regimes", "weights must be > 0");
    if (!(r.da_std >= 0.0) || !(r.bm_scale >= 0.0) || !std::isfinite(r.da_mean)) {
      bad("price_regimes", "spreads must be >= 0 and means finite");
    }
  }
  if (!std::isfinite(c.da_load_sensitivity) || !std::isfinite(c.da_trend_per_year) ||
      !std::isfinite(c.bm_scale_trend_per_year) || !(c.bm_offset >= 0.0)) {
    bad("trend", "trend and offset parameters must be finite, offset >= 0");
  }
}

SyntheticMarket GenerateSyntheticMarketWithTruth(const SynthConfig& c) {
  ValidateSynthConfig(c);
  Rng rng(c.seed);
  Rng weather(rng.Fork());
  Rng prices(rng.Fork());
  Rng regulation(rng.Fork());
  Rng clearing(rng.Fork());

  const double balanced = std::min(c.balanced_prob, 1.0 - c.shortage_base_prob);
  const double non_balanced = 1.0 - balanced;
  // Shortage probability conditional on a non-balanced draw.
  const double q = non_balanced > 0.0 ? std::clamp(c.shortage_base_prob / non_balanced, 0.0, 1.0)
                                      : 0.0;
  double regime_total = 0.0;
  for (const auto& r : c.price_regimes) regime_total += r.weight;

  const Timestamp start = StartOfYear(c.start_year);
  const std::size_t n = static_cast<std::size_t>(c.days) * 96;
  std::vector<MarketRecord> rows;
  rows.reserve(n);
  SyntheticMarket out{MarketTable(Resolution::kQuarterHourly, SyntheticFundamentalNames(), {}),
                      {}};
  out.shortage_signal_prob.reserve(n);

  double wind_latent = 0.0, load_noise = 0.0;
  double cloud = 0.5, ntc_noise = 0.0;
  std::size_t regime = 0;
  double da_price = 0.0, wind_err = 0.0, residual_signal = 0.0;
  std::vector<double> signal;
  std::vector<std::size_t> regime_of;
  signal.reserve(n);
  regime_of.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const Timestamp t = start + static_cast<Timestamp>(i) * kSecondsPerQuarter;
    const std::size_t day = i / 96;
    const int quarter_of_hour = static_cast<int>(i % 4);
    const double hour = static_cast<double>(i % 96) / 4.0;
    const double doy = static_cast<double>(day % 365);
    const double years = static_cast<double>(t - start) / (365.0 * kSecondsPerDay);
    const bool weekend = DayOfWeek(t) >= 5;

    if (i % 96 == 0) {
      cloud = std::clamp(0.6 * cloud + 0.4 * weather.Uniform(), 0.0, 1.0);
      ntc_noise = weather.Normal(0.0, 200.0);
      regime = PickRegime(c.price_regimes, regime_total, prices);
    }

    MarketRecord r;
    r.timestamp = t;
    r.fundamentals.assign(kNumCols, 0.0);
    auto& f = r.fundamentals;

    if (quarter_of_hour == 0) {
      wind_latent = 0.97 * wind_latent + std::sqrt(1.0 - 0.97 * 0.97) * weather.Normal();
      load_noise = 0.9 * load_noise + std::sqrt(1.0 - 0.9 * 0.9) * weather.Normal();
      wind_err = weather.Normal(0.0, 0.08);
    }
    const double season = std::cos(kTwoPi * (doy - 172.0) / 365.0);
    f[kLoadForecast] = 13000.0 + 2000.0 * std::sin(kTwoPi * (hour - 9.0) / 24.0) -
                       1500.0 * (weekend ? 1.0 : 0.0) - 800.0 * season;
    f[kActualLoad] = f[kLoadForecast] + 300.0 * load_noise;
    f[kWindForecast] = 3000.0 + 2200.0 * std::tanh(wind_latent);
    f[kGenWind] = std::max(0.0, f[kWindForecast] * (1.0 + wind_err));
    const double daylight = std::max(0.0, std::sin(std::numbers::pi * (hour - 6.0) / 12.0));
    f[kSolarForecast] = 3500.0 * daylight * (0.5 + 0.5 * cloud) * (1.0 + 0.4 * season);
    f[kGenSolar] = f[kSolarForecast] * (0.95 + 0.1 * weather.Uniform());
    f[kResidualLoad] = f[kActualLoad] - f[kGenWind] - f[kGenSolar];
    f[kGenGas] = 0.6 * std::max(0.0, f[kResidualLoad] - 4000.0);
    f[kNtcForecast] = 4500.0 + 500.0 * std::sin(kTwoPi * doy / 365.0) + ntc_noise;
    f[kCrossBorderFlow] =
        std::clamp(0.3 * (f[kResidualLoad] - kResidualCentre) + weather.Normal(0.0, 300.0),
                   -f[kNtcForecast], f[kNtcForecast]);
    f[kWeekend] = weekend ? 1.0 : 0.0;

    const double forecast_residual = f[kLoadForecast] - f[kWindForecast] - f[kSolarForecast];
    if (quarter_of_hour == 0) {
      const PriceRegime& pr = c.price_regimes[regime];
      residual_signal = (forecast_residual - kResidualCentre) / kResidualSpread;
      da_price = pr.da_mean + c.da_trend_per_year * years +
                 c.da_load_sensitivity * residual_signal + prices.Normal(0.0, pr.da_std);
    }
    r.da_price = da_price;

    signal.push_back(std::tanh(1.5 * residual_signal));
    regime_of.push_back(regime);
    rows.push_back(std::move(r));
  }

  // Tilt centred on its window mean; marginal shortage rate stays q.
  double mean_signal = 0.0;
  for (double v : signal) mean_signal += v;
  mean_signal = n > 0 ? mean_signal / static_cast<double>(n) : 0.0;
  const double tilt = c.signal_strength * std::min(q, 1.0 - q) / (1.0 + std::abs(mean_signal));

  RegulationState prev_state = RegulationState::kBalanced;
  for (std::size_t i = 0; i < n; ++i) {
    MarketRecord& r = rows[i];
    const double years = static_cast<double>(r.timestamp - start) / (365.0 * kSecondsPerDay);
    const double da_price = r.da_price;
    const double p_short = std::clamp(q + tilt * (signal[i] - mean_signal), 0.0, 1.0);
    out.shortage_signal_prob.push_back(p_short);
    RegulationState state;
    if (i > 0 && regulation.Bernoulli(c.persistence)) {
      state = prev_state;
    } else if (regulation.Bernoulli(balanced)) {
      state = RegulationState::kBalanced;
    } else {
      state = regulation.Bernoulli(p_short) ? RegulationState::kShortage
                                            : RegulationState::kSurplus;
    }
    r.regulation_state = state;
    prev_state = state;

    const double scale =
        std::max(0.0, c.price_regimes[regime_of[i]].bm_scale * (1.0 + c.bm_scale_trend_per_year * years));
    const double jitter_a = 5.0 * clearing.Uniform();
    const double jitter_b = 5.0 * clearing.Uniform();
    const double tail = clearing.Exponential(std::max(scale, 1e-9));
    switch (state) {
      case RegulationState::kShortage:
        r.bm_ask_clearing = da_price + c.bm_offset + tail;
        r.bm_bid_clearing = da_price - jitter_a;
        break;
      case RegulationState::kSurplus:
        r.bm_bid_clearing = da_price - c.bm_offset - tail;
        r.bm_ask_clearing = da_price + jitter_a;
        break;
      case RegulationState::kBalanced:
        r.bm_bid_clearing = da_price - jitter_a;
        r.bm_ask_clearing = da_price + jitter_b;
        break;
    }
  }
  out.table = MarketTable(Resolution::kQuarterHourly, SyntheticFundamentalNames(), std::move(rows));
  return out;
}

MarketTable GenerateSyntheticMarket(const SynthConfig& config) {
  return GenerateSyntheticMarketWithTruth(config).table;
}

std::vector<PriceRegime> ParsePriceRegimes(const std::string& text) {
  std::vector<PriceRegime> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    if (item.empty()) continue;
    PriceRegime r;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream is(item);
    if (!(is >> r.weight >> c1 >> r.da_mean >> c2 >> r.da_std >> c3 >> r.bm_scale) || c1 != ':' ||
        c2 != ':' || c3 != ':') {
      throw Error(ErrorCode::kInvalidConfig, "bad price regime '" + item + "'", "price_regimes");
    }
    out.push_back(r);
  }
  return out;
}

std::string FormatPriceRegimes(const std::vector<PriceRegime>& regimes) {
  std::string out;
  char buf[160];
  for (const auto& r : regimes) {
    if (!out.empty()) out += ';';
    std::snprintf(buf, sizeof(buf), "%g:%g:%g:%g", r.weight, r.da_mean, r.da_std, r.bm_scale);
    out += buf;
  }
  return out;
}

}  // namespace powerarb::data
