#include "powerarb/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "powerarb/error.hpp"

namespace powerarb::config {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

[[noreturn]] void Bad(const std::string& key, const std::string& value, const char* want) {
  throw Error(ErrorCode::kInvalidConfig,
              "key '" + key + "': cannot read '" + value + "' as " + want, key);
}

double ToDouble(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) Bad(key, v, "a finite number");
    return d;
  } catch (const std::logic_error&) {
    Bad(key, v, "a number");
  }
}

long long ToInt(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) Bad(key, v, "an integer");
    return i;
  } catch (const std::logic_error&) {
    Bad(key, v, "an integer");
  }
}

std::size_t ToCount(const std::string& key, const std::string& v) {
  const long long i = ToInt(key, v);
  if (i < 0) Bad(key, v, "a non-negative integer");
  return static_cast<std::size_t>(i);
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  Bad(key, v, "a boolean");
}

// Shortest text that reads back to the same double.
std::string FromDouble(double d) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), d);
  return std::string(buf, r.ptr);
}

std::string FromBool(bool b) { return b ? "true" : "false"; }

std::string FromInts(const std::vector<int>& v) {
  std::string out;
  for (int x : v) out += (out.empty() ? "" : ",") + std::to_string(x);
  return out;
}

#define POWERARB_REAL(KEY, FIELD, DOC)                                                       \
  KeyInfo {                                                                                  \
    KEY, DOC, [](RunConfig& c, const std::string& v) { c.FIELD = ToDouble(KEY, v); },        \
        [](const RunConfig& c) { return FromDouble(c.FIELD); }                               \
  }
#define POWERARB_COUNT(KEY, FIELD, DOC)                                                      \
  KeyInfo {                                                                                  \
    KEY, DOC,                                                                                \
        [](RunConfig& c, const std::string& v) {                                             \
          c.FIELD = static_cast<decltype(c.FIELD)>(ToCount(KEY, v));                         \
        },                                                                                   \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                           \
  }
#define POWERARB_INT(KEY, FIELD, DOC)                                                        \
  KeyInfo {                                                                                  \
    KEY, DOC,                                                                                \
        [](RunConfig& c, const std::string& v) {                                             \
          c.FIELD = static_cast<decltype(c.FIELD)>(ToInt(KEY, v));                           \
        },                                                                                   \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                           \
  }
#define POWERARB_BOOL(KEY, FIELD, DOC)                                                       \
  KeyInfo {                                                                                  \
    KEY, DOC, [](RunConfig& c, const std::string& v) { c.FIELD = ToBool(KEY, v); },          \
        [](const RunConfig& c) { return FromBool(c.FIELD); }                                 \
  }
#define POWERARB_STRING(KEY, FIELD, DOC)                                                     \
  KeyInfo {                                                                                  \
    KEY, DOC, [](RunConfig& c, const std::string& v) { c.FIELD = v; },                       \
        [](const RunConfig& c) { return c.FIELD; }                                           \
  }
#define POWERARB_LIST(KEY, FIELD, DOC)                                                       \
  KeyInfo {                                                                                  \
    KEY, DOC, [](RunConfig& c, const std::string& v) { c.FIELD = SplitList(v); },            \
        [](const RunConfig& c) { return JoinList(c.FIELD); }                                 \
  }

std::vector<KeyInfo> BuildKeys() {
  std::vector<KeyInfo> keys = {
      POWERARB_STRING("data", data_path, "Market CSV read by every command except synth."),
      POWERARB_STRING("out", out_dir, "Output directory for artifacts."),
      POWERARB_STRING("model_dir", model_dir, "Trained model directory; empty means <out>/model."),
      KeyInfo{"resolution", "Row resolution of the input file: quarter or hourly.",
              [](RunConfig& c, const std::string& v) {
                if (v == "quarter") c.resolution = data::Resolution::kQuarterHourly;
                else if (v == "hourly") c.resolution = data::Resolution::kHourly;
                else Bad("resolution", v, "quarter or hourly");
              },
              [](const RunConfig& c) {
                return std::string(c.resolution == data::Resolution::kHourly ? "hourly" : "quarter");
              }},
      POWERARB_BOOL("expand_to_quarter_hour", expand_to_quarter_hour,
                    "Repeat each hourly row onto four quarter-hours after loading."),
      POWERARB_LIST("schema", schema, "Fundamental columns the input must contain."),
      KeyInfo{"lags", "Lag columns to add, as feature:steps pairs in table steps.",
              [](RunConfig& c, const std::string& v) { c.lags = ParseLagSpec(v); },
              [](const RunConfig& c) { return FormatLagSpec(c.lags); }},

      POWERARB_COUNT("synth_days", synth.days, "Days generated by synth."),
      POWERARB_COUNT("synth_seed", synth.seed, "Seed of the synthetic market."),
      POWERARB_INT("synth_start_year", synth.start_year, "First calendar year of the synthetic market."),
      POWERARB_REAL("shortage_base_prob", synth.shortage_base_prob,
                    "Marginal probability of a Shortage quarter."),
      POWERARB_REAL("balanced_prob", synth.balanced_prob, "Marginal probability of a Balanced quarter."),
      POWERARB_REAL("persistence", synth.persistence,
                    "Probability that a quarter keeps the previous regulation state."),
      POWERARB_REAL("signal_strength", synth.signal_strength,
                    "Tilt of the shortage probability by forecast residual load, in [0, 1]."),
      POWERARB_REAL("da_load_sensitivity", synth.da_load_sensitivity,
                    "Day-ahead price response to forecast residual load (EUR/MWh per sd)."),
      POWERARB_REAL("bm_offset", synth.bm_offset,
                    "Minimum distance of the active clearing price from the day-ahead price."),
      POWERARB_REAL("da_trend_per_year", synth.da_trend_per_year, "Day-ahead price drift per year."),
      POWERARB_REAL("bm_scale_trend_per_year", synth.bm_scale_trend_per_year,
                    "Relative drift per year of balancing price dispersion."),
      KeyInfo{"price_regimes", "Daily price regimes as weight:da_mean:da_std:bm_scale;...",
              [](RunConfig& c, const std::string& v) { c.synth.price_regimes = data::ParsePriceRegimes(v); },
              [](const RunConfig& c) { return data::FormatPriceRegimes(c.synth.price_regimes); }},

      POWERARB_LIST("da_features", pipeline.da_features, "Day-ahead observation features."),
      POWERARB_LIST("bm_features", pipeline.bm_features, "Balancing observation features."),
      POWERARB_INT("da_lookback_days", pipeline.da_lookback_days, "Day-ahead look-back window in days."),
      POWERARB_INT("bm_lookback_days", pipeline.bm_lookback_days, "Balancing look-back window in days."),
      POWERARB_BOOL("bm_context_features", pipeline.bm_context_features,
                    "Append the hour's DA position, DA price and quarter index to BM observations."),
      POWERARB_LIST("predictor_features", pipeline.predictor_features,
                    "Shortage predictor inputs; empty disables the predictor."),
      POWERARB_STRING("prediction_column", pipeline.prediction_column,
                      "Column holding the predicted shortage probability."),
      POWERARB_REAL("predictor_learning_rate", pipeline.predictor.learning_rate,
                    "Gradient descent step; <= 0 picks one from the curvature bound."),
      POWERARB_INT("predictor_iterations", pipeline.predictor.iterations, "Iteration cap."),
      POWERARB_REAL("predictor_l2", pipeline.predictor.l2, "L2 penalty on predictor weights."),
      POWERARB_REAL("predictor_tolerance", pipeline.predictor.tolerance,
                    "Stop when the gradient norm falls below this."),
      POWERARB_REAL("predictor_threshold", pipeline.predictor_threshold,
                    "Probability at or above which a quarter is called Shortage."),

      POWERARB_REAL("hydrogen_price", pipeline.hydrogen_price, "Hydrogen value in EUR/MWh."),
      POWERARB_BOOL("literal_eq1", pipeline.literal_eq1,
                    "Charge the full hourly DA cost in every quarter."),
      KeyInfo{"reward_mode", "raw, imitation, tranched or tranched-imitation.",
              [](RunConfig& c, const std::string& v) {
                c.pipeline.train.reward_mode = env::ParseRewardMode(v);
              },
              [](const RunConfig& c) {
                return std::string(env::RewardModeName(c.pipeline.train.reward_mode));
              }},
      POWERARB_BOOL("ladder", pipeline.train.ladder, "Balancing orders as 11-level ladders."),

      POWERARB_COUNT("episodes", pipeline.train.episodes, "Training episodes (one hour each)."),
      POWERARB_COUNT("seed", pipeline.train.seed, "Training seed."),
      POWERARB_COUNT("updates_per_episode", pipeline.train.updates_per_episode,
                     "Gradient updates per agent after each episode."),
      POWERARB_COUNT("moving_average_window", pipeline.train.moving_average_window,
                     "Episodes in the training-curve moving average."),
  };

  // Both agents share the DDPG defaults; da_ and bm_ prefixed keys set them separately.
  auto agent_keys = [&](const std::string& prefix, rl::DdpgConfig rl::TrainConfig::*member) {
    auto cfg = [member](RunConfig& c) -> rl::DdpgConfig& { return c.pipeline.train.*member; };
    auto ccfg = [member](const RunConfig& c) -> const rl::DdpgConfig& {
      return c.pipeline.train.*member;
    };
    auto real = [&](const std::string& name, double rl::DdpgConfig::*field, const std::string& doc) {
      const std::string key = prefix + name;
      keys.push_back(KeyInfo{key, doc,
                             [=](RunConfig& c, const std::string& v) { cfg(c).*field = ToDouble(key, v); },
                             [=](const RunConfig& c) { return FromDouble(ccfg(c).*field); }});
    };
    auto count = [&](const std::string& name, std::size_t rl::DdpgConfig::*field,
                     const std::string& doc) {
      const std::string key = prefix + name;
      keys.push_back(KeyInfo{key, doc,
                             [=](RunConfig& c, const std::string& v) { cfg(c).*field = ToCount(key, v); },
                             [=](const RunConfig& c) { return std::to_string(ccfg(c).*field); }});
    };
    const std::string who = prefix == "da_" ? "Day-ahead agent: " : "Balancing agent: ";
    real("actor_lr", &rl::DdpgConfig::actor_lr, who + "actor learning rate.");
    real("critic_lr", &rl::DdpgConfig::critic_lr, who + "critic learning rate.");
    real("tau", &rl::DdpgConfig::tau, who + "target soft-update rate.");
    real("gamma", &rl::DdpgConfig::gamma, who + "discount within the hour.");
    count("replay_capacity", &rl::DdpgConfig::replay_capacity, who + "replay ring capacity.");
    count("batch_size", &rl::DdpgConfig::batch_size, who + "minibatch size.");
    real("noise_start", &rl::DdpgConfig::noise_start, who + "initial exploration stddev (pre-squash).");
    real("noise_end", &rl::DdpgConfig::noise_end, who + "final exploration stddev.");
    real("noise_decay_fraction", &rl::DdpgConfig::noise_decay_fraction,
         who + "fraction of episodes over which noise decays.");
    real("reward_scale", &rl::DdpgConfig::reward_scale, who + "reward multiplier in critic targets.");
    real("preactivation_penalty", &rl::DdpgConfig::preactivation_penalty,
         who + "L2 weight on the pre-squash actor output.");
    const std::string key = prefix + "hidden";
    keys.push_back(KeyInfo{
        key, who + "hidden layer sizes.",
        [=](RunConfig& c, const std::string& v) {
          std::vector<int> sizes;
          for (const auto& s : SplitList(v)) sizes.push_back(static_cast<int>(ToInt(key, s)));
          cfg(c).hidden = sizes;
        },
        [=](const RunConfig& c) { return FromInts(ccfg(c).hidden); }});
  };
  agent_keys("da_", &rl::TrainConfig::da_agent);
  agent_keys("bm_", &rl::TrainConfig::bm_agent);

  const std::vector<KeyInfo> tail = {
      POWERARB_STRING("train_years", train_years, "Training years for train, e.g. 2015-2016."),
      POWERARB_STRING("test_years", test_years, "Test years for evaluate and report."),
      POWERARB_INT("plan_train_len", plan_train_len, "Walk-forward training years per fold."),
      POWERARB_INT("plan_test_len", plan_test_len, "Walk-forward test years per fold."),
      POWERARB_STRING("explicit_pairs", explicit_pairs,
                      "Explicit walk-forward folds as train:test;..., e.g. 2020:2018."),
      POWERARB_COUNT("parallel_folds", pipeline.parallel_folds, "Folds trained concurrently."),
      POWERARB_COUNT("hist_bins", hist_bins, "Bins per report histogram."),
      POWERARB_BOOL("render_images", render_images, "Write SVG renders next to report data."),
  };
  keys.insert(keys.end(), tail.begin(), tail.end());
  return keys;
}

}  // namespace

RunConfig::RunConfig() {
  synth.days = 1096;
  schema = data::SyntheticFundamentalNames();
  lags = ParseLagSpec(
      "actual_load:96,da_price:96,bm_bid_clearing:4,bm_ask_clearing:4,regulation_state:4");
  pipeline.da_features = {"da_price", "load_forecast", "wind_forecast", "solar_forecast",
                          "da_price_lag96"};
  pipeline.bm_features = {"shortage_prob", "bm_bid_clearing_lag4", "bm_ask_clearing_lag4",
                          "regulation_state_lag4"};
  pipeline.predictor_features = {"load_forecast", "wind_forecast", "solar_forecast",
                                 "actual_load_lag96"};
}

std::string RunConfig::ModelDir() const {
  return model_dir.empty() ? out_dir + "/model" : model_dir;
}

const std::vector<KeyInfo>& ConfigKeys() {
  static const std::vector<KeyInfo> keys = BuildKeys();
  return keys;
}

void SetKey(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& k : ConfigKeys()) {
    if (k.name == key) {
      k.set(config, value);
      return;
    }
  }
  throw Error(ErrorCode::kUnknownKey, "unknown config key '" + key + "'", key);
}

std::string GetKey(const RunConfig& config, const std::string& key) {
  for (const auto& k : ConfigKeys()) {
    if (k.name == key) return k.get(config);
  }
  throw Error(ErrorCode::kUnknownKey, "unknown config key '" + key + "'", key);
}

void ParseConfig(std::istream& in, RunConfig& config) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(lineno) + ": expected key = value", line);
    }
    SetKey(config, Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
}

void LoadConfigFile(const std::string& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read config " + path, path);
  ParseConfig(in, config);
}

void WriteConfig(std::ostream& out, const RunConfig& config) {
  for (const auto& k : ConfigKeys()) out << k.name << " = " << k.get(config) << '\n';
}

void WriteConfigDocs(std::ostream& out) {
  const RunConfig defaults;
  out << "| key | default | meaning |\n|---|---|---|\n";
  for (const auto& k : ConfigKeys()) {
    std::string d = k.get(defaults);
    if (d.empty()) d = "(empty)";
    out << "| `" << k.name << "` | `" << d << "` | " << k.description << " |\n";
  }
}

data::LagSpec ParseLagSpec(const std::string& text) {
  data::LagSpec spec;
  for (const auto& item : SplitList(text)) {
    const auto colon = item.rfind(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kInvalidLagSpec, "lag '" + item + "' needs feature:steps", item);
    }
    data::LagEntry e;
    e.feature = Trim(item.substr(0, colon));
    e.lag = static_cast<int>(ToInt("lags", Trim(item.substr(colon + 1))));
    spec.entries.push_back(e);
  }
  return spec;
}

std::string FormatLagSpec(const data::LagSpec& spec) {
  std::string out;
  for (const auto& e : spec.entries) {
    out += (out.empty() ? "" : ",") + e.feature + ":" + std::to_string(e.lag);
  }
  return out;
}

std::vector<std::string> SplitList(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string JoinList(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

std::vector<int> ParseYears(const std::string& text) {
  std::vector<int> years;
  for (const auto& part : SplitList(text)) {
    const auto dash = part.find('-', 1);
    if (dash == std::string::npos) {
      years.push_back(static_cast<int>(ToInt("years", part)));
      continue;
    }
    const int a = static_cast<int>(ToInt("years", Trim(part.substr(0, dash))));
    const int b = static_cast<int>(ToInt("years", Trim(part.substr(dash + 1))));
    if (b < a) throw Error(ErrorCode::kInvalidConfig, "descending year range", part);
    for (int y = a; y <= b; ++y) years.push_back(y);
  }
  return years;
}

}  // namespace powerarb::config
