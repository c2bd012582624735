#ifndef POWERARB_RUN_CONFIG_HPP
#define POWERARB_RUN_CONFIG_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "powerarb/market_table.hpp"
#include "powerarb/synthetic.hpp"
#include "powerarb/walkforward.hpp"

namespace powerarb::config {

struct RunConfig {
  std::string data_path;
  std::string out_dir = "out";
  // Empty means <out_dir>/model.
  std::string model_dir;

  data::Resolution resolution = data::Resolution::kQuarterHourly;
  bool expand_to_quarter_hour = false;
  std::vector<std::string> schema;
  data::LagSpec lags;

  data::SynthConfig synth;
  walkforward::PipelineConfig pipeline;

  // Year ranges like "2015-2016" for train/evaluate; empty picks all but the
  // last year for training and the last year for testing.
  std::string train_years;
  std::string test_years;
  int plan_train_len = 2;
  int plan_test_len = 1;
  std::string explicit_pairs;

  std::size_t hist_bins = 40;
  bool render_images = true;

  RunConfig();
  std::string ModelDir() const;
};

struct KeyInfo {
  std::string name;
  std::string description;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Every accepted key, in documentation order.
const std::vector<KeyInfo>& ConfigKeys();

// Applies one key. UnknownKey for unregistered names, InvalidConfig for bad values.
void SetKey(RunConfig& config, const std::string& key, const std::string& value);
std::string GetKey(const RunConfig& config, const std::string& key);

// "key = value" lines; '#' starts a comment.
void ParseConfig(std::istream& in, RunConfig& config);
void LoadConfigFile(const std::string& path, RunConfig& config);
// Canonical dump of every key, suitable for manifests and as a config file.
void WriteConfig(std::ostream& out, const RunConfig& config);
// Markdown table of keys, defaults and descriptions.
void WriteConfigDocs(std::ostream& out);

data::LagSpec ParseLagSpec(const std::string& text);
std::string FormatLagSpec(const data::LagSpec& spec);
std::vector<std::string> SplitList(const std::string& text, char sep = ',');
std::string JoinList(const std::vector<std::string>& items, char sep = ',');
std::vector<int> ParseYears(const std::string& text);

}  // namespace powerarb::config

#endif  // POWERARB_RUN_CONFIG_HPP
