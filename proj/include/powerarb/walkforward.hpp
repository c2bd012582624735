#ifndef POWERARB_WALKFORWARD_HPP
#define POWERARB_WALKFORWARD_HPP

#include <array>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "powerarb/market_env.hpp"
#include "powerarb/observation.hpp"
#include "powerarb/pnl.hpp"
#include "powerarb/policies.hpp"
#include "powerarb/state_predictor.hpp"
#include "powerarb/training.hpp"

namespace powerarb::walkforward {

struct Fold {
  std::vector<int> train_years;  // contiguous
  std::vector<int> test_years;   // contiguous

  Timestamp train_begin() const;
  Timestamp train_end() const;
  Timestamp test_begin() const;
  Timestamp test_end() const;
  std::string Label() const;  // "2015-2016->2017"
};

struct WalkForwardPlan {
  std::vector<Fold> folds;
  bool explicit_pairs = false;
};

// Sliding folds over contiguous years, shifted by test_len each time.
WalkForwardPlan BuildPlan(const std::vector<int>& available_years, int train_len = 2,
                          int test_len = 1);
// Arbitrary (train years, test year) pairs, e.g. training on a later year.
WalkForwardPlan PlanFromPairs(const std::vector<std::pair<std::vector<int>, int>>& pairs);
// Parses "2015-2016:2017;2020:2018".
std::vector<std::pair<std::vector<int>, int>> ParseYearPairs(const std::string& text);
void ValidatePlan(const WalkForwardPlan& plan);

struct PipelineConfig {
  std::vector<std::string> da_features;
  std::vector<std::string> bm_features;
  int da_lookback_days = 3;
  int bm_lookback_days = 3;
  bool bm_context_features = true;
  // Empty disables the predictor and its column.
  std::vector<std::string> predictor_features;
  data::PredictorFitConfig predictor;
  double predictor_threshold = 0.5;
  std::string prediction_column = "shortage_prob";
  double hydrogen_price = env::kHydrogenPrice;
  bool literal_eq1 = false;
  rl::TrainConfig train;
  unsigned parallel_folds = 1;
  bool record_trace = false;

  env::EnvConfig MakeEnvConfig() const;
  // Features z-scored with training statistics: observation features and the DA price.
  std::vector<std::string> StandardizedFeatures() const;
};

// Everything fitted on one training window.
struct TrainedModel {
  data::Standardizer standardizer;
  std::optional<data::StatePredictor> predictor;
  rl::DdpgAgent da_agent;
  rl::DdpgAgent bm_agent;
  std::vector<rl::CurvePoint> curve;
  std::size_t da_observation_dim = 0;
  std::size_t bm_observation_dim = 0;
  std::size_t train_hours = 0;

  struct Checksums {
    std::string standardizer, predictor, da_agent, bm_agent;
    bool operator==(const Checksums&) const = default;
  };
  Checksums ComputeChecksums() const;

  void Save(const std::string& directory) const;
  static TrainedModel Load(const std::string& directory);
};

// Adds the predictor column when a predictor is present.
std::shared_ptr<const data::MarketTable> PrepareMarket(const data::MarketTable& market,
                                                       const std::optional<data::StatePredictor>& predictor,
                                                       const std::string& column);

// Fits predictor, standardizer and agents on rows in [begin, end) only.
TrainedModel FitModel(const data::MarketTable& market, Timestamp begin, Timestamp end,
                      const PipelineConfig& config, const rl::ProgressCallback& progress = nullptr);

struct ModelEvaluation {
  rl::Evaluation agent;
  std::map<policies::BenchmarkId, PnlSeries> benchmarks;
  std::optional<double> predictor_accuracy;
};

// Out-of-sample rollout over every hour in [begin, end). CoverageGap when an
// hour lacks data or look-back history.
ModelEvaluation EvaluateModel(const TrainedModel& model, const data::MarketTable& market,
                              Timestamp begin, Timestamp end, const PipelineConfig& config);

struct FoldReport {
  std::size_t fold_id = 0;
  Fold fold;
  std::uint64_t seed = 0;
  PnlSeries agent;
  std::map<policies::BenchmarkId, PnlSeries> benchmarks;
  std::optional<double> predictor_accuracy;
  std::size_t da_observation_dim = 0;
  std::size_t bm_observation_dim = 0;
  TrainedModel::Checksums checksums;
  std::vector<rl::CurvePoint> curve;
  rl::Evaluation evaluation;
};

struct WalkForwardResult {
  std::vector<FoldReport> folds;
  PnlSeries agent;
  std::map<policies::BenchmarkId, PnlSeries> benchmarks;
  std::optional<double> mean_predictor_accuracy;
};

std::uint64_t FoldSeed(std::uint64_t seed, std::size_t fold_id);

WalkForwardResult RunWalkForward(const WalkForwardPlan& plan, const data::MarketTable& market,
                                 const PipelineConfig& config);

// Ordered key-value record of a run. The fingerprint hashes every other entry.
class Manifest {
 public:
  void Set(const std::string& key, const std::string& value);
  void Set(const std::string& key, double value);
  const std::string* Find(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string Fingerprint() const;

  void Write(std::ostream& out) const;
  static Manifest Read(std::istream& in);
  void Save(const std::string& path) const;
  static Manifest Load(const std::string& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace powerarb::walkforward

#endif  // POWERARB_WALKFORWARD_HPP
