#include "powerarb/walkforward.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include "powerarb/checksum.hpp"
#include "powerarb/error.hpp"

namespace powerarb::walkforward {
namespace {

void CheckContiguous(const std::vector<int>& years, const char* what) {
  if (years.empty()) throw Error(ErrorCode::kInvalidConfig, std::string(what) + " years are empty");
  for (std::size_t i = 1; i < years.size(); ++i) {
    if (years[i] != years[i - 1] + 1) {
      throw Error(ErrorCode::kInvalidConfig, std::string(what) + " years must be contiguous",
                  std::to_string(years[i]));
    }
  }
}

std::string YearRange(const std::vector<int>& years) {
  if (years.size() == 1) return std::to_string(years.front());
  return std::to_string(years.front()) + "-" + std::to_string(years.back());
}

std::vector<int> ParseYearRange(const std::string& text) {
  const auto dash = text.find('-');
  try {
    if (dash == std::string::npos) return {std::stoi(text)};
    const int a = std::stoi(text.substr(0, dash));
    const int b = std::stoi(text.substr(dash + 1));
    if (b < a) throw Error(ErrorCode::kInvalidConfig, "descending year range", text);
    std::vector<int> years;
    for (int y = a; y <= b; ++y) years.push_back(y);
    return years;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kParseError, "bad year range '" + text + "'", text);
  }
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string(), path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string(), path.string());
  out << text;
}

}  // namespace

Timestamp Fold::train_begin() const { return StartOfYear(train_years.front()); }
Timestamp Fold::train_end() const { return StartOfYear(train_years.back() + 1); }
Timestamp Fold::test_begin() const { return StartOfYear(test_years.front()); }
Timestamp Fold::test_end() const { return StartOfYear(test_years.back() + 1); }

std::string Fold::Label() const { return YearRange(train_years) + "->" + YearRange(test_years); }

WalkForwardPlan BuildPlan(const std::vector<int>& available_years, int train_len, int test_len) {
  if (train_len < 1 || test_len < 1) {
    throw Error(ErrorCode::kInvalidConfig, "train and test lengths must be positive");
  }
  std::vector<int> years = available_years;
  std::sort(years.begin(), years.end());
  years.erase(std::unique(years.begin(), years.end()), years.end());
  if (!years.empty()) CheckContiguous(years, "available");
  if (static_cast<int>(years.size()) < train_len + test_len) {
    throw Error(ErrorCode::kInsufficientYears,
                std::to_string(years.size()) + " years available, a fold needs " +
                    std::to_string(train_len + test_len));
  }
  WalkForwardPlan plan;
  for (std::size_t start = 0; start + train_len + test_len <= years.size(); start += test_len) {
    Fold f;
    f.train_years.assign(years.begin() + start, years.begin() + start + train_len);
    f.test_years.assign(years.begin() + start + train_len,
                        years.begin() + start + train_len + test_len);
    plan.folds.push_back(std::move(f));
  }
  return plan;
}

WalkForwardPlan PlanFromPairs(const std::vector<std::pair<std::vector<int>, int>>& pairs) {
  WalkForwardPlan plan;
  plan.explicit_pairs = true;
  for (const auto& [train, test] : pairs) plan.folds.push_back(Fold{train, {test}});
  std::stable_sort(plan.folds.begin(), plan.folds.end(), [](const Fold& a, const Fold& b) {
    return a.test_years.front() < b.test_years.front();
  });
  ValidatePlan(plan);
  return plan;
}

std::vector<std::pair<std::vector<int>, int>> ParseYearPairs(const std::string& text) {
  std::vector<std::pair<std::vector<int>, int>> pairs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = Trim(item);
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kParseError, "pair '" + item + "' needs train:test", item);
    }
    const std::vector<int> test = ParseYearRange(Trim(item.substr(colon + 1)));
    if (test.size() != 1) throw Error(ErrorCode::kInvalidConfig, "a pair tests one year", item);
    pairs.emplace_back(ParseYearRange(Trim(item.substr(0, colon))), test.front());
  }
  return pairs;
}

void ValidatePlan(const WalkForwardPlan& plan) {
  if (plan.folds.empty()) throw Error(ErrorCode::kInsufficientYears, "plan has no folds");
  int last_test = std::numeric_limits<int>::min();
  for (const auto& f : plan.folds) {
    CheckContiguous(f.train_years, "train");
    CheckContiguous(f.test_years, "test");
    for (int y : f.test_years) {
      if (std::find(f.train_years.begin(), f.train_years.end(), y) != f.train_years.end()) {
        throw Error(ErrorCode::kInvalidConfig, "fold " + f.Label() + " tests on a training year",
                    std::to_string(y));
      }
    }
    if (f.test_years.front() < last_test) {
      throw Error(ErrorCode::kInvalidConfig, "folds must be ordered by test year");
    }
    last_test = f.test_years.front();
  }
}

env::EnvConfig PipelineConfig::MakeEnvConfig() const {
  env::EnvConfig c;
  c.hydrogen_price = hydrogen_price;
  c.literal_eq1 = literal_eq1;
  c.da_observation = {data::Level::kDayAhead, da_features, da_lookback_days};
  c.bm_observation = {data::Level::kBalancing, bm_features, bm_lookback_days};
  c.bm_context_features = bm_context_features;
  return c;
}

std::vector<std::string> PipelineConfig::StandardizedFeatures() const {
  std::vector<std::string> out;
  auto add = [&](const std::string& f) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  };
  for (const auto& f : da_features) add(f);
  for (const auto& f : bm_features) add(f);
  add(std::string(data::kDaPriceColumn));
  return out;
}

TrainedModel::Checksums TrainedModel::ComputeChecksums() const {
  Checksums c;
  std::ostringstream s;
  standardizer.Write(s);
  c.standardizer = Fnv1a64Hex(s.str());
  std::ostringstream p;
  if (predictor) data::WriteStatePredictor(p, *predictor);
  c.predictor = Fnv1a64Hex(p.str());
  c.da_agent = Fnv1a64Hex(da_agent.ParameterDump());
  c.bm_agent = Fnv1a64Hex(bm_agent.ParameterDump());
  return c;
}

void TrainedModel::Save(const std::string& directory) const {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path dir(directory);
  std::ostringstream s;
  standardizer.Write(s);
  WriteFile(dir / "standardizer.txt", s.str());
  if (predictor) {
    data::SaveStatePredictor((dir / "predictor.txt").string(), *predictor);
  } else {
    fs::remove(dir / "predictor.txt");
  }
  WriteFile(dir / "da_agent.txt", da_agent.ParameterDump());
  WriteFile(dir / "bm_agent.txt", bm_agent.ParameterDump());
  std::ostringstream curve_text;
  rl::WriteTrainingCurve(curve_text, curve);
  WriteFile(dir / "training_curve.csv", curve_text.str());
}

TrainedModel TrainedModel::Load(const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  std::istringstream da_text(ReadFile(dir / "da_agent.txt"));
  std::istringstream bm_text(ReadFile(dir / "bm_agent.txt"));
  TrainedModel model{{}, std::nullopt, rl::DdpgAgent::Load(da_text), rl::DdpgAgent::Load(bm_text),
                     {}, 0, 0, 0};
  std::istringstream st(ReadFile(dir / "standardizer.txt"));
  model.standardizer = data::Standardizer::Read(st);
  if (fs::exists(dir / "predictor.txt")) {
    model.predictor = data::LoadStatePredictor((dir / "predictor.txt").string());
  }
  model.da_observation_dim = static_cast<std::size_t>(model.da_agent.observation_dim());
  model.bm_observation_dim = static_cast<std::size_t>(model.bm_agent.observation_dim());
  return model;
}

std::shared_ptr<const data::MarketTable> PrepareMarket(
    const data::MarketTable& market, const std::optional<data::StatePredictor>& predictor,
    const std::string& column) {
  if (!predictor) return std::make_shared<const data::MarketTable>(market);
  return std::make_shared<const data::MarketTable>(
      data::WithPredictionColumn(market, *predictor, column));
}

TrainedModel FitModel(const data::MarketTable& market, Timestamp begin, Timestamp end,
                      const PipelineConfig& config, const rl::ProgressCallback& progress) {
  const data::MarketTable train = market.Slice(begin, end);
  if (train.empty()) {
    throw Error(ErrorCode::kCoverageGap,
                "no market rows in training window starting " + FormatIso8601(begin),
                FormatIso8601(begin));
  }
  std::optional<data::StatePredictor> predictor;
  if (!config.predictor_features.empty()) {
    predictor = data::FitStatePredictor(train, config.predictor_features, config.predictor).predictor;
  }
  auto prepared = PrepareMarket(train, predictor, config.prediction_column);
  auto standardizer = std::make_shared<const data::Standardizer>(data::Standardizer::Fit(
      *prepared, config.StandardizedFeatures(), prepared->start(), prepared->end()));
  const env::MarketEnv environment(prepared, config.MakeEnvConfig(), standardizer);
  const std::vector<std::size_t> hours = environment.AllHours();
  if (hours.empty()) {
    throw Error(ErrorCode::kCoverageGap, "training window has no hour with full look-back history",
                FormatIso8601(begin));
  }
  rl::TrainingResult trained = rl::TrainDualAgents(environment, hours, config.train, progress);
  TrainedModel model{*standardizer,
                     predictor,
                     std::move(trained.da_agent),
                     std::move(trained.bm_agent),
                     std::move(trained.curve),
                     environment.da_observation_dim(),
                     environment.bm_observation_dim(),
                     hours.size()};
  return model;
}

ModelEvaluation EvaluateModel(const TrainedModel& model, const data::MarketTable& market,
                              Timestamp begin, Timestamp end, const PipelineConfig& config) {
  if (market.empty() || begin < market.start() || end > market.end() || begin >= end) {
    throw Error(ErrorCode::kCoverageGap,
                "market does not cover [" + FormatIso8601(begin) + ", " + FormatIso8601(end) + ")",
                FormatIso8601(begin));
  }
  auto prepared = PrepareMarket(market, model.predictor, config.prediction_column);
  auto standardizer = std::make_shared<const data::Standardizer>(model.standardizer);
  const env::MarketEnv environment(prepared, config.MakeEnvConfig(), standardizer);
  if (environment.da_observation_dim() != model.da_observation_dim ||
      environment.bm_observation_dim() != model.bm_observation_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "observation layout differs from the trained model");
  }
  const std::vector<std::size_t> hours = environment.HoursIn(begin, end);
  const auto expected = static_cast<std::size_t>((end - begin) / kSecondsPerHour);
  if (hours.size() != expected) {
    throw Error(ErrorCode::kCoverageGap,
                "only " + std::to_string(hours.size()) + " of " + std::to_string(expected) +
                    " test hours have data and look-back history",
                FormatIso8601(begin));
  }
  ModelEvaluation out;
  out.agent = rl::EvaluateAgents(environment, model.da_agent, model.bm_agent, hours,
                                 config.train.UsesLadder(), config.record_trace);
  policies::BenchmarkRunOptions opts{config.hydrogen_price, config.literal_eq1};
  for (policies::BenchmarkId id : policies::kAllBenchmarks) {
    out.benchmarks[id] = policies::RunBenchmark(id, market, begin, end, opts);
  }
  if (model.predictor) {
    out.predictor_accuracy =
        data::PredictorAccuracy(*model.predictor, market, begin, end, config.predictor_threshold);
  }
  return out;
}

std::uint64_t FoldSeed(std::uint64_t seed, std::size_t fold_id) {
  return Rng::SplitMix(seed + 0x9E37ULL * (fold_id + 1));
}

WalkForwardResult RunWalkForward(const WalkForwardPlan& plan, const data::MarketTable& market,
                                 const PipelineConfig& config) {
  ValidatePlan(plan);
  for (const auto& f : plan.folds) {
    // The head of the first training year may be consumed by lag construction.
    if (f.train_end() <= market.start() || f.test_begin() < market.start()) {
      throw Error(ErrorCode::kCoverageGap, "fold " + f.Label() + " starts before the market",
                  FormatIso8601(f.train_begin()));
    }
    for (Timestamp t : {f.train_end(), f.test_end()}) {
      if (t > market.end()) {
        throw Error(ErrorCode::kCoverageGap, "fold " + f.Label() + " ends after the market",
                    FormatIso8601(t));
      }
    }
  }

  auto run_fold = [&](std::size_t i) {
    const Fold& fold = plan.folds[i];
    PipelineConfig fold_config = config;
    fold_config.train.seed = FoldSeed(config.train.seed, i);
    const TrainedModel model =
        FitModel(market, fold.train_begin(), fold.train_end(), fold_config);
    ModelEvaluation eval =
        EvaluateModel(model, market, fold.test_begin(), fold.test_end(), fold_config);
    FoldReport r;
    r.fold_id = i;
    r.fold = fold;
    r.seed = fold_config.train.seed;
    r.agent = eval.agent.pnl;
    r.benchmarks = std::move(eval.benchmarks);
    r.predictor_accuracy = eval.predictor_accuracy;
    r.da_observation_dim = model.da_observation_dim;
    r.bm_observation_dim = model.bm_observation_dim;
    r.checksums = model.ComputeChecksums();
    r.curve = model.curve;
    r.evaluation = std::move(eval.agent);
    return r;
  };

  WalkForwardResult result;
  result.folds.resize(plan.folds.size());
  const std::size_t width = std::max(1u, config.parallel_folds);
  for (std::size_t start = 0; start < plan.folds.size(); start += width) {
    const std::size_t stop = std::min(plan.folds.size(), start + width);
    if (width == 1) {
      result.folds[start] = run_fold(start);
      continue;
    }
    std::vector<std::future<FoldReport>> pending;
    for (std::size_t i = start; i < stop; ++i) {
      pending.push_back(std::async(std::launch::async, run_fold, i));
    }
    for (std::size_t i = start; i < stop; ++i) result.folds[i] = pending[i - start].get();
  }

  double accuracy_sum = 0.0;
  std::size_t accuracy_n = 0;
  for (const auto& r : result.folds) {
    result.agent.Extend(r.agent);
    for (const auto& [id, series] : r.benchmarks) result.benchmarks[id].Extend(series);
    if (r.predictor_accuracy) {
      accuracy_sum += *r.predictor_accuracy;
      ++accuracy_n;
    }
  }
  if (accuracy_n > 0) result.mean_predictor_accuracy = accuracy_sum / static_cast<double>(accuracy_n);
  return result;
}

void Manifest::Set(const std::string& key, const std::string& value) {
  if (key.empty() || key.find_first_of("=\n") != std::string::npos ||
      value.find('\n') != std::string::npos) {
    throw Error(ErrorCode::kInvalidConfig, "manifest entries must be single-line key=value", key);
  }
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void Manifest::Set(const std::string& key, double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  Set(key, std::string(buf));
}

const std::string* Manifest::Find(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string Manifest::Fingerprint() const {
  std::string canonical;
  for (const auto& [k, v] : entries_) {
    if (k == "fingerprint") continue;
    canonical += k + "=" + v + "\n";
  }
  return Fnv1a64Hex(canonical);
}

void Manifest::Write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) {
    if (k != "fingerprint") out << k << '=' << v << '\n';
  }
  out << "fingerprint=" << Fingerprint() << '\n';
}

Manifest Manifest::Read(std::istream& in) {
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kParseError, "manifest line without '='", line);
    m.entries_.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return m;
}

void Manifest::Save(const std::string& path) const {
  std::ostringstream s;
  Write(s);
  WriteFile(path, s.str());
}

Manifest Manifest::Load(const std::string& path) {
  std::istringstream s(ReadFile(path));
  return Read(s);
}

}  // namespace powerarb::walkforward
