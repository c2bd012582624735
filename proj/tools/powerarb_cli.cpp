// powerarb: synthesize or ingest market data, fit the shortage predictor,
// train and evaluate the dual agents, run benchmarks and emit reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "powerarb/checksum.hpp"
#include "powerarb/error.hpp"
#include "powerarb/invariants.hpp"
#include "powerarb/market_table.hpp"
#include "powerarb/policies.hpp"
#include "powerarb/report.hpp"
#include "powerarb/run_config.hpp"
#include "powerarb/state_predictor.hpp"
#include "powerarb/synthetic.hpp"
#include "powerarb/timestamp.hpp"
#include "powerarb/walkforward.hpp"

namespace fs = std::filesystem;
using namespace powerarb;

namespace {

constexpr int kExitError = 2;
constexpr int kExitCheckFailed = 3;

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string data;
  std::string out;
  std::string reward_mode;
  long long seed = -1;
  bool ladder = false;
  bool literal_eq1 = false;
  bool check = false;
  bool quiet = false;
};

struct Context {
  config::RunConfig cfg;
  Options opts;
  std::string command;
  std::vector<invariants::CheckResult> checks;
};

config::RunConfig ResolveConfig(const Options& o) {
  config::RunConfig cfg;
  if (!o.config_path.empty()) config::LoadConfigFile(o.config_path, cfg);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParseError, "--set expects key=value, got '" + kv + "'", kv);
    }
    config::SetKey(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.data.empty()) cfg.data_path = o.data;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.reward_mode.empty()) config::SetKey(cfg, "reward_mode", o.reward_mode);
  if (o.seed >= 0) {
    cfg.pipeline.train.seed = static_cast<std::uint64_t>(o.seed);
    cfg.synth.seed = static_cast<std::uint64_t>(o.seed);
  }
  if (o.ladder) cfg.pipeline.train.ladder = true;
  if (o.literal_eq1) cfg.pipeline.literal_eq1 = true;
  return cfg;
}

std::string ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path, path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string(), path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string(), path.string());
}

template <typename Fn>
void WriteWith(const fs::path& path, Fn&& fn) {
  std::ostringstream s;
  fn(s);
  WriteText(path, s.str());
}

void Log(const Context& ctx, const std::string& msg) {
  if (!ctx.opts.quiet) std::cerr << "[" << ctx.command << "] " << msg << '\n';
}

data::MarketTable LoadRaw(const config::RunConfig& cfg) {
  if (cfg.data_path.empty()) throw Error(ErrorCode::kInvalidConfig, "no data file given", "data");
  data::LoadOptions lo;
  lo.schema = cfg.schema;
  lo.resolution = cfg.resolution;
  lo.expand_to_quarter_hour = cfg.expand_to_quarter_hour;
  return data::LoadMarketTable(cfg.data_path, lo);
}

data::MarketTable LoadMarket(const config::RunConfig& cfg) {
  data::MarketTable raw = LoadRaw(cfg);
  if (cfg.lags.entries.empty()) return raw;
  return data::BuildLaggedFeatures(raw, cfg.lags);
}

struct Windows {
  std::vector<int> train, test;
};

// Defaults: test on the last fully covered year, train on every year before it.
Windows PickYears(const config::RunConfig& cfg, const data::MarketTable& market) {
  Windows w;
  if (market.empty()) throw Error(ErrorCode::kCoverageGap, "market is empty");
  if (!cfg.test_years.empty()) {
    w.test = config::ParseYears(cfg.test_years);
  } else {
    for (int y : market.Years()) {
      if (market.start() <= StartOfYear(y) && StartOfYear(y + 1) <= market.end()) w.test = {y};
    }
    if (w.test.empty()) throw Error(ErrorCode::kCoverageGap, "no calendar year is fully covered");
  }
  if (!cfg.train_years.empty()) {
    w.train = config::ParseYears(cfg.train_years);
  } else {
    for (int y : market.Years()) {
      if (y < w.test.front()) w.train.push_back(y);
    }
  }
  if (w.train.empty()) throw Error(ErrorCode::kInsufficientYears, "no training year available", "train_years");
  return w;
}

walkforward::Fold AsFold(const Windows& w) { return walkforward::Fold{w.train, w.test}; }

walkforward::Manifest BaseManifest(const Context& ctx) {
  walkforward::Manifest m;
  m.Set("command", ctx.command);
  m.Set("version", std::string("0.1.0"));
  std::ostringstream cfg_text;
  config::WriteConfig(cfg_text, ctx.cfg);
  std::istringstream lines(cfg_text.str());
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    m.Set("config." + line.substr(0, eq), line.substr(eq + 3));
  }
  m.Set("seed.train", std::to_string(ctx.cfg.pipeline.train.seed));
  m.Set("seed.synth", std::to_string(ctx.cfg.synth.seed));
  m.Set("env.literal_eq1", ctx.cfg.pipeline.literal_eq1 ? "true" : "false");
  m.Set("env.reward_mode", std::string(env::RewardModeName(ctx.cfg.pipeline.train.reward_mode)));
  m.Set("env.ladder", ctx.cfg.pipeline.train.UsesLadder() ? "true" : "false");
  m.Set("env.hydrogen_price", ctx.cfg.pipeline.hydrogen_price);
  if (!ctx.cfg.data_path.empty() && fs::exists(ctx.cfg.data_path)) {
    m.Set("data.checksum", Fnv1a64Hex(ReadAll(ctx.cfg.data_path)));
  }
  return m;
}

void AddDims(walkforward::Manifest& m, std::size_t da, std::size_t bm) {
  m.Set("observation.da_dim", std::to_string(da));
  m.Set("observation.bm_dim", std::to_string(bm));
}

void RunChecks(Context& ctx, const data::MarketTable& market) {
  if (!ctx.opts.check) return;
  for (auto& r : invariants::RunMarketChecks(market, ctx.cfg.pipeline.train.seed)) {
    ctx.checks.push_back(std::move(r));
  }
}

void CheckSeries(Context& ctx, const std::string& name, const PnlSeries& s) {
  if (ctx.opts.check) ctx.checks.push_back(invariants::CheckPnlSeries(name, s));
}

void SavePnl(const fs::path& dir, const std::string& strategy, const PnlSeries& s) {
  WriteWith(dir / ("pnl_" + strategy + ".csv"), [&](std::ostream& o) { WritePnlSeries(o, s); });
}

void SaveActions(const fs::path& dir, const rl::Evaluation& eval) {
  WriteWith(dir / "actions.csv", [&](std::ostream& o) {
    o << "kind,value\n";
    char buf[64];
    for (double v : eval.da_actions) { std::snprintf(buf, sizeof(buf), "da,%.17g\n", v); o << buf; }
    for (double v : eval.bid_prices) { std::snprintf(buf, sizeof(buf), "bid,%.17g\n", v); o << buf; }
    for (double v : eval.ask_prices) { std::snprintf(buf, sizeof(buf), "ask,%.17g\n", v); o << buf; }
  });
}

std::map<std::string, std::vector<double>> LoadActions(const fs::path& path) {
  std::map<std::string, std::vector<double>> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    out[line.substr(0, comma)].push_back(std::stod(line.substr(comma + 1)));
  }
  return out;
}

// ---------------------------------------------------------------------------

void CmdSynth(Context& ctx) {
  const fs::path out(ctx.cfg.out_dir);
  fs::create_directories(out);
  const data::MarketTable table = data::GenerateSyntheticMarket(ctx.cfg.synth);
  const fs::path path = ctx.cfg.data_path.empty() ? out / "market.csv" : fs::path(ctx.cfg.data_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  data::SaveMarketTable(path.string(), table);
  ctx.cfg.data_path = path.string();
  Log(ctx, "wrote " + std::to_string(table.size()) + " rows to " + path.string());
  RunChecks(ctx, table);
  auto m = BaseManifest(ctx);
  m.Set("data.rows", std::to_string(table.size()));
  m.Save((out / "manifest.txt").string());
}

void CmdIngest(Context& ctx) {
  const fs::path out(ctx.cfg.out_dir);
  fs::create_directories(out);
  const data::MarketTable raw = LoadRaw(ctx.cfg);
  data::SaveMarketTable((out / "market_normalized.csv").string(), raw);
  const data::MarketTable lagged =
      ctx.cfg.lags.entries.empty() ? raw : data::BuildLaggedFeatures(raw, ctx.cfg.lags);
  RunChecks(ctx, lagged);
  auto m = BaseManifest(ctx);
  m.Set("data.rows", std::to_string(raw.size()));
  m.Set("data.lagged_rows", std::to_string(lagged.size()));
  m.Set("data.start", FormatIso8601(raw.start()));
  m.Set("data.end", FormatIso8601(raw.end()));
  m.Set("data.columns", config::JoinList(lagged.fundamental_names()));
  m.Save((out / "manifest.txt").string());
  Log(ctx, "validated " + std::to_string(raw.size()) + " rows");
}

void CmdFitPredictor(Context& ctx) {
  const fs::path out(ctx.cfg.out_dir);
  fs::create_directories(out);
  const data::MarketTable market = LoadMarket(ctx.cfg);
  const Windows w = PickYears(ctx.cfg, market);
  const walkforward::Fold fold = AsFold(w);
  if (ctx.cfg.pipeline.predictor_features.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "predictor_features is empty", "predictor_features");
  }
  const data::MarketTable train = market.Slice(fold.train_begin(), fold.train_end());
  const data::PredictorFit fit =
      data::FitStatePredictor(train, ctx.cfg.pipeline.predictor_features, ctx.cfg.pipeline.predictor);
  data::SaveStatePredictor((out / "predictor.txt").string(), fit.predictor);
  const double train_acc = data::PredictorAccuracy(fit.predictor, market, fold.train_begin(),
                                                   fold.train_end(), ctx.cfg.pipeline.predictor_threshold);
  const double test_acc = data::PredictorAccuracy(fit.predictor, market, fold.test_begin(),
                                                  fold.test_end(), ctx.cfg.pipeline.predictor_threshold);
  auto m = BaseManifest(ctx);
  m.Set("fold", fold.Label());
  m.Set("predictor.iterations", std::to_string(fit.iterations));
  m.Set("predictor.final_gradient_norm", fit.final_gradient_norm);
  m.Set("predictor.train_accuracy", train_acc);
  m.Set("predictor.test_accuracy", test_acc);
  m.Set("predictor.checksum", Fnv1a64Hex(ReadAll((out / "predictor.txt").string())));
  m.Save((out / "manifest.txt").string());
  Log(ctx, "train accuracy " + std::to_string(train_acc) + ", test accuracy " + std::to_string(test_acc));
}

void CmdTrain(Context& ctx) {
  const fs::path out(ctx.cfg.out_dir);
  fs::create_directories(out);
  const data::MarketTable market = LoadMarket(ctx.cfg);
  RunChecks(ctx, market);
  const Windows w = PickYears(ctx.cfg, market);
  const walkforward::Fold fold{w.train, w.test};
  const std::size_t total = ctx.cfg.pipeline.train.episodes;
  const std::size_t stride = std::max<std::size_t>(1, total / 10);
  const walkforward::TrainedModel model = walkforward::FitModel(
      market, fold.train_begin(), fold.train_end(), ctx.cfg.pipeline,
      [&](const rl::CurvePoint& p) {
        if ((p.episode + 1) % stride == 0) {
          Log(ctx, "episode " + std::to_string(p.episode + 1) + "/" + std::to_string(total) +
                       " moving average " + std::to_string(p.moving_average));
        }
      });
  model.Save(ctx.cfg.ModelDir());
  WriteWith(out / "training_curve.csv", [&](std::ostream& o) { rl::WriteTrainingCurve(o, model.curve); });
  auto m = BaseManifest(ctx);
  m.Set("train.years", fold.Label().substr(0, fold.Label().find("->")));
  m.Set("train.hours", std::to_string(model.train_hours));
  AddDims(m, model.da_observation_dim, model.bm_observation_dim);
  const auto sums = model.ComputeChecksums();
  m.Set("checksum.standardizer", sums.standardizer);
  m.Set("checksum.predictor", sums.predictor);
  m.Set("checksum.da_agent", sums.da_agent);
  m.Set("checksum.bm_agent", sums.bm_agent);
  m.Save((out / "manifest.txt").string());
  Log(ctx, "saved model to " + ctx.cfg.ModelDir());
}

void CmdBenchmark(Context& ctx) {
  const fs::path out(ctx.cfg.out_dir);
  fs::create_directories(out);
  const data::MarketTable market = LoadMarket(ctx.cfg);
  RunChecks(ctx, market);
  const walkforward::Fold fold = AsFold(PickYears(ctx.cfg, market));
  policies::BenchmarkRunOptions opts{ctx.cfg.pipeline.hydrogen_price, ctx.cfg.pipeline.literal_eq1};
  auto m = BaseManifest(ctx);
  m.Set("test.years", fold.Label().substr(fold.Label().find("->") + 2));
  for (auto id : policies::kAllBenchmarks) {
    const PnlSeries s = policies::RunBenchmark(id, market, fold.test_begin(), fold.test_end(), opts);
    SavePnl(out, std::string(policies::BenchmarkName(id)), s);
    CheckSeries(ctx, std::string(policies::BenchmarkName(id)), s);
    m.Set("total." + std::string(policies::BenchmarkName(id)), s.total());
  }
  m.Save((out / "manifest.txt").string());
}

void CmdEvaluate(Context& ctx) {
  const fs::path out(ctx.cfg.out_dir);
  fs::create_directories(out);
  const data::MarketTable market = LoadMarket(ctx.cfg);
  RunChecks(ctx, market);
  const walkforward::Fold fold = AsFold(PickYears(ctx.cfg, market));
  const walkforward::TrainedModel model = walkforward::TrainedModel::Load(ctx.cfg.ModelDir());
  walkforward::PipelineConfig pc = ctx.cfg.pipeline;
  pc.record_trace = true;
  const walkforward::ModelEvaluation eval =
      walkforward::EvaluateModel(model, market, fold.test_begin(), fold.test_end(), pc);
  SavePnl(out, "agent", eval.agent.pnl);
  CheckSeries(ctx, "agent", eval.agent.pnl);
  for (const auto& [id, s] : eval.benchmarks) {
    SavePnl(out, std::string(policies::BenchmarkName(id)), s);
    CheckSeries(ctx, std::string(policies::BenchmarkName(id)), s);
  }
  WriteWith(out / "trace.csv", [&](std::ostream& o) { env::WriteTrace(o, eval.agent.trace); });
  SaveActions(out, eval.agent);
  auto m = BaseManifest(ctx);
  m.Set("test.years", fold.Label().substr(fold.Label().find("->") + 2));
  AddDims(m, model.da_observation_dim, model.bm_observation_dim);
  const auto sums = model.ComputeChecksums();
  m.Set("checksum.da_agent", sums.da_agent);
  m.Set("checksum.bm_agent", sums.bm_agent);
  m.Set("total.agent", eval.agent.pnl.total());
  for (const auto& [id, s] : eval.benchmarks) m.Set("total." + std::string(policies::BenchmarkName(id)), s.total());
  if (eval.predictor_accuracy) m.Set("predictor.test_accuracy", *eval.predictor_accuracy);
  m.Save((out / "manifest.txt").string());
  Log(ctx, "agent total " + std::to_string(eval.agent.pnl.total()));
}

// Reads pnl_*.csv, actions.csv and manifest.txt from the output directory.
void CmdReport(Context& ctx) {
  const fs::path dir(ctx.cfg.out_dir);
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIoError, "no output directory " + dir.string(), dir.string());
  std::vector<report::NamedSeries> series;
  std::vector<std::string> agents;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("pnl_", 0) == 0 && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::kIoError, "no pnl_*.csv files in " + dir.string(), dir.string());
  for (const auto& f : files) {
    std::string name = f.stem().string().substr(4);
    if (name.rfind("agent", 0) == 0) agents.push_back(name);
    series.push_back({name, LoadPnlSeries(f.string())});
    CheckSeries(ctx, name, series.back().series);
  }
  const fs::path manifest_path = dir / "manifest.txt";
  std::string upstream = "none";
  if (fs::exists(manifest_path)) upstream = walkforward::Manifest::Load(manifest_path.string()).Fingerprint();

  const report::AlignedCurves curves = report::AlignCurves(series);
  WriteWith(dir / "curves.csv", [&](std::ostream& o) { report::WriteAlignedCurves(o, curves); });

  std::vector<report::Histogram> hists;
  for (const auto& s : series) {
    if (s.name.rfind("agent", 0) == 0) {
      hists.push_back(report::BuildHistogram("hourly_pnl_" + s.name, s.series.hourly, ctx.cfg.hist_bins));
    }
  }
  const auto actions = LoadActions(dir / "actions.csv");
  auto add = [&](const char* key, const char* name, double lo, double hi) {
    const auto it = actions.find(key);
    if (it != actions.end()) hists.push_back(report::BuildHistogram(name, it->second, ctx.cfg.hist_bins, lo, hi));
  };
  add("da", "da_action", env::kMinDaVolume, env::kMaxDaVolume);
  add("bid", "bid_price", env::kMinBmPrice, env::kMaxBmPrice);
  add("ask", "ask_price", env::kMinBmPrice, env::kMaxBmPrice);
  for (const auto& h : hists) {
    WriteWith(dir / ("hist_" + h.name + ".csv"), [&](std::ostream& o) { report::WriteHistogram(o, h); });
  }

  auto m = BaseManifest(ctx);
  m.Set("report.upstream_fingerprint", upstream);
  for (const auto& s : series) m.Set("total." + s.name, s.series.total());
  for (const auto& h : hists) m.Set("hist." + h.name + ".count", std::to_string(h.total()));
  const std::string fingerprint = m.Fingerprint();
  const auto rows = report::Summarize(series, agents);
  WriteWith(dir / "summary.csv", [&](std::ostream& o) { report::WriteSummary(o, rows, fingerprint); });
  m.Save((dir / "report_manifest.txt").string());

  if (ctx.cfg.render_images) {
    WriteText(dir / "curves.svg", report::RenderCurvesSvg(curves, "Cumulative P&L (EUR)"));
    for (const auto& h : hists) WriteText(dir / ("hist_" + h.name + ".svg"), report::RenderHistogramSvg(h));
  }
  for (const auto& r : rows) {
    Log(ctx, r.strategy + " total " + std::to_string(r.total) + " (" + r.vs_best_benchmark + ")");
  }
}

void CmdWalkForward(Context& ctx) {
  const fs::path out(ctx.cfg.out_dir);
  fs::create_directories(out);
  const data::MarketTable market = LoadMarket(ctx.cfg);
  RunChecks(ctx, market);
  const walkforward::WalkForwardPlan plan =
      ctx.cfg.explicit_pairs.empty()
          ? walkforward::BuildPlan(market.Years(), ctx.cfg.plan_train_len, ctx.cfg.plan_test_len)
          : walkforward::PlanFromPairs(walkforward::ParseYearPairs(ctx.cfg.explicit_pairs));
  walkforward::PipelineConfig pc = ctx.cfg.pipeline;
  const walkforward::WalkForwardResult result = walkforward::RunWalkForward(plan, market, pc);

  auto m = BaseManifest(ctx);
  m.Set("plan.folds", std::to_string(plan.folds.size()));
  m.Set("plan.explicit_pairs", plan.explicit_pairs ? "true" : "false");
  rl::Evaluation all_actions;
  for (const auto& f : result.folds) {
    const std::string tag = "fold" + std::to_string(f.fold_id);
    const fs::path fdir = out / tag;
    fs::create_directories(fdir);
    SavePnl(fdir, "agent", f.agent);
    CheckSeries(ctx, tag + ".agent", f.agent);
    for (const auto& [id, s] : f.benchmarks) SavePnl(fdir, std::string(policies::BenchmarkName(id)), s);
    WriteWith(fdir / "training_curve.csv", [&](std::ostream& o) { rl::WriteTrainingCurve(o, f.curve); });
    m.Set(tag + ".label", f.fold.Label());
    m.Set(tag + ".seed", std::to_string(f.seed));
    m.Set(tag + ".da_dim", std::to_string(f.da_observation_dim));
    m.Set(tag + ".bm_dim", std::to_string(f.bm_observation_dim));
    m.Set(tag + ".checksum.standardizer", f.checksums.standardizer);
    m.Set(tag + ".checksum.predictor", f.checksums.predictor);
    m.Set(tag + ".checksum.da_agent", f.checksums.da_agent);
    m.Set(tag + ".checksum.bm_agent", f.checksums.bm_agent);
    if (f.predictor_accuracy) m.Set(tag + ".predictor_accuracy", *f.predictor_accuracy);
    m.Set(tag + ".total.agent", f.agent.total());
    const auto& e = f.evaluation;
    all_actions.da_actions.insert(all_actions.da_actions.end(), e.da_actions.begin(), e.da_actions.end());
    all_actions.bid_prices.insert(all_actions.bid_prices.end(), e.bid_prices.begin(), e.bid_prices.end());
    all_actions.ask_prices.insert(all_actions.ask_prices.end(), e.ask_prices.begin(), e.ask_prices.end());
  }
  if (!result.folds.empty()) {
    AddDims(m, result.folds.front().da_observation_dim, result.folds.front().bm_observation_dim);
  }
  SavePnl(out, "agent", result.agent);
  CheckSeries(ctx, "aggregate.agent", result.agent);
  for (const auto& [id, s] : result.benchmarks) SavePnl(out, std::string(policies::BenchmarkName(id)), s);
  SaveActions(out, all_actions);
  if (result.mean_predictor_accuracy) m.Set("predictor.mean_accuracy", *result.mean_predictor_accuracy);
  m.Set("total.agent", result.agent.total());
  for (const auto& [id, s] : result.benchmarks) m.Set("total." + std::string(policies::BenchmarkName(id)), s.total());
  m.Save((out / "manifest.txt").string());
  Log(ctx, std::to_string(result.folds.size()) + " folds, agent total " + std::to_string(result.agent.total()));
}

void CmdCheck(Context& ctx) {
  ctx.opts.check = true;
  const data::MarketTable market = LoadMarket(ctx.cfg);
  RunChecks(ctx, market);
}

void CmdConfig(Context& ctx, bool docs) {
  if (docs) config::WriteConfigDocs(std::cout);
  else config::WriteConfig(std::cout, ctx.cfg);
}

void EmitError(const std::string& code, const std::string& message, const std::string& subject) {
  nlohmann::json rec = {{"error", code}, {"message", message}};
  if (!subject.empty()) rec["subject"] = subject;
  std::cerr << rec.dump() << '\n';
}

void AddCommonOptions(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "key = value config file");
  sub->add_option("--set", o.overrides, "override one config key (key=value); repeatable");
  sub->add_option("--data", o.data, "market CSV");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--seed", o.seed, "seed for training and synthesis");
  sub->add_option("--reward-mode", o.reward_mode, "raw|imitation|tranched|tranched-imitation");
  sub->add_flag("--ladder", o.ladder, "use 11-level ladder orders");
  sub->add_flag("--literal-eq1", o.literal_eq1, "charge the hourly DA cost in every quarter");
  sub->add_flag("--check", o.check, "run invariant suites; exit 3 if any fails");
  sub->add_flag("--quiet", o.quiet, "suppress progress messages");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"powerarb: bi-level day-ahead / balancing arbitrage laboratory"};
  app.require_subcommand(1);
  Options opts;
  bool docs = false;

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {{"synth", "generate a synthetic market CSV"},
                      {"ingest", "validate and normalize a market CSV"},
                      {"fit-predictor", "fit the shortage/surplus predictor"},
                      {"train", "train the day-ahead and balancing agents"},
                      {"benchmark", "replay benchmark policies P1-P5 on the test years"},
                      {"evaluate", "roll out a trained model on the test years"},
                      {"report", "emit curves, histograms and a summary from an output directory"},
                      {"walkforward", "sliding train/test folds over calendar years"},
                      {"check", "run invariant suites on a market"},
                      {"config", "print the resolved configuration"}};
  std::map<std::string, CLI::App*> commands;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    AddCommonOptions(sub, opts);
    commands[s.name] = sub;
  }
  commands["config"]->add_flag("--docs", docs, "print the key reference as a markdown table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    EmitError("UsageError", e.what(), "");
    return kExitError;
  }

  Context ctx;
  ctx.opts = opts;
  for (const auto& [name, sub] : commands) {
    if (sub->parsed()) ctx.command = name;
  }
  try {
    ctx.cfg = ResolveConfig(opts);
    if (ctx.command == "synth") CmdSynth(ctx);
    else if (ctx.command == "ingest") CmdIngest(ctx);
    else if (ctx.command == "fit-predictor") CmdFitPredictor(ctx);
    else if (ctx.command == "train") CmdTrain(ctx);
    else if (ctx.command == "benchmark") CmdBenchmark(ctx);
    else if (ctx.command == "evaluate") CmdEvaluate(ctx);
    else if (ctx.command == "report") CmdReport(ctx);
    else if (ctx.command == "walkforward") CmdWalkForward(ctx);
    else if (ctx.command == "check") CmdCheck(ctx);
    else if (ctx.command == "config") CmdConfig(ctx, docs);
  } catch (const Error& e) {
    EmitError(std::string(ErrorCodeName(e.code())), e.what(), e.subject());
    return kExitError;
  } catch (const std::exception& e) {
    EmitError("InternalError", e.what(), "");
    return kExitError;
  }

  bool ok = true;
  for (const auto& r : ctx.checks) {
    std::cerr << (r.passed ? "CHECK PASS " : "CHECK FAIL ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.passed;
  }
  if (!ok) {
    EmitError("InvariantViolation", "one or more invariant suites failed", "");
    return kExitCheckFailed;
  }
  return 0;
}
