#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "powerarb/clearing.hpp"
#include "powerarb/error.hpp"
#include "powerarb/market_env.hpp"
#include "powerarb/market_table.hpp"
#include "powerarb/policies.hpp"
#include "powerarb/run_config.hpp"
#include "powerarb/state_predictor.hpp"
#include "powerarb/synthetic.hpp"
#include "powerarb/timestamp.hpp"
#include "powerarb/walkforward.hpp"

namespace py = pybind11;
using namespace powerarb;

namespace {

using TablePtr = std::shared_ptr<const data::MarketTable>;

py::dict PnlDict(const PnlSeries& s) {
  py::dict d;
  d["timestamps"] = s.timestamps;
  d["hourly"] = s.hourly;
  d["cumulative"] = s.cumulative;
  d["total"] = s.total();
  return d;
}

py::dict BreakdownDict(const env::RewardBreakdown& b) {
  py::dict d;
  d["hydrogen_revenue"] = b.hydrogen_revenue;
  d["da_cost"] = b.da_cost;
  d["bm_cashflow"] = b.bm_cashflow;
  d["shaping_term"] = b.shaping_term;
  d["total"] = b.total;
  d["unshaped"] = b.unshaped();
  return d;
}

py::dict ExecutionDict(const env::Execution& e) {
  py::dict d;
  d["s_bm"] = e.s_bm;
  d["p_bm"] = e.p_bm;
  py::list fills;
  for (const auto& f : e.fills) fills.append(py::make_tuple(f.price, f.volume));
  d["fills"] = fills;
  return d;
}

walkforward::Fold FoldOf(const std::vector<int>& train, const std::vector<int>& test) {
  return walkforward::Fold{train, test};
}

env::BmOrder OrderOf(const std::string& kind, double p_bid, double p_ask, const env::VolumeBounds& v) {
  if (kind == "none") return env::NoOrder{};
  if (kind == "single") return env::BmAction{p_bid, p_ask};
  if (kind == "ladder") return env::BuildLadder(env::BmAction{p_bid, p_ask}, v);
  if (kind == "full_ladder") return env::FullLadder(v);
  throw Error(ErrorCode::kInvalidOrder, "order kind must be none|single|ladder|full_ladder", kind);
}

// Python-facing episode runner over a shared table.
class Env {
 public:
  Env(TablePtr table, const config::RunConfig& cfg)
      : env_(std::move(table), cfg.pipeline.MakeEnvConfig()),
        mode_(cfg.pipeline.train.reward_mode),
        ladder_(cfg.pipeline.train.UsesLadder()) {}

  std::size_t num_hours() const { return env_.num_hours(); }
  std::vector<std::size_t> hours() const { return env_.AllHours(); }
  std::size_t da_dim() const { return env_.da_observation_dim(); }
  std::size_t bm_dim() const { return env_.bm_observation_dim(); }

  Eigen::VectorXd Reset(std::size_t hour) {
    Eigen::VectorXd obs;
    state_ = env_.Reset(hour, &obs);
    return obs;
  }
  Eigen::VectorXd StepDayAhead(double s_da) { return env_.StepDayAhead(state_, env::DaAction{s_da}); }
  py::tuple StepBalancing(double p_bid, double p_ask) {
    const env::BmOrder order =
        ladder_ ? env::BmOrder(env::BuildLadder({p_bid, p_ask}, env_.Bounds(state_)))
                : env::BmOrder(env::BmAction{p_bid, p_ask});
    const env::StepResult r = env_.StepBalancing(state_, order, mode_);
    return py::make_tuple(r.next_observation, r.reward, r.done, BreakdownDict(r.breakdown));
  }
  double cumulative_pnl() const { return state_.cumulative_pnl; }
  std::vector<std::string> clip_log() const { return state_.clip_log; }

 private:
  env::MarketEnv env_;
  env::EpisodeState state_;
  env::RewardMode mode_;
  bool ladder_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bi-level day-ahead / balancing arbitrage: market data, clearing, benchmarks, DDPG agents";
  m.attr("__version__") = "0.1.0";

  // Raised for every library error; `code` holds the error code name and `subject` the offending item.
  static PyObject* py_error = py::exception<Error>(m, "PowerArbError").release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(py_error)(e.what());
      exc.attr("code") = std::string(ErrorCodeName(e.code()));
      exc.attr("subject") = e.subject();
      PyErr_SetObject(py_error, exc.ptr());
    }
  });

  m.def("parse_timestamp", &ParseIso8601);
  m.def("format_timestamp", &FormatIso8601);
  m.def("start_of_year", &StartOfYear);

  py::class_<config::RunConfig>(m, "Config")
      .def(py::init<>())
      .def("set", &config::SetKey, py::arg("key"), py::arg("value"))
      .def("get", [](const config::RunConfig& c, const std::string& k) { return config::GetKey(c, k); })
      .def_static("keys", [] {
        std::vector<std::string> out;
        for (const auto& k : config::ConfigKeys()) out.push_back(k.name);
        return out;
      })
      .def("dump", [](const config::RunConfig& c) {
        std::ostringstream s;
        config::WriteConfig(s, c);
        return s.str();
      })
      .def_static("parse", [](const std::string& text) {
        config::RunConfig c;
        std::istringstream in(text);
        config::ParseConfig(in, c);
        return c;
      });

  py::class_<data::MarketTable, std::shared_ptr<data::MarketTable>>(m, "MarketTable")
      .def("__len__", &data::MarketTable::size)
      .def_property_readonly("start", &data::MarketTable::start)
      .def_property_readonly("end", &data::MarketTable::end)
      .def_property_readonly("fundamentals", &data::MarketTable::fundamental_names)
      .def("years", &data::MarketTable::Years)
      .def("column", &data::MarketTable::Column, py::arg("name"))
      .def("has_column", &data::MarketTable::HasColumn)
      .def("regulation", [](const data::MarketTable& t) {
        std::vector<std::string> out;
        for (const auto& r : t.rows()) out.emplace_back(data::RegulationName(r.regulation_state));
        return out;
      })
      .def("slice", [](const data::MarketTable& t, Timestamp b, Timestamp e) {
        return std::make_shared<data::MarketTable>(t.Slice(b, e));
      })
      .def("with_lags", [](const data::MarketTable& t, const std::string& spec) {
        return std::make_shared<data::MarketTable>(data::BuildLaggedFeatures(t, config::ParseLagSpec(spec)));
      })
      .def("save", [](const data::MarketTable& t, const std::string& path) { data::SaveMarketTable(path, t); });

  m.def("generate_synthetic_market", [](const config::RunConfig& c) {
    return std::make_shared<data::MarketTable>(data::GenerateSyntheticMarket(c.synth));
  }, py::arg("config") = config::RunConfig());
  m.def("load_market_table", [](const std::string& path, const config::RunConfig& c) {
    data::LoadOptions lo{c.schema, c.resolution, c.expand_to_quarter_hour};
    return std::make_shared<data::MarketTable>(data::LoadMarketTable(path, lo));
  }, py::arg("path"), py::arg("config") = config::RunConfig());

  m.def("feasible_bounds", [](double e_da) {
    const env::VolumeBounds v = env::FeasibleVolumeBounds(e_da);
    return py::make_tuple(v.max_bid_volume, v.max_ask_volume);
  });
  m.def("clear", [](const std::string& kind, double p_bid, double p_ask, double e_da,
                    const std::string& regulation, double bid_clear, double ask_clear) {
    const env::VolumeBounds v = env::FeasibleVolumeBounds(e_da);
    env::PriceContext ctx;
    ctx.regulation_state = data::ParseRegulation(regulation);
    ctx.bm_bid_clearing = bid_clear;
    ctx.bm_ask_clearing = ask_clear;
    return ExecutionDict(env::ClearOrders(OrderOf(kind, p_bid, p_ask, v), v, ctx));
  }, py::arg("kind"), py::arg("p_bid"), py::arg("p_ask"), py::arg("e_da"), py::arg("regulation"),
     py::arg("bid_clear"), py::arg("ask_clear"));
  m.def("quarter_reward", [](double s_da, double p_da, double s_bm, double p_bm, double p_h, bool literal_eq1) {
    env::Execution e;
    e.s_bm = s_bm;
    e.p_bm = p_bm;
    if (s_bm != 0.0) e.fills.push_back({p_bm, s_bm});
    env::PriceContext ctx;
    ctx.p_da = p_da;
    ctx.p_h = p_h;
    return BreakdownDict(env::QuarterReward(e, s_da, ctx, literal_eq1));
  }, py::arg("s_da"), py::arg("p_da"), py::arg("s_bm") = 0.0, py::arg("p_bm") = 0.0,
     py::arg("p_h") = env::kHydrogenPrice, py::arg("literal_eq1") = false);

  m.def("run_benchmark", [](const std::string& name, const data::MarketTable& t, Timestamp b, Timestamp e,
                            double p_h, bool literal_eq1) {
    return PnlDict(policies::RunBenchmark(policies::ParseBenchmark(name), t, b, e, {p_h, literal_eq1}));
  }, py::arg("name"), py::arg("table"), py::arg("begin"), py::arg("end"),
     py::arg("hydrogen_price") = env::kHydrogenPrice, py::arg("literal_eq1") = false);

  m.def("fit_predictor", [](const data::MarketTable& t, const std::vector<std::string>& features,
                            Timestamp b, Timestamp e, const config::RunConfig& c) {
    const auto fit = data::FitStatePredictor(t.Slice(b, e), features, c.pipeline.predictor);
    py::dict d;
    d["weights"] = fit.predictor.weights;
    d["bias"] = fit.predictor.bias;
    d["loss_history"] = fit.loss_history;
    d["iterations"] = fit.iterations;
    d["train_accuracy"] = data::PredictorAccuracy(fit.predictor, t, b, e, c.pipeline.predictor_threshold);
    std::ostringstream s;
    data::WriteStatePredictor(s, fit.predictor);
    d["serialized"] = s.str();
    return d;
  }, py::arg("table"), py::arg("features"), py::arg("begin"), py::arg("end"),
     py::arg("config") = config::RunConfig());

  m.def("add_prediction_column", [](const data::MarketTable& t, Timestamp b, Timestamp e,
                                    const config::RunConfig& c) {
    const auto fit = data::FitStatePredictor(t.Slice(b, e), c.pipeline.predictor_features, c.pipeline.predictor);
    return std::make_shared<data::MarketTable>(
        data::WithPredictionColumn(t, fit.predictor, c.pipeline.prediction_column));
  }, py::arg("table"), py::arg("begin"), py::arg("end"), py::arg("config") = config::RunConfig(),
     "Fits the state predictor on [begin, end) and appends its probability column.");

  m.def("build_plan", [](const std::vector<int>& years, int train_len, int test_len) {
    std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
    for (const auto& f : walkforward::BuildPlan(years, train_len, test_len).folds) {
      out.emplace_back(f.train_years, f.test_years);
    }
    return out;
  }, py::arg("years"), py::arg("train_len") = 2, py::arg("test_len") = 1);

  py::class_<walkforward::TrainedModel>(m, "TrainedModel")
      .def_readonly("da_observation_dim", &walkforward::TrainedModel::da_observation_dim)
      .def_readonly("bm_observation_dim", &walkforward::TrainedModel::bm_observation_dim)
      .def_readonly("train_hours", &walkforward::TrainedModel::train_hours)
      .def("curve", [](const walkforward::TrainedModel& model) {
        std::vector<double> out;
        for (const auto& p : model.curve) out.push_back(p.raw_reward);
        return out;
      })
      .def("checksums", [](const walkforward::TrainedModel& model) {
        const auto c = model.ComputeChecksums();
        py::dict d;
        d["standardizer"] = c.standardizer;
        d["predictor"] = c.predictor;
        d["da_agent"] = c.da_agent;
        d["bm_agent"] = c.bm_agent;
        return d;
      })
      .def("save", &walkforward::TrainedModel::Save)
      .def_static("load", &walkforward::TrainedModel::Load);

  m.def("train", [](const data::MarketTable& t, const std::vector<int>& train_years, const config::RunConfig& c) {
    const auto fold = FoldOf(train_years, {train_years.back() + 1});
    py::gil_scoped_release release;
    return walkforward::FitModel(t, fold.train_begin(), fold.train_end(), c.pipeline);
  }, py::arg("table"), py::arg("train_years"), py::arg("config") = config::RunConfig());

  m.def("evaluate", [](const walkforward::TrainedModel& model, const data::MarketTable& t,
                       const std::vector<int>& test_years, const config::RunConfig& c) {
    const auto fold = FoldOf({test_years.front() - 1}, test_years);
    const auto eval = [&] {
      py::gil_scoped_release release;
      return walkforward::EvaluateModel(model, t, fold.test_begin(), fold.test_end(), c.pipeline);
    }();
    py::dict d;
    d["agent"] = PnlDict(eval.agent.pnl);
    for (const auto& [id, s] : eval.benchmarks) d[py::str(std::string(policies::BenchmarkName(id)))] = PnlDict(s);
    d["predictor_accuracy"] = eval.predictor_accuracy ? py::cast(*eval.predictor_accuracy) : py::none();
    return d;
  }, py::arg("model"), py::arg("table"), py::arg("test_years"), py::arg("config") = config::RunConfig());

  m.def("run_walk_forward", [](const data::MarketTable& t, const config::RunConfig& c) {
    const auto plan = c.explicit_pairs.empty()
                          ? walkforward::BuildPlan(t.Years(), c.plan_train_len, c.plan_test_len)
                          : walkforward::PlanFromPairs(walkforward::ParseYearPairs(c.explicit_pairs));
    const auto result = [&] {
      py::gil_scoped_release release;
      return walkforward::RunWalkForward(plan, t, c.pipeline);
    }();
    py::dict d;
    py::list folds;
    for (const auto& f : result.folds) {
      py::dict fd;
      fd["label"] = f.fold.Label();
      fd["seed"] = f.seed;
      fd["agent"] = PnlDict(f.agent);
      fd["predictor_accuracy"] = f.predictor_accuracy ? py::cast(*f.predictor_accuracy) : py::none();
      folds.append(fd);
    }
    d["folds"] = folds;
    d["agent"] = PnlDict(result.agent);
    for (const auto& [id, s] : result.benchmarks) d[py::str(std::string(policies::BenchmarkName(id)))] = PnlDict(s);
    return d;
  }, py::arg("table"), py::arg("config") = config::RunConfig());

  py::class_<Env>(m, "Env")
      .def(py::init([](std::shared_ptr<data::MarketTable> t, const config::RunConfig& c) {
        return Env(std::const_pointer_cast<const data::MarketTable>(t), c);
      }), py::arg("table"), py::arg("config") = config::RunConfig())
      .def_property_readonly("num_hours", &Env::num_hours)
      .def_property_readonly("da_dim", &Env::da_dim)
      .def_property_readonly("bm_dim", &Env::bm_dim)
      .def("hours", &Env::hours)
      .def("reset", &Env::Reset, py::arg("hour"))
      .def("step_day_ahead", &Env::StepDayAhead, py::arg("s_da"))
      .def("step_balancing", &Env::StepBalancing, py::arg("p_bid"), py::arg("p_ask"))
      .def_property_readonly("cumulative_pnl", &Env::cumulative_pnl)
      .def_property_readonly("clip_log", &Env::clip_log);
}
