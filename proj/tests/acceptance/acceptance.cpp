// Acceptance runner. Usage: acceptance [criterion ...]; no arguments runs 1-11.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "powerarb/clearing.hpp"
#include "powerarb/ddpg.hpp"
#include "powerarb/error.hpp"
#include "powerarb/market_env.hpp"
#include "powerarb/observation.hpp"
#include "powerarb/policies.hpp"
#include "powerarb/rng.hpp"
#include "powerarb/run_config.hpp"
#include "powerarb/state_predictor.hpp"
#include "powerarb/synthetic.hpp"
#include "powerarb/training.hpp"
#include "powerarb/walkforward.hpp"

namespace {

using namespace powerarb;
using env::BmAction;
using env::BmOrder;
using env::PriceContext;
using env::RewardMode;
using env::TranchedOrder;
using data::RegulationState;
using Eigen::VectorXd;

// Pinned tolerances and thresholds.
constexpr double kEurTolerance = 1e-9;
constexpr double kConsumptionSlack = 1e-9;
constexpr double kFdStep = 1e-5;
constexpr double kFdRetryStep = 1e-7;
constexpr double kFdMaxRelError = 1e-4;
constexpr double kFdScaleFloor = 1e-5;
constexpr double kBanditTarget = 0.3;
constexpr double kBanditTolerance = 0.05;
constexpr double kOracleFraction = 0.90;
constexpr double kBlobAccuracy = 0.99;
constexpr double kRegulationAccuracy = 0.55;
constexpr double kBayesFloor = 0.60;

constexpr double kPh = env::kHydrogenPrice;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

// ---- independent oracle of the market mechanics ----

struct OracleFill {
  double price;
  double volume;
};

double BidHeadroom(double e) { return std::max(0.0, 50.0 - e); }
double AskHeadroom(double e) { return std::max(0.0, e - 5.0); }

std::vector<double> AskGrid() {
  std::vector<double> g;
  for (int k = 0; k < 11; ++k) g.push_back(75.0 + 20.0 * k);
  return g;
}

std::vector<double> BidGrid() {
  std::vector<double> g;
  for (int k = 0; k < 11; ++k) g.push_back(-125.0 + 20.0 * k);
  return g;
}

std::vector<OracleFill> OracleClear(const BmOrder& order, double e, const PriceContext& ctx) {
  std::vector<OracleFill> fills;
  const bool surplus = ctx.regulation_state == RegulationState::kSurplus;
  const bool shortage = ctx.regulation_state == RegulationState::kShortage;
  if (const auto* s = std::get_if<BmAction>(&order)) {
    if (surplus && BidHeadroom(e) > 0 && s->p_bid >= ctx.bm_bid_clearing) {
      fills.push_back({s->p_bid, BidHeadroom(e)});
    }
    if (shortage && AskHeadroom(e) > 0 && s->p_ask <= ctx.bm_ask_clearing) {
      fills.push_back({s->p_ask, -AskHeadroom(e)});
    }
  } else if (const auto* t = std::get_if<TranchedOrder>(&order)) {
    // Every level on its own.
    for (const auto& l : t->bid.levels) {
      if (surplus && l.volume > 0 && l.price >= ctx.bm_bid_clearing) fills.push_back({l.price, l.volume});
    }
    for (const auto& l : t->ask.levels) {
      if (shortage && l.volume > 0 && l.price <= ctx.bm_ask_clearing) fills.push_back({l.price, -l.volume});
    }
  }
  return fills;
}

double OracleQuarterPnl(const std::vector<OracleFill>& fills, double s_da, const PriceContext& ctx) {
  const double e = s_da / 4.0;
  double s_bm = 0, cash = 0;
  for (const auto& f : fills) {
    s_bm += f.volume;
    cash += f.volume * f.price;
  }
  return (s_bm + e) * ctx.p_h - e * ctx.p_da - cash;
}

TranchedOrder OracleFullLadder(double e) {
  TranchedOrder t;
  for (double p : BidGrid()) t.bid.levels.push_back({p, BidHeadroom(e) / 11.0});
  for (double p : AskGrid()) t.ask.levels.push_back({p, AskHeadroom(e) / 11.0});
  return t;
}

// Benchmark P&L for one quarter, from the policy rules alone.
double OracleBenchmarkQuarter(int k, const PriceContext& ctx, double agent_s_da) {
  double s = 0;
  BmOrder order = env::NoOrder{};
  const double p3 = ctx.p_h > ctx.p_da ? 200.0 : 20.0;
  switch (k) {
    case 1: s = 150; order = BmAction{-100, 100}; break;
    case 2: s = 200; break;
    case 3: s = p3; break;
    case 4: s = agent_s_da; order = OracleFullLadder(s / 4); break;
    case 5: s = p3; order = OracleFullLadder(s / 4); break;
  }
  return OracleQuarterPnl(OracleClear(order, s / 4, ctx), s, ctx);
}

// ---- shared fixtures ----

std::shared_ptr<const data::MarketTable> SynthMarket(std::uint64_t seed, int days = 365) {
  data::SynthConfig c;
  c.days = days;
  c.seed = seed;
  return std::make_shared<const data::MarketTable>(data::GenerateSyntheticMarket(c));
}

env::EnvConfig PriceOnlyEnv() {
  env::EnvConfig ec;
  ec.da_observation = {data::Level::kDayAhead, {"da_price"}, 0};
  ec.bm_observation = {data::Level::kBalancing, {"da_price"}, 0};
  return ec;
}

BmOrder RandomOrder(Rng& rng, const env::VolumeBounds& v) {
  switch (rng.UniformInt(4)) {
    case 0: return env::NoOrder{};
    case 1: return BmAction{rng.Uniform(-200, 200), rng.Uniform(-200, 200)};
    case 2: return env::BuildLadder(BmAction{rng.Uniform(-200, 200), rng.Uniform(-200, 200)}, v);
    default: {
      TranchedOrder t;
      double left_b = v.max_bid_volume, left_a = v.max_ask_volume;
      for (double p : BidGrid()) {
        if (rng.Bernoulli(0.5)) continue;
        const double vol = rng.Uniform(0, left_b / 3);
        left_b -= vol;
        t.bid.levels.push_back({p, vol});
      }
      for (double p : AskGrid()) {
        if (rng.Bernoulli(0.5)) continue;
        const double vol = rng.Uniform(0, left_a / 3);
        left_a -= vol;
        t.ask.levels.push_back({p, vol});
      }
      return t;
    }
  }
}

// ---- criteria ----

Outcome Criterion1() {
  auto market = SynthMarket(11);
  env::MarketEnv environment(market, PriceOnlyEnv());
  const auto hours = environment.AllHours();
  Rng rng(101);
  double worst_sum = 0, worst_oracle = 0, worst_nofill = 0;
  int nofill = 0;
  for (int ep = 0; ep < 1000; ++ep) {
    auto st = environment.Reset(hours[rng.UniformInt(hours.size())]);
    const double s_da = rng.Uniform(20, 200);
    environment.StepDayAhead(st, env::DaAction{s_da});
    const bool quiet = ep % 4 == 0;
    bool any_fill = false;
    double hour_p_da = 0;
    while (!st.done) {
      const PriceContext ctx = environment.QuarterContext(st);
      hour_p_da += ctx.p_da / 4;
      const BmOrder order = quiet ? BmOrder{env::NoOrder{}} : RandomOrder(rng, environment.Bounds(st));
      const auto r = environment.StepBalancing(st, order, RewardMode::kRaw);
      const auto fills = OracleClear(order, s_da / 4, ctx);
      any_fill |= !fills.empty();
      worst_oracle = std::max(worst_oracle, std::abs(r.breakdown.total - OracleQuarterPnl(fills, s_da, ctx)));
    }
    double sum = 0;
    for (double q : st.quarter_rewards) sum += q;
    worst_sum = std::max(worst_sum, std::abs(sum - st.cumulative_pnl));
    if (!any_fill) {
      ++nofill;
      worst_nofill = std::max(worst_nofill, std::abs(st.cumulative_pnl - s_da * (kPh - hour_p_da)));
    }
  }
  const bool pass = worst_sum <= kEurTolerance && worst_oracle <= kEurTolerance &&
                    worst_nofill <= kEurTolerance && nofill >= 250;
  return {pass, Fmt("max |hour - sum quarters| %.3g, max |quarter - oracle| %.3g, "
                    "%d no-fill hours max |pnl - s(p_h - p_da)| %.3g",
                    worst_sum, worst_oracle, nofill, worst_nofill)};
}

Outcome Criterion2() {
  auto market = SynthMarket(12);
  env::MarketEnv environment(market, PriceOnlyEnv());
  const auto hours = environment.AllHours();
  Rng rng(202);
  const RewardMode modes[] = {RewardMode::kRaw, RewardMode::kImitation, RewardMode::kTranched,
                              RewardMode::kTranchedImitation};
  double worst_shaping = 0;
  int pnl_mismatch = 0;
  for (int ep = 0; ep < 1000; ++ep) {
    const std::size_t hour = hours[rng.UniformInt(hours.size())];
    const double s_da = rng.Uniform(20, 200);
    std::vector<BmOrder> orders;
    {
      auto st = environment.Reset(hour);
      environment.StepDayAhead(st, env::DaAction{s_da});
      for (int q = 0; q < 4; ++q) orders.push_back(RandomOrder(rng, environment.Bounds(st)));
    }
    double reference_pnl = 0;
    for (RewardMode mode : modes) {
      auto st = environment.Reset(hour);
      environment.StepDayAhead(st, env::DaAction{s_da});
      for (int q = 0; q < 4; ++q) {
        const PriceContext ctx = environment.QuarterContext(st);
        const auto r = environment.StepBalancing(st, orders[q], mode);
        const double raw = OracleQuarterPnl(OracleClear(orders[q], s_da / 4, ctx), s_da, ctx);
        double expected = raw;
        if (mode == RewardMode::kImitation) {
          expected = raw - (OracleBenchmarkQuarter(1, ctx, s_da) + OracleBenchmarkQuarter(2, ctx, s_da) +
                            OracleBenchmarkQuarter(3, ctx, s_da)) / 3.0;
        } else if (mode == RewardMode::kTranchedImitation) {
          expected = raw - (OracleBenchmarkQuarter(4, ctx, s_da) + OracleBenchmarkQuarter(5, ctx, s_da)) / 2.0;
        }
        worst_shaping = std::max(worst_shaping, std::abs(r.reward - expected));
      }
      if (mode == RewardMode::kRaw) {
        reference_pnl = st.cumulative_pnl;
      } else if (st.cumulative_pnl != reference_pnl) {
        ++pnl_mismatch;
      }
    }
  }
  return {worst_shaping <= kEurTolerance && pnl_mismatch == 0,
          Fmt("max |shaped - (raw - mean F)| %.3g over 4000 hours, %d P&L mismatches across modes",
              worst_shaping, pnl_mismatch)};
}

Outcome Criterion3() {
  Rng rng(303);
  int mismatches = 0;
  long fills_seen = 0;
  const RegulationState states[] = {RegulationState::kSurplus, RegulationState::kShortage,
                                    RegulationState::kBalanced};
  for (int c = 0; c < 10000; ++c) {
    const double s_da = rng.Uniform(20, 200);
    const double e = s_da / 4;
    PriceContext ctx;
    ctx.p_da = rng.Uniform(-50, 250);
    ctx.regulation_state = states[rng.UniformInt(3)];
    // Clearing prices on and off the ladder grid.
    auto price = [&](const std::vector<double>& grid) {
      return rng.Bernoulli(0.3) ? grid[rng.UniformInt(grid.size())] : rng.Uniform(-250, 300);
    };
    ctx.bm_bid_clearing = price(BidGrid());
    ctx.bm_ask_clearing = std::max(ctx.bm_bid_clearing, price(AskGrid()));
    const env::VolumeBounds v = env::FeasibleVolumeBounds(e);
    const BmOrder order = rng.Bernoulli(0.5) ? BmOrder{env::BuildLadder(
                                                   BmAction{rng.Uniform(-200, 200), rng.Uniform(-200, 200)}, v)}
                                             : RandomOrder(rng, v);
    if (!std::holds_alternative<TranchedOrder>(order)) {
      --c;
      continue;
    }
    const env::Execution got = env::ClearOrders(order, v, ctx);
    const auto want = OracleClear(order, e, ctx);
    bool same = got.fills.size() == want.size();
    for (std::size_t i = 0; same && i < want.size(); ++i) {
      same = got.fills[i].price == want[i].price && got.fills[i].volume == want[i].volume;
    }
    const env::RewardBreakdown b = env::QuarterReward(got, s_da, ctx);
    double cash = 0;
    for (const auto& f : want) cash += f.volume * f.price;
    same = same && b.bm_cashflow == cash;
    mismatches += !same;
    fills_seen += static_cast<long>(want.size());
  }
  return {mismatches == 0, Fmt("%d mismatches in 10000 ladder cases (%ld level fills)", mismatches, fills_seen)};
}

Outcome Criterion4() {
  auto market = SynthMarket(14);
  env::MarketEnv environment(market, PriceOnlyEnv());
  const auto hours = environment.AllHours();
  Rng rng(404);
  const double nasty_s[] = {-1e9, -1, 0, 19.999, 20, 200, 200.001, 1e9,
                            std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::infinity()};
  const double nasty_p[] = {-200, 200, -200.0001, 1e6, std::numeric_limits<double>::quiet_NaN(), 0, 75};
  long steps = 0, rejected = 0, violations = 0;
  double lo = INFINITY, hi = -INFINITY;
  for (int ep = 0; ep < 100000; ++ep) {
    auto st = environment.Reset(hours[rng.UniformInt(hours.size())]);
    const double s = rng.Bernoulli(0.5) ? nasty_s[rng.UniformInt(std::size(nasty_s))] : rng.Uniform(-500, 500);
    try {
      environment.StepDayAhead(st, env::DaAction{s});
    } catch (const Error&) {
      ++rejected;
      continue;
    }
    while (!st.done) {
      const env::VolumeBounds v = environment.Bounds(st);
      BmOrder order;
      switch (rng.UniformInt(4)) {
        case 0:
          order = BmAction{nasty_p[rng.UniformInt(std::size(nasty_p))], nasty_p[rng.UniformInt(std::size(nasty_p))]};
          break;
        case 1: {
          // Ladder that may overfill its side.
          TranchedOrder t;
          const double scale = rng.Uniform(0.5, 2.0);
          for (double p : BidGrid()) t.bid.levels.push_back({p, scale * v.max_bid_volume / 11});
          for (double p : AskGrid()) t.ask.levels.push_back({p, scale * v.max_ask_volume / 11});
          order = t;
          break;
        }
        case 2: order = env::FullLadder(v); break;
        default: order = BmAction{rng.Bernoulli(0.5) ? 200.0 : -200.0, rng.Bernoulli(0.5) ? 200.0 : -200.0};
      }
      const int q_before = st.quarter;
      try {
        const auto r = environment.StepBalancing(st, order, RewardMode::kRaw);
        double bought = 0;
        for (const auto& f : r.execution.fills) bought += f.volume;
        const double consumption = st.e_da + bought;
        lo = std::min(lo, consumption);
        hi = std::max(hi, consumption);
        violations += !(consumption >= 5.0 - kConsumptionSlack && consumption <= 50.0 + kConsumptionSlack) ||
                      !(std::abs(consumption - r.net_consumption) <= kConsumptionSlack);
        ++steps;
      } catch (const Error&) {
        ++rejected;
        if (st.quarter != q_before) ++violations;
        // Finish the episode with no order.
        environment.StepBalancing(st, env::NoOrder{}, RewardMode::kRaw);
      }
    }
  }
  return {violations == 0 && steps > 0,
          Fmt("%ld quarters traded, %ld orders rejected, consumption in [%.6f, %.6f], %ld violations",
              steps, rejected, lo, hi, violations)};
}

template <typename Loss>
double WorstFdError(VectorXd& params, const VectorXd& analytic, Loss loss) {
  double worst = 0;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    double best = INFINITY;
    // Smaller h on ReLU kinks.
    for (double h : {kFdStep, kFdRetryStep}) {
      params[i] = saved + h;
      const double up = loss();
      params[i] = saved - h;
      const double dn = loss();
      params[i] = saved;
      const double fd = (up - dn) / (2 * h);
      const double scale = std::max({std::abs(fd), std::abs(analytic[i]), kFdScaleFloor});
      best = std::min(best, std::abs(fd - analytic[i]) / scale);
      if (best < kFdMaxRelError) break;
    }
    worst = std::max(worst, best);
  }
  return worst;
}

Outcome Criterion5() {
  double worst_critic = 0, worst_actor = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    rl::DdpgConfig cfg = rl::TrainConfig{}.bm_agent;
    cfg.final_layer_init = 0.3;
    rl::DdpgAgent agent(6, VectorXd::Constant(2, -200), VectorXd::Constant(2, 200), cfg, seed);
    Rng rng(seed + 1000);
    std::vector<rl::Transition> ts;
    for (int i = 0; i < 8; ++i) {
      rl::Transition t;
      t.observation = VectorXd::NullaryExpr(6, [&] { return rng.Normal(); });
      t.action = VectorXd::NullaryExpr(2, [&] { return rng.Uniform(-200, 200); });
      t.raw_action = t.action / 200;
      t.reward = rng.Normal(0, 500);
      t.terminal = i % 2 == 0;
      if (!t.terminal) t.next_observation = VectorXd::NullaryExpr(6, [&] { return rng.Normal(); });
      ts.push_back(t);
    }
    std::vector<const rl::Transition*> batch;
    for (auto& t : ts) batch.push_back(&t);
    const VectorXd gc = agent.CriticLossGradient(batch).gradient;
    worst_critic = std::max(worst_critic, WorstFdError(agent.mutable_critic().parameters(), gc, [&] {
                              return agent.CriticLossGradient(batch).loss;
                            }));
    const VectorXd ga = agent.ActorLossGradient(batch).gradient;
    worst_actor = std::max(worst_actor, WorstFdError(agent.mutable_actor().parameters(), ga, [&] {
                             return agent.ActorLossGradient(batch).loss;
                           }));
  }
  return {worst_critic < kFdMaxRelError && worst_actor < kFdMaxRelError,
          Fmt("max relative error critic %.3g, actor %.3g over 20 seeds (64/32)", worst_critic, worst_actor)};
}

Outcome Criterion6() {
  int hits = 0;
  std::string means;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    rl::DdpgConfig c;
    c.gamma = 0;
    c.reward_scale = 1.0;
    rl::DdpgAgent agent(1, VectorXd::Constant(1, -1), VectorXd::Constant(1, 1), c, seed);
    Rng rng(seed * 101);
    const VectorXd obs = VectorXd::Ones(1);
    const int updates = 5000;
    double tail = 0;
    for (int u = 0; u < updates; ++u) {
      VectorXd raw;
      const VectorXd a = agent.SelectAction(obs, true, rng, c.NoiseStddev(u, updates), &raw);
      rl::Transition t;
      t.observation = obs;
      t.raw_action = raw;
      t.action = a;
      t.reward = -(a[0] - kBanditTarget) * (a[0] - kBanditTarget);
      agent.Store(t);
      if (agent.replay().size() >= c.batch_size) agent.Update();
      if (u >= updates - 500) tail += agent.actor().Forward(obs)[0];
    }
    tail /= 500;
    hits += std::abs(tail - kBanditTarget) <= kBanditTolerance;
    means += Fmt(" %.4f", tail);
  }
  return {hits >= 4, Fmt("%d/5 seeds within %.2f of %.1f; tail means%s", hits, kBanditTolerance,
                         kBanditTarget, means.c_str())};
}

Outcome Criterion7() {
  // One price regime, no signal, no Balanced quarters: the best stationary
  // policy is a constant (s_da, P_b, P_a) and the grid finds it.
  data::SynthConfig sc;
  sc.days = 730;
  sc.seed = 3;
  sc.price_regimes = {{1.0, 50.0, 5.0, 40.0}};
  sc.da_load_sensitivity = 0;
  sc.signal_strength = 0;
  sc.shortage_base_prob = 0.5;
  sc.balanced_prob = 0;
  auto market = std::make_shared<const data::MarketTable>(data::GenerateSyntheticMarket(sc));
  const Timestamp split = StartOfYear(2016);
  auto z = std::make_shared<const data::Standardizer>(
      data::Standardizer::Fit(*market, {"da_price"}, market->start(), split));
  env::MarketEnv environment(market, PriceOnlyEnv(), z);
  const auto train = environment.HoursIn(market->start(), split);
  const auto test = environment.HoursIn(split, market->end());

  std::vector<PriceContext> quarters;
  for (auto h : test) {
    auto st = environment.Reset(h);
    environment.StepDayAhead(st, env::DaAction{20});
    while (!st.done) {
      quarters.push_back(environment.QuarterContext(st));
      environment.StepBalancing(st, env::NoOrder{}, RewardMode::kRaw);
    }
  }
  // Bid and ask never fill in the same quarter, so the P&L separates per side.
  double best = -INFINITY, best_s = 0, best_b = 0, best_a = 0;
  for (double s = 20; s <= 200; s += 10) {
    const double e = s / 4;
    double base = 0;
    for (const auto& q : quarters) base += e * (kPh - q.p_da);
    double gb = -INFINITY, pb = 0, ga = -INFINITY, pa = 0;
    for (double p = -200; p <= 200; p += 5) {
      double tb = 0, ta = 0;
      for (const auto& q : quarters) {
        if (q.regulation_state == RegulationState::kSurplus && p >= q.bm_bid_clearing) {
          tb += BidHeadroom(e) * (kPh - p);
        }
        if (q.regulation_state == RegulationState::kShortage && p <= q.bm_ask_clearing) {
          ta += AskHeadroom(e) * (p - kPh);
        }
      }
      if (tb > gb) gb = tb, pb = p;
      if (ta > ga) ga = ta, pa = p;
    }
    if (base + gb + ga > best) best = base + gb + ga, best_s = s, best_b = pb, best_a = pa;
  }

  int hits = 0;
  std::string ratios;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    rl::TrainConfig tc;
    tc.episodes = 20000;
    tc.seed = seed;
    const auto trained = rl::TrainDualAgents(environment, train, tc);
    const auto ev = rl::EvaluateAgents(environment, trained.da_agent, trained.bm_agent, test, false);
    const double ratio = ev.pnl.total() / best;
    hits += ratio >= kOracleFraction;
    ratios += Fmt(" %.3f", ratio);
  }
  return {hits >= 3, Fmt("oracle %.0f EUR at s_da %.0f, P_b %.0f, P_a %.0f; agent/oracle%s; %d/5 >= %.2f",
                         best, best_s, best_b, best_a, ratios.c_str(), hits, kOracleFraction)};
}

Outcome Criterion8() {
  // Default generator: two price regimes and both regulation states.
  config::RunConfig rc;
  rc.synth.days = 731;
  const data::MarketTable market =
      data::BuildLaggedFeatures(data::GenerateSyntheticMarket(rc.synth), rc.lags);
  walkforward::PipelineConfig p = rc.pipeline;
  p.da_lookback_days = 0;
  p.bm_lookback_days = 0;
  p.train.episodes = 20000;
  const Timestamp split = StartOfYear(2016), end = StartOfYear(2017);
  const RewardMode modes[] = {RewardMode::kRaw, RewardMode::kImitation, RewardMode::kTranched,
                              RewardMode::kTranchedImitation};
  double mean[4] = {0, 0, 0, 0};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (int m = 0; m < 4; ++m) {
      walkforward::PipelineConfig q = p;
      q.train.seed = seed;
      q.train.reward_mode = modes[m];
      const auto model = walkforward::FitModel(market, market.start(), split, q);
      mean[m] += walkforward::EvaluateModel(model, market, split, end, q).agent.pnl.total() / 5;
    }
  }
  const double taught = mean[1] - mean[0], taught_ladder = mean[3] - mean[2];
  const double tranched = mean[2] - mean[0], tranched_taught = mean[3] - mean[1];
  const bool pass = taught > 0 && taught_ladder > 0 && tranched > 0 && tranched_taught > 0;
  return {pass, Fmt("mean P&L raw %.0f, imitation %.0f, tranched %.0f, tranched-imitation %.0f; "
                    "taught margins %+.0f / %+.0f, tranched margins %+.0f / %+.0f",
                    mean[0], mean[1], mean[2], mean[3], taught, taught_ladder, tranched, tranched_taught)};
}

Outcome Criterion9() {
  std::vector<data::SynthConfig> configs(4);
  configs[0].seed = 21;
  configs[1].seed = 22;
  configs[1].price_regimes = {{0.5, 75.0, 30.0, 50.0}, {0.5, 95.0, 40.0, 80.0}};
  configs[2].seed = 23;
  configs[2].price_regimes = {{1.0, 75.0, 0.5, 20.0}};
  configs[3].seed = 24;
  configs[3].da_trend_per_year = 40;
  configs[3].days = 731;
  long hours = 0, worse = 0, differ = 0;
  for (const auto& c : configs) {
    const data::MarketTable m = data::GenerateSyntheticMarket(c);
    const PnlSeries p2 = policies::RunBenchmark(policies::BenchmarkId::kP2, m, m.start(), m.end());
    const PnlSeries p3 = policies::RunBenchmark(policies::BenchmarkId::kP3, m, m.start(), m.end());
    if (p2.size() != p3.size()) return {false, "benchmark series differ in length"};
    for (std::size_t i = 0; i < p2.size(); ++i) {
      ++hours;
      worse += p3.hourly[i] < p2.hourly[i];
      differ += p3.hourly[i] != p2.hourly[i];
    }
  }
  return {worse == 0 && differ > 0,
          Fmt("%ld hours over 4 markets, %ld with P3 < P2, %ld where the rules differ", hours, worse, differ)};
}

Outcome Criterion10() {
  Rng rng(1010);
  const int n = 4000;
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = rng.Bernoulli(0.5);
    const double c = y[i] ? 1.0 : -1.0;
    X(i, 0) = 3 * c + rng.Normal();
    X(i, 1) = -2 * c + rng.Normal();
    X(i, 2) = rng.Normal();
  }
  const auto blobs = data::FitStatePredictor(X.topRows(n / 2), y.head(n / 2), {"a", "b", "c"});
  int correct = 0;
  for (int i = n / 2; i < n; ++i) {
    const double x[] = {X(i, 0), X(i, 1), X(i, 2)};
    correct += (data::PredictStateProb(blobs.predictor, x) >= 0.5) == (y[i] == 1.0);
  }
  const double blob_acc = correct / double(n / 2);

  config::RunConfig rc;
  rc.synth.days = 731;
  const data::SyntheticMarket truth = data::GenerateSyntheticMarketWithTruth(rc.synth);
  const data::MarketTable market = data::BuildLaggedFeatures(truth.table, rc.lags);
  const Timestamp split = StartOfYear(2016), end = StartOfYear(2017);
  const auto fit = data::FitStatePredictor(market.Slice(market.start(), split), rc.pipeline.predictor_features);
  const double acc = data::PredictorAccuracy(fit.predictor, market, split, end);
  // Bayes rate of the generator's own shortage probability on the same rows.
  long labelled = 0, bayes_hits = 0;
  for (std::size_t i = 0; i < truth.table.size(); ++i) {
    const auto& r = truth.table.row(i);
    if (r.timestamp < split || r.timestamp >= end || r.regulation_state == RegulationState::kBalanced) continue;
    ++labelled;
    bayes_hits += (truth.shortage_signal_prob[i] >= 0.5) == (r.regulation_state == RegulationState::kShortage);
  }
  const double bayes = bayes_hits / double(labelled);
  return {blob_acc >= kBlobAccuracy && bayes >= kBayesFloor && acc >= kRegulationAccuracy,
          Fmt("blobs %.4f; regulation accuracy %.4f with generator Bayes rate %.4f on %ld rows",
              blob_acc, acc, bayes, labelled)};
}

Outcome Criterion11() {
  const std::vector<int> six = {2015, 2016, 2017, 2018, 2019, 2020};
  const walkforward::WalkForwardPlan plan = walkforward::BuildPlan(six, 2, 1);
  std::string labels;
  for (const auto& f : plan.folds) labels += " " + f.Label();

  config::RunConfig rc;
  rc.synth.days = 1461;
  const data::MarketTable market =
      data::BuildLaggedFeatures(data::GenerateSyntheticMarket(rc.synth), rc.lags);
  walkforward::PipelineConfig p = rc.pipeline;
  p.train.episodes = 300;
  const walkforward::WalkForwardPlan small = walkforward::BuildPlan(market.Years(), 2, 1);
  int differing = 0, folds = 0;
  for (std::size_t k = 0; k < small.folds.size(); ++k) {
    const auto& fold = small.folds[k];
    walkforward::PipelineConfig q = p;
    q.train.seed = walkforward::FoldSeed(7, k);
    const auto a = walkforward::FitModel(market, fold.train_begin(), fold.train_end(), q);
    std::vector<data::MarketRecord> rows(market.rows().begin(), market.rows().end());
    Rng rng(1100 + k);
    for (auto& r : rows) {
      if (r.timestamp < fold.test_begin()) continue;
      r.da_price += rng.Uniform(-100, 400);
      r.bm_bid_clearing -= 50;
      r.bm_ask_clearing += 250;
      r.regulation_state = rng.Bernoulli(0.5) ? RegulationState::kShortage : RegulationState::kSurplus;
      for (double& f : r.fundamentals) f = f * 3 + 1;
    }
    const data::MarketTable perturbed(market.resolution(), market.fundamental_names(), std::move(rows));
    const auto b = walkforward::FitModel(perturbed, fold.train_begin(), fold.train_end(), q);
    ++folds;
    differing += !(a.ComputeChecksums() == b.ComputeChecksums()) ||
                 a.da_agent.ParameterDump() != b.da_agent.ParameterDump() ||
                 a.bm_agent.ParameterDump() != b.bm_agent.ParameterDump();
  }
  return {plan.folds.size() == 4 && differing == 0 && folds > 0,
          Fmt("plan 2015-2020 ->%s (%zu folds); %d/%d perturbed folds changed an artifact",
              labels.c_str(), plan.folds.size(), differing, folds)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {
      Criterion1, Criterion2, Criterion3, Criterion4,  Criterion5, Criterion6,
      Criterion7, Criterion8, Criterion9, Criterion10, Criterion11};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 2;
    }
    wanted.insert(n);
  }
  if (wanted.empty()) {
    for (int n = 1; n <= static_cast<int>(criteria.size()); ++n) wanted.insert(n);
  }
  int failed = 0;
  for (int n : wanted) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("CRITERION %d %s: %s (%.1fs)\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
