#include "powerarb/state_predictor.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "powerarb/error.hpp"

namespace powerarb::data {
namespace {

double Sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double Softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

void StatePredictor::Validate() const {
  const std::size_t d = feature_names.size();
  if (weights.size() != d || means.size() != d || stddevs.size() != d) {
    throw Error(ErrorCode::kInvalidConfig, "predictor arrays differ in length");
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (!(stddevs[i] > 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "stddev must be > 0", feature_names[i]);
    }
  }
}

LabelledSet ExtractLabelledSet(const MarketTable& table, const std::vector<std::string>& features,
                               Timestamp begin, Timestamp end) {
  std::vector<FeatureRef> refs;
  for (const auto& f : features) refs.push_back(table.Resolve(f));
  std::vector<std::size_t> keep;
  const auto rows = table.rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].timestamp < begin || rows[i].timestamp >= end) continue;
    if (rows[i].regulation_state == RegulationState::kBalanced) continue;
    keep.push_back(i);
  }
  LabelledSet set{Eigen::MatrixXd(static_cast<Eigen::Index>(keep.size()),
                                  static_cast<Eigen::Index>(refs.size())),
                  Eigen::VectorXd(static_cast<Eigen::Index>(keep.size()))};
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const MarketRecord& r = rows[keep[k]];
    for (std::size_t j = 0; j < refs.size(); ++j) {
      const double v = refs[j].Of(r);
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNonFiniteFeature,
                    "non-finite '" + features[j] + "' at " + FormatIso8601(r.timestamp),
                    features[j]);
      }
      set.features(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = v;
    }
    set.labels(static_cast<Eigen::Index>(k)) =
        r.regulation_state == RegulationState::kShortage ? 1.0 : 0.0;
  }
  return set;
}

double LogisticLoss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                    double bias, double l2, Eigen::VectorXd* gradient) {
  const Eigen::Index n = x.rows();
  const Eigen::VectorXd z = (x * w).array() + bias;
  double loss = 0.0;
  Eigen::VectorXd residual(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // -[y log s + (1-y) log(1-s)] = softplus(z) - y z
    loss += Softplus(z(i)) - y(i) * z(i);
    residual(i) = Sigmoid(z(i)) - y(i);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss = loss * inv_n + 0.5 * l2 * w.squaredNorm();
  if (gradient) {
    gradient->resize(w.size() + 1);
    gradient->head(w.size()) = (x.transpose() * residual) * inv_n + l2 * w;
    (*gradient)(w.size()) = residual.sum() * inv_n;
  }
  return loss;
}

PredictorFit FitStatePredictor(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                               const std::vector<std::string>& names,
                               const PredictorFitConfig& config) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (static_cast<std::size_t>(d) != names.size() || labels.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "features, labels and names disagree");
  }
  if (n == 0) throw Error(ErrorCode::kDegenerateLabels, "no labelled rows");
  if (!features.allFinite()) throw Error(ErrorCode::kNonFiniteFeature, "non-finite feature value");
  const double positives = labels.sum();
  if (positives <= 0.0 || positives >= static_cast<double>(n)) {
    throw Error(ErrorCode::kDegenerateLabels, "labels contain a single class");
  }

  PredictorFit fit;
  StatePredictor& p = fit.predictor;
  p.feature_names = names;
  p.means.resize(d);
  p.stddevs.resize(d);
  Eigen::MatrixXd x = features;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double mean = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - mean).square().mean());
    p.means[j] = mean;
    p.stddevs[j] = sd > 1e-12 ? sd : 1.0;
    x.col(j) = (x.col(j).array() - mean) / p.stddevs[j];
  }

  // Hessian of the mean log-loss is bounded by X'X / (4n) (+ l2); for
  // standardized columns plus the intercept its trace is at most d + 1.
  const double lipschitz = 0.25 * static_cast<double>(d + 1) + config.l2;
  const double lr = config.learning_rate > 0.0 ? config.learning_rate : 1.0 / lipschitz;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  Eigen::VectorXd grad;
  double loss = LogisticLoss(x, labels, w, b, config.l2, &grad);
  fit.loss_history.push_back(loss);
  int it = 0;
  for (; it < config.iterations && grad.norm() >= config.tolerance; ++it) {
    w -= lr * grad.head(d);
    b -= lr * grad(d);
    loss = LogisticLoss(x, labels, w, b, config.l2, &grad);
    fit.loss_history.push_back(loss);
  }
  fit.iterations = it;
  fit.final_gradient_norm = grad.norm();
  p.weights.assign(w.data(), w.data() + d);
  p.bias = b;
  return fit;
}

PredictorFit FitStatePredictor(const MarketTable& train, const std::vector<std::string>& features,
                               const PredictorFitConfig& config) {
  const LabelledSet set = ExtractLabelledSet(train, features, train.start(), train.end());
  return FitStatePredictor(set.features, set.labels, features, config);
}

double PredictStateProb(const StatePredictor& p, std::span<const double> x) {
  if (x.size() != p.weights.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "predictor expects " + std::to_string(p.weights.size()) + " features, got " +
                    std::to_string(x.size()));
  }
  double z = p.bias;
  for (std::size_t i = 0; i < x.size(); ++i) z += p.weights[i] * (x[i] - p.means[i]) / p.stddevs[i];
  return Sigmoid(z);
}

double PredictorAccuracy(const StatePredictor& predictor, const MarketTable& table,
                         Timestamp begin, Timestamp end, double threshold) {
  const LabelledSet set = ExtractLabelledSet(table, predictor.feature_names, begin, end);
  if (set.labels.size() == 0) return 0.0;
  std::size_t correct = 0;
  std::vector<double> row(predictor.feature_names.size());
  for (Eigen::Index i = 0; i < set.features.rows(); ++i) {
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = set.features(i, static_cast<Eigen::Index>(j));
    const bool call = PredictStateProb(predictor, row) >= threshold;
    if (call == (set.labels(i) > 0.5)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.labels.size());
}

MarketTable WithPredictionColumn(const MarketTable& table, const StatePredictor& predictor,
                                 const std::string& column) {
  std::vector<FeatureRef> refs;
  for (const auto& f : predictor.feature_names) refs.push_back(table.Resolve(f));
  std::vector<double> values;
  values.reserve(table.size());
  std::vector<double> x(refs.size());
  for (const auto& r : table.rows()) {
    for (std::size_t j = 0; j < refs.size(); ++j) x[j] = refs[j].Of(r);
    values.push_back(PredictStateProb(predictor, x));
  }
  return table.WithColumn(column, values);
}

void WriteStatePredictor(std::ostream& out, const StatePredictor& p) {
  p.Validate();
  char buf[96];
  out << "# state predictor: P(shortage) = sigmoid(bias + sum weight * (x - mean) / std)\n";
  std::snprintf(buf, sizeof(buf), "%.17g", p.bias);
  out << "bias " << buf << '\n';
  for (std::size_t i = 0; i < p.feature_names.size(); ++i) {
    std::snprintf(buf, sizeof(buf), " %.17g %.17g %.17g", p.weights[i], p.means[i], p.stddevs[i]);
    out << "feature " << p.feature_names[i] << buf << '\n';
  }
}

StatePredictor ReadStatePredictor(std::istream& in) {
  StatePredictor p;
  bool have_bias = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "bias") {
      if (!(ls >> p.bias)) throw Error(ErrorCode::kParseError, "bad bias line", line);
      have_bias = true;
    } else if (key == "feature") {
      std::string name;
      double w = 0.0, m = 0.0, s = 0.0;
      if (!(ls >> name >> w >> m >> s)) throw Error(ErrorCode::kParseError, "bad feature line", line);
      p.feature_names.push_back(name);
      p.weights.push_back(w);
      p.means.push_back(m);
      p.stddevs.push_back(s);
    } else {
      throw Error(ErrorCode::kUnknownKey, "unknown predictor key '" + key + "'", key);
    }
  }
  if (!have_bias) throw Error(ErrorCode::kParseError, "predictor file has no bias");
  p.Validate();
  return p;
}

void SaveStatePredictor(const std::string& path, const StatePredictor& predictor) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'", path);
  WriteStatePredictor(out, predictor);
}

StatePredictor LoadStatePredictor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'", path);
  return ReadStatePredictor(in);
}

}  // namespace powerarb::data
