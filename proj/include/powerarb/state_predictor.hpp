#ifndef POWERARB_STATE_PREDICTOR_HPP
#define POWERARB_STATE_PREDICTOR_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "powerarb/market_table.hpp"

namespace powerarb::data {

// Standardized logistic regression giving P(Shortage) for an interval.
struct StatePredictor {
  std::vector<std::string> feature_names;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stddevs;
  double bias = 0.0;

  // Throws InvalidConfig when the arrays are inconsistent.
  void Validate() const;
};

struct PredictorFitConfig {
  // <= 0 selects 1 / L, with L an upper bound on the loss curvature for standardized inputs.
  double learning_rate = 0.0;
  int iterations = 10000;
  double l2 = 1e-4;
  double tolerance = 1e-6;
};

// Design matrix with one row per labelled interval (Balanced rows are dropped);
// label 1 = Shortage, 0 = Surplus.
struct LabelledSet {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;
};

LabelledSet ExtractLabelledSet(const MarketTable& table, const std::vector<std::string>& features,
                               Timestamp begin, Timestamp end);

struct PredictorFit {
  StatePredictor predictor;
  // Regularized mean log-loss after each iteration (index 0 = initial parameters).
  std::vector<double> loss_history;
  int iterations = 0;
  double final_gradient_norm = 0.0;
};

// Batch gradient descent on the standardized, L2-regularized mean log-loss.
PredictorFit FitStatePredictor(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                               const std::vector<std::string>& names,
                               const PredictorFitConfig& config = {});
PredictorFit FitStatePredictor(const MarketTable& train, const std::vector<std::string>& features,
                               const PredictorFitConfig& config = {});

double PredictStateProb(const StatePredictor& predictor, std::span<const double> features);

// Regularized mean log-loss and its gradient with respect to (weights, bias),
// evaluated on already standardized inputs. Bias gradient is the last entry.
double LogisticLoss(const Eigen::MatrixXd& standardized, const Eigen::VectorXd& labels,
                    const Eigen::VectorXd& weights, double bias, double l2,
                    Eigen::VectorXd* gradient);

// Fraction of labelled rows in [begin, end) where (p >= threshold) matches Shortage.
double PredictorAccuracy(const StatePredictor& predictor, const MarketTable& table,
                         Timestamp begin, Timestamp end, double threshold = 0.5);

// Adds a column holding the predicted shortage probability of every row.
MarketTable WithPredictionColumn(const MarketTable& table, const StatePredictor& predictor,
                                 const std::string& column = "shortage_prob");

void WriteStatePredictor(std::ostream& out, const StatePredictor& predictor);
StatePredictor ReadStatePredictor(std::istream& in);
void SaveStatePredictor(const std::string& path, const StatePredictor& predictor);
StatePredictor LoadStatePredictor(const std::string& path);

}  // namespace powerarb::data

#endif  // POWERARB_STATE_PREDICTOR_HPP
