#ifndef POWERARB_MLP_HPP
#define POWERARB_MLP_HPP

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "powerarb/rng.hpp"

namespace powerarb::rl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class OutputActivation { kLinear, kBoundedSquash };

// Fully connected network with ReLU hidden layers. All weights and biases
// live in one flat vector; layer l stores W_l (column-major, out x in) then b_l.
// Batches are column-major: one sample per column.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> layer_sizes, OutputActivation output = OutputActivation::kLinear);
  Mlp(std::vector<int> layer_sizes, VectorXd low, VectorXd high);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  OutputActivation output_activation() const { return output_; }
  const VectorXd& low() const { return low_; }
  const VectorXd& high() const { return high_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  Eigen::Index num_parameters() const { return params_.size(); }

  VectorXd& parameters() { return params_; }
  const VectorXd& parameters() const { return params_; }

  // Hidden layers uniform in +-1/sqrt(fan_in); the last layer in +-final_scale.
  void Initialize(Rng& rng, double final_scale = 3e-3);

  Eigen::Map<const MatrixXd> Weights(int layer) const;
  Eigen::Map<const VectorXd> Bias(int layer) const;

  // Output before the squash; identical to Forward for linear outputs.
  VectorXd ForwardRaw(const VectorXd& x) const;
  VectorXd Forward(const VectorXd& x) const;
  VectorXd Squash(const VectorXd& raw) const;

  struct Cache {
    std::vector<MatrixXd> activations;  // input, then each post-ReLU hidden layer
    MatrixXd raw_output;
    MatrixXd output;
  };
  MatrixXd ForwardBatch(const MatrixXd& x, Cache* cache = nullptr) const;

  // Accumulates dL/dtheta into *param_grad (sized on first use) and writes
  // dL/dx to *input_grad when non-null. `d_output` is dL/d(activated output);
  // `d_raw`, when given, is added after the squash derivative.
  void Backward(const Cache& cache, const MatrixXd& d_output, VectorXd* param_grad,
                MatrixXd* input_grad = nullptr, const MatrixXd* d_raw = nullptr) const;

  bool SameShape(const Mlp& other) const;

  void Write(std::ostream& out) const;
  static Mlp Read(std::istream& in);

 private:
  void Layout();
  void CheckInput(Eigen::Index rows) const;

  std::vector<int> sizes_;
  OutputActivation output_ = OutputActivation::kLinear;
  VectorXd low_, high_;
  VectorXd params_;
  std::vector<Eigen::Index> weight_offset_;
  std::vector<Eigen::Index> bias_offset_;
};

struct LossAndGradient {
  double loss = 0.0;
  VectorXd gradient;
};

// Mean over samples of the squared error summed over outputs.
LossAndGradient SquaredLossGradient(const Mlp& net, const MatrixXd& x, const MatrixXd& targets);

class Adam {
 public:
  explicit Adam(double learning_rate = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);

  double learning_rate() const { return lr_; }
  // Descends: params -= lr * mhat / (sqrt(vhat) + eps).
  void Step(VectorXd& params, const VectorXd& gradient);

  void Write(std::ostream& out) const;
  void Read(std::istream& in);

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  VectorXd m_, v_;
};

// target <- tau * source + (1 - tau) * target.
void SoftUpdate(Mlp& target, const Mlp& source, double tau);

}  // namespace powerarb::rl

#endif  // POWERARB_MLP_HPP
