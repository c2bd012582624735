#include "powerarb/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "powerarb/error.hpp"

namespace powerarb::rl {
namespace {

void WriteVector(std::ostream& out, const VectorXd& v) {
  char buf[32];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", v(i));
    out << (i ? " " : "") << buf;
  }
  out << '\n';
}

VectorXd ReadVector(std::istream& in, Eigen::Index n) {
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::string token;
    if (!(in >> token)) throw Error(ErrorCode::kParseError, "truncated parameter block");
    v(i) = std::stod(token);
  }
  return v;
}

std::string ExpectKey(std::istream& in, const char* key) {
  std::string token;
  if (!(in >> token) || token != key) {
    throw Error(ErrorCode::kParseError, std::string("expected '") + key + "', got '" + token + "'",
                key);
  }
  return token;
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes, OutputActivation output)
    : sizes_(std::move(layer_sizes)), output_(output) {
  if (output_ == OutputActivation::kBoundedSquash) {
    throw Error(ErrorCode::kInvalidConfig, "bounded outputs need explicit bounds");
  }
  Layout();
}

Mlp::Mlp(std::vector<int> layer_sizes, VectorXd low, VectorXd high)
    : sizes_(std::move(layer_sizes)),
      output_(OutputActivation::kBoundedSquash),
      low_(std::move(low)),
      high_(std::move(high)) {
  Layout();
  if (low_.size() != output_size() || high_.size() != output_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "bounds do not match the output size");
  }
  if (!((high_.array() > low_.array()).all())) {
    throw Error(ErrorCode::kInvalidConfig, "bounds need low < high");
  }
}

void Mlp::Layout() {
  if (sizes_.size() < 2) throw Error(ErrorCode::kInvalidConfig, "network needs at least two layers");
  Eigen::Index offset = 0;
  weight_offset_.clear();
  bias_offset_.clear();
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) {
      throw Error(ErrorCode::kInvalidConfig, "layer sizes must be positive");
    }
    weight_offset_.push_back(offset);
    offset += static_cast<Eigen::Index>(sizes_[l]) * sizes_[l + 1];
    bias_offset_.push_back(offset);
    offset += sizes_[l + 1];
  }
  params_ = VectorXd::Zero(offset);
}

void Mlp::Initialize(Rng& rng, double final_scale) {
  for (int l = 0; l < num_layers(); ++l) {
    const double bound = (l + 1 == num_layers()) ? final_scale : 1.0 / std::sqrt(sizes_[l]);
    const Eigen::Index end = bias_offset_[l] + sizes_[l + 1];
    for (Eigen::Index i = weight_offset_[l]; i < end; ++i) params_(i) = rng.Uniform(-bound, bound);
  }
}

Eigen::Map<const MatrixXd> Mlp::Weights(int layer) const {
  return {params_.data() + weight_offset_[layer], sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<const VectorXd> Mlp::Bias(int layer) const {
  return {params_.data() + bias_offset_[layer], sizes_[layer + 1]};
}

void Mlp::CheckInput(Eigen::Index rows) const {
  if (rows != input_size()) {
    throw Error(ErrorCode::kDimensionMismatch, "input has " + std::to_string(rows) +
                                                   " entries, network expects " +
                                                   std::to_string(input_size()));
  }
}

VectorXd Mlp::ForwardRaw(const VectorXd& x) const {
  CheckInput(x.size());
  VectorXd h = x;
  for (int l = 0; l < num_layers(); ++l) {
    VectorXd z = Weights(l) * h + Bias(l);
    h = (l + 1 < num_layers()) ? VectorXd(z.cwiseMax(0.0)) : z;
  }
  return h;
}

VectorXd Mlp::Squash(const VectorXd& raw) const {
  if (output_ == OutputActivation::kLinear) return raw;
  return low_.array() + (high_ - low_).array() * (raw.array().tanh() + 1.0) * 0.5;
}

VectorXd Mlp::Forward(const VectorXd& x) const { return Squash(ForwardRaw(x)); }

MatrixXd Mlp::ForwardBatch(const MatrixXd& x, Cache* cache) const {
  CheckInput(x.rows());
  if (cache) cache->activations.assign(1, x);
  MatrixXd h = x;
  for (int l = 0; l < num_layers(); ++l) {
    MatrixXd z = Weights(l) * h;
    z.colwise() += Bias(l);
    if (l + 1 < num_layers()) {
      h = z.cwiseMax(0.0);
      if (cache) cache->activations.push_back(h);
    } else {
      h = std::move(z);
    }
  }
  MatrixXd out = h;
  if (output_ == OutputActivation::kBoundedSquash) {
    const Eigen::ArrayXd half = 0.5 * (high_ - low_).array();
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out.col(j) = low_.array() + half * (h.col(j).array().tanh() + 1.0);
    }
  }
  if (cache) {
    cache->raw_output = std::move(h);
    cache->output = out;
  }
  return out;
}

void Mlp::Backward(const Cache& cache, const MatrixXd& d_output, VectorXd* param_grad,
                   MatrixXd* input_grad, const MatrixXd* d_raw) const {
  if (d_output.rows() != output_size() || d_output.cols() != cache.raw_output.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "output gradient has the wrong shape");
  }
  if (param_grad && param_grad->size() != params_.size()) *param_grad = VectorXd::Zero(params_.size());

  MatrixXd delta = d_output;
  if (output_ == OutputActivation::kBoundedSquash) {
    const Eigen::ArrayXd half = 0.5 * (high_ - low_).array();
    for (Eigen::Index j = 0; j < delta.cols(); ++j) {
      const Eigen::ArrayXd t = cache.raw_output.col(j).array().tanh();
      delta.col(j).array() *= half * (1.0 - t * t);
    }
  }
  if (d_raw) {
    if (d_raw->rows() != delta.rows() || d_raw->cols() != delta.cols()) {
      throw Error(ErrorCode::kDimensionMismatch, "raw gradient has the wrong shape");
    }
    delta += *d_raw;
  }
  for (int l = num_layers() - 1; l >= 0; --l) {
    const MatrixXd& input = cache.activations[l];
    if (param_grad) {
      Eigen::Map<MatrixXd> gw(param_grad->data() + weight_offset_[l], sizes_[l + 1], sizes_[l]);
      Eigen::Map<VectorXd> gb(param_grad->data() + bias_offset_[l], sizes_[l + 1]);
      gw.noalias() += delta * input.transpose();
      gb += delta.rowwise().sum();
    }
    if (l == 0 && !input_grad) break;
    MatrixXd back = Weights(l).transpose() * delta;
    if (l > 0) {
      // ReLU subgradient is 0 at 0; activations equal max(z, 0).
      delta = back.cwiseProduct((input.array() > 0.0).cast<double>().matrix());
    } else {
      *input_grad = std::move(back);
    }
  }
}

bool Mlp::SameShape(const Mlp& other) const {
  return sizes_ == other.sizes_ && output_ == other.output_;
}

void Mlp::Write(std::ostream& out) const {
  out << "mlp " << sizes_.size();
  for (int s : sizes_) out << ' ' << s;
  out << '\n';
  out << "output " << (output_ == OutputActivation::kLinear ? "linear" : "squash") << '\n';
  if (output_ == OutputActivation::kBoundedSquash) {
    out << "low ";
    WriteVector(out, low_);
    out << "high ";
    WriteVector(out, high_);
  }
  out << "params " << params_.size() << '\n';
  WriteVector(out, params_);
}

Mlp Mlp::Read(std::istream& in) {
  ExpectKey(in, "mlp");
  std::size_t n = 0;
  in >> n;
  std::vector<int> sizes(n);
  for (auto& s : sizes) in >> s;
  ExpectKey(in, "output");
  std::string kind;
  in >> kind;
  Mlp net;
  if (kind == "linear") {
    net = Mlp(sizes);
  } else if (kind == "squash") {
    ExpectKey(in, "low");
    VectorXd low = ReadVector(in, sizes.back());
    ExpectKey(in, "high");
    VectorXd high = ReadVector(in, sizes.back());
    net = Mlp(sizes, low, high);
  } else {
    throw Error(ErrorCode::kParseError, "unknown output activation '" + kind + "'", kind);
  }
  ExpectKey(in, "params");
  Eigen::Index count = 0;
  in >> count;
  if (!in || count != net.num_parameters()) {
    throw Error(ErrorCode::kShapeMismatch, "parameter count does not match the header");
  }
  net.params_ = ReadVector(in, count);
  return net;
}

LossAndGradient SquaredLossGradient(const Mlp& net, const MatrixXd& x, const MatrixXd& targets) {
  if (x.cols() == 0) throw Error(ErrorCode::kInvalidConfig, "empty batch");
  if (targets.rows() != net.output_size() || targets.cols() != x.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "targets do not match the batch");
  }
  Mlp::Cache cache;
  const MatrixXd y = net.ForwardBatch(x, &cache);
  const MatrixXd diff = y - targets;
  const double n = static_cast<double>(x.cols());
  LossAndGradient out;
  out.loss = diff.squaredNorm() / n;
  if (!std::isfinite(out.loss)) throw Error(ErrorCode::kNonFiniteLoss, "squared loss is not finite");
  net.Backward(cache, (2.0 / n) * diff, &out.gradient);
  return out;
}

Adam::Adam(double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidConfig, "learning rate must be positive");
}

void Adam::Step(VectorXd& params, const VectorXd& gradient) {
  if (gradient.size() != params.size()) {
    throw Error(ErrorCode::kShapeMismatch, "gradient and parameters differ in size");
  }
  if (m_.size() != params.size()) {
    m_ = VectorXd::Zero(params.size());
    v_ = VectorXd::Zero(params.size());
    step_ = 0;
  }
  ++step_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * gradient;
  v_ = beta2_ * v_ + (1.0 - beta2_) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

void Adam::Write(std::ostream& out) const {
  out << "adam " << step_ << ' ' << m_.size() << '\n';
  WriteVector(out, m_);
  WriteVector(out, v_);
}

void Adam::Read(std::istream& in) {
  ExpectKey(in, "adam");
  Eigen::Index n = 0;
  in >> step_ >> n;
  m_ = ReadVector(in, n);
  v_ = ReadVector(in, n);
}

void SoftUpdate(Mlp& target, const Mlp& source, double tau) {
  if (!target.SameShape(source)) throw Error(ErrorCode::kShapeMismatch, "networks differ in shape");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "tau must lie in [0, 1]");
  target.parameters() = tau * source.parameters() + (1.0 - tau) * target.parameters();
}

}  // namespace powerarb::rl
