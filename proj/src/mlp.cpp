#include "cvqkd/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "cvqkd/rng.hpp"

namespace cvqkd {

namespace {

constexpr std::uint32_t kSubstreamInit = 3;

// Hidden layer l (output of weight layer l) is ReLU except the last one.
inline bool relu_hidden(int l, int layer_count) { return l < layer_count - 2; }

}  // namespace

double softplus(double v) {
  if (v > 30.0) return v + std::log1p(std::exp(-v));
  return std::log1p(std::exp(v));
}

double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

std::vector<int> MlpModel::layer_dims() const {
  std::vector<int> dims;
  dims.reserve(weights.size() + 1);
  dims.push_back(static_cast<int>(weights.front().cols()));
  for (const auto& w : weights) dims.push_back(static_cast<int>(w.rows()));
  return dims;
}

int MlpModel::input_dim() const { return static_cast<int>(weights.front().cols()); }

int MlpModel::parameter_count() const {
  int p = 1;  // softplus shift
  for (std::size_t l = 0; l < weights.size(); ++l) {
    p += static_cast<int>(weights[l].size() + biases[l].size());
  }
  return p;
}

Eigen::VectorXd MlpModel::flatten() const {
  Eigen::VectorXd theta(parameter_count());
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto& w = weights[l];
    theta.segment(at, w.size()) = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
    at += w.size();
    theta.segment(at, biases[l].size()) = biases[l];
    at += biases[l].size();
  }
  theta[at] = softplus_shift;
  return theta;
}

void MlpModel::unflatten(const Eigen::Ref<const Eigen::VectorXd>& theta) {
  if (theta.size() != parameter_count()) {
    throw std::invalid_argument("MlpModel::unflatten: parameter vector has wrong length");
  }
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    auto& w = weights[l];
    Eigen::Map<Eigen::VectorXd>(w.data(), w.size()) = theta.segment(at, w.size());
    at += w.size();
    biases[l] = theta.segment(at, biases[l].size());
    at += biases[l].size();
  }
  softplus_shift = theta[at];
}

void MlpModel::validate() const {
  if (weights.empty() || weights.size() != biases.size()) {
    throw std::invalid_argument("MlpModel: inconsistent layer containers");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != biases[l].size()) {
      throw std::invalid_argument("MlpModel: bias length mismatch");
    }
    if (l + 1 < weights.size() && weights[l + 1].cols() != weights[l].rows()) {
      throw std::invalid_argument("MlpModel: layer dimension mismatch");
    }
  }
  if (weights.back().rows() != 1) {
    throw std::invalid_argument("MlpModel: output layer must be scalar");
  }
  if (!(amplification > 1.0)) {
    throw std::invalid_argument("MlpModel: amplification must be > 1");
  }
}

MlpModel make_mlp(const std::vector<int>& dims, double amplification,
                  std::uint64_t master_seed) {
  if (dims.size() < 2) throw std::invalid_argument("make_mlp: need at least two layer dims");
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("make_mlp: layer dims must be >= 1");
  }
  if (dims.back() != 1) throw std::invalid_argument("make_mlp: output dim must be 1");
  MlpModel model;
  model.amplification = amplification;
  model.softplus_shift = kDefaultSoftplusShift;
  const int layer_count = static_cast<int>(dims.size()) - 1;
  RngStream init(master_seed, 0, kSubstreamInit);
  for (int l = 0; l < layer_count; ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double gain = relu_hidden(l, layer_count) ? 2.0 : 1.0;
    const double sd = std::sqrt(gain / fan_in);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = sd * init.next_normal();
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  model.validate();
  return model;
}

ForwardPass mlp_forward_cached(const MlpModel& model,
                               const Eigen::Ref<const Eigen::VectorXd>& input) {
  if (input.size() != model.input_dim()) {
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  }
  const int layer_count = model.layer_count();
  ForwardPass fp;
  fp.pre.resize(layer_count);
  fp.post.resize(layer_count - 1);
  Eigen::VectorXd h = input;
  for (int l = 0; l < layer_count; ++l) {
    fp.pre[l].noalias() = model.weights[l] * h;
    fp.pre[l] += model.biases[l];
    if (l < layer_count - 1) {
      fp.post[l] = relu_hidden(l, layer_count) ? fp.pre[l].cwiseMax(0.0).eval() : fp.pre[l];
      h = fp.post[l];
    }
  }
  fp.z_out = fp.pre.back()[0] + model.softplus_shift;
  fp.output = softplus(fp.z_out);
  return fp;
}

double mlp_forward(const MlpModel& model, const Eigen::Ref<const Eigen::VectorXd>& input) {
  return mlp_forward_cached(model, input).output;
}

namespace {

// Backpropagation shared by Jacobian and loss modes: scale is the derivative
// of the quantity of interest with respect to the raw output.
Eigen::VectorXd backprop(const MlpModel& model, const Eigen::Ref<const Eigen::VectorXd>& input,
                         const ForwardPass& fp, double scale) {
  const int layer_count = model.layer_count();
  Eigen::VectorXd grad(model.parameter_count());

  // Segment offsets in canonical order.
  std::vector<Eigen::Index> w_at(layer_count), b_at(layer_count);
  Eigen::Index at = 0;
  for (int l = 0; l < layer_count; ++l) {
    w_at[l] = at;
    at += model.weights[l].size();
    b_at[l] = at;
    at += model.biases[l].size();
  }
  const Eigen::Index shift_at = at;

  const double dz = scale * sigmoid(fp.z_out);
  grad[shift_at] = dz;
  Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, dz);
  for (int l = layer_count - 1; l >= 0; --l) {
    const auto in_l = (l == 0) ? input : Eigen::Ref<const Eigen::VectorXd>(fp.post[l - 1]);
    auto dw = Eigen::Map<Eigen::MatrixXd>(grad.data() + w_at[l], model.weights[l].rows(),
                                          model.weights[l].cols());
    dw.noalias() = delta * in_l.transpose();
    grad.segment(b_at[l], delta.size()) = delta;
    if (l > 0) {
      Eigen::VectorXd next = model.weights[l].transpose() * delta;
      if (relu_hidden(l - 1, layer_count)) {
        next = (fp.pre[l - 1].array() > 0.0).select(next, 0.0);
      }
      delta = std::move(next);
    }
  }
  return grad;
}

}  // namespace

Eigen::VectorXd mlp_output_gradient(const MlpModel& model,
                                    const Eigen::Ref<const Eigen::VectorXd>& input) {
  const ForwardPass fp = mlp_forward_cached(model, input);
  return backprop(model, input, fp, 1.0);
}

Eigen::VectorXd mlp_loss_gradient(const MlpModel& model,
                                  const Eigen::Ref<const Eigen::VectorXd>& input,
                                  double target) {
  const ForwardPass fp = mlp_forward_cached(model, input);
  return backprop(model, input, fp, 2.0 * (fp.output - target));
}

Eigen::VectorXd mlp_forward_batch(const MlpModel& model,
                                  const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  if (inputs.rows() != model.input_dim()) {
    throw std::invalid_argument("mlp_forward_batch: input dimension mismatch");
  }
  const int layer_count = model.layer_count();
  Eigen::MatrixXd h = inputs;
  for (int l = 0; l < layer_count; ++l) {
    Eigen::MatrixXd pre = (model.weights[l] * h).colwise() + model.biases[l];
    if (l < layer_count - 1 && relu_hidden(l, layer_count)) pre = pre.cwiseMax(0.0);
    h = std::move(pre);
  }
  Eigen::VectorXd out = h.row(0).transpose();
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = softplus(out[i] + model.softplus_shift);
  }
  return out;
}

Eigen::VectorXd mlp_batch_loss_gradient(const MlpModel& model,
                                        const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                        const Eigen::Ref<const Eigen::VectorXd>& targets,
                                        double* loss_out) {
  if (inputs.rows() != model.input_dim()) {
    throw std::invalid_argument("mlp_batch_loss_gradient: input dimension mismatch");
  }
  if (inputs.cols() != targets.size() || targets.size() == 0) {
    throw std::invalid_argument("mlp_batch_loss_gradient: target count mismatch");
  }
  const int layer_count = model.layer_count();
  const Eigen::Index batch = inputs.cols();

  std::vector<Eigen::MatrixXd> pre(layer_count), post(layer_count - 1);
  Eigen::MatrixXd h = inputs;
  for (int l = 0; l < layer_count; ++l) {
    pre[l].noalias() = model.weights[l] * h;
    pre[l].colwise() += model.biases[l];
    if (l < layer_count - 1) {
      post[l] = relu_hidden(l, layer_count) ? pre[l].cwiseMax(0.0).eval() : pre[l];
      h = post[l];
    }
  }

  Eigen::ArrayXd z = pre.back().row(0).transpose().array() + model.softplus_shift;
  Eigen::ArrayXd out(batch), sig(batch);
  for (Eigen::Index i = 0; i < batch; ++i) {
    out[i] = softplus(z[i]);
    sig[i] = sigmoid(z[i]);
  }
  const Eigen::ArrayXd err = out - targets.array();
  if (loss_out != nullptr) *loss_out = err.square().mean();

  // d(batch MSE)/dz per sample.
  const Eigen::ArrayXd dz = 2.0 / static_cast<double>(batch) * err * sig;

  Eigen::VectorXd grad(model.parameter_count());
  std::vector<Eigen::Index> w_at(layer_count), b_at(layer_count);
  Eigen::Index at = 0;
  for (int l = 0; l < layer_count; ++l) {
    w_at[l] = at;
    at += model.weights[l].size();
    b_at[l] = at;
    at += model.biases[l].size();
  }
  grad[at] = dz.sum();

  Eigen::MatrixXd delta = dz.transpose().matrix();  // 1 x batch
  for (int l = layer_count - 1; l >= 0; --l) {
    const auto& in_l = (l == 0) ? inputs : Eigen::Ref<const Eigen::MatrixXd>(post[l - 1]);
    auto dw = Eigen::Map<Eigen::MatrixXd>(grad.data() + w_at[l], model.weights[l].rows(),
                                          model.weights[l].cols());
    dw.noalias() = delta * in_l.transpose();
    grad.segment(b_at[l], delta.rows()) = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd next = model.weights[l].transpose() * delta;
      if (relu_hidden(l - 1, layer_count)) {
        next = (pre[l - 1].array() > 0.0).select(next, 0.0);
      }
      delta = std::move(next);
    }
  }
  return grad;
}

double predict_sigma2(const MlpModel& model, const FeatureVector& features) {
  if (features.amplification != model.amplification) {
    throw std::invalid_argument(
        "predict_sigma2: feature amplification does not match the trained model");
  }
  const double out = mlp_forward(model, features.to_vector());
  return 1.0 + out / (model.amplification * model.amplification);
}

}  // namespace cvqkd
