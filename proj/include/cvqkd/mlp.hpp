#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "cvqkd/features.hpp"

namespace cvqkd {

// Fully connected regressor with ReLU hidden layers except the last hidden
// layer (no activation) and a shifted-softplus output
//   y = log(1 + exp(z + shift)),
// shift learnable, initialized to 0.1.  Default shape 6-32-64-32-1 carries
// exactly 4450 trainable parameters including the shift.
//
// Canonical parameter order (flatten/unflatten, Jacobians, serialization):
// for each weight layer l: W_l column-major, then bias_l; softplus shift last.
inline constexpr char kParameterOrderingId[] = "layer-major;W-colmajor;bias;shift-last;v1";
inline constexpr double kDefaultSoftplusShift = 0.1;

class MlpModel {
 public:
  std::vector<Eigen::MatrixXd> weights;  // W_l: dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> biases;   // b_l: dims[l+1]
  double softplus_shift = kDefaultSoftplusShift;
  double amplification = 10.0;

  static std::vector<int> default_dims() { return {6, 32, 64, 32, 1}; }

  std::vector<int> layer_dims() const;
  int input_dim() const;
  int layer_count() const { return static_cast<int>(weights.size()); }
  int parameter_count() const;

  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::Ref<const Eigen::VectorXd>& theta);

  void validate() const;
};

// He/Xavier initialization from a dedicated substream of master_seed;
// biases start at zero, the softplus shift at 0.1.
MlpModel make_mlp(const std::vector<int>& dims, double amplification,
                  std::uint64_t master_seed);

struct ForwardPass {
  std::vector<Eigen::VectorXd> pre;   // pre-activations per weight layer
  std::vector<Eigen::VectorXd> post;  // activations fed to the next layer
  double z_out = 0.0;                 // scalar pre-activation incl. shift
  double output = 0.0;
};

double mlp_forward(const MlpModel& model, const Eigen::Ref<const Eigen::VectorXd>& input);
ForwardPass mlp_forward_cached(const MlpModel& model,
                               const Eigen::Ref<const Eigen::VectorXd>& input);

// Gradient of the raw scalar output with respect to every parameter,
// in canonical order ("Jacobian mode").
Eigen::VectorXd mlp_output_gradient(const MlpModel& model,
                                    const Eigen::Ref<const Eigen::VectorXd>& input);

// Gradient of the squared error (output - target)^2.
Eigen::VectorXd mlp_loss_gradient(const MlpModel& model,
                                  const Eigen::Ref<const Eigen::VectorXd>& input,
                                  double target);

// Batched mean-squared-error pass used by the trainer: inputs are columns.
// Returns the gradient of mean_i (out_i - target_i)^2; loss_out receives the
// batch MSE.  Equals the average of per-sample loss gradients.
Eigen::VectorXd mlp_batch_loss_gradient(const MlpModel& model,
                                        const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                        const Eigen::Ref<const Eigen::VectorXd>& targets,
                                        double* loss_out);

Eigen::VectorXd mlp_forward_batch(const MlpModel& model,
                                  const Eigen::Ref<const Eigen::MatrixXd>& inputs);

// sigma2 point estimate from a trained model: 1 + output / a^2.
double predict_sigma2(const MlpModel& model, const FeatureVector& features);

double softplus(double v);
double sigmoid(double v);

}  // namespace cvqkd
