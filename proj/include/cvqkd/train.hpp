#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "cvqkd/mlp.hpp"

namespace cvqkd {

// AdamW: Adam moment estimates plus decoupled weight decay,
//   theta <- theta - lr*lambda*theta - lr*mhat/(sqrt(vhat)+eps).
// With zero gradients every parameter contracts by exactly (1 - lr*lambda)
// per step.
struct AdamW {
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  Eigen::VectorXd m;
  Eigen::VectorXd v;
  std::int64_t step_count = 0;

  void reset(Eigen::Index parameter_count);
  void step(Eigen::Ref<Eigen::VectorXd> theta, const Eigen::Ref<const Eigen::VectorXd>& grad);
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  int batch_size = 256;
  int epochs = 200;
  int patience = 20;           // early stop after this many epochs without val improvement
  double val_fraction = 0.1;
  double amplification = 10.0;
  std::uint64_t seed = 0;
};

struct EpochStats {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochStats> log;
  int best_epoch = 0;
  double best_val_mse = 0.0;
};

// Trains the default architecture on (features, targets); features are
// columns.  Deterministic given config.seed: initialization, shuffling and
// arithmetic order are all fixed.  Throws on divergence (non-finite loss).
TrainResult train_mlp(const Eigen::Ref<const Eigen::MatrixXd>& features,
                      const Eigen::Ref<const Eigen::VectorXd>& targets,
                      const TrainConfig& config,
                      const std::vector<int>& dims = MlpModel::default_dims());

void save_training_log(const std::vector<EpochStats>& log, const std::string& path);

}  // namespace cvqkd
