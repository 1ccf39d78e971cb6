#include "cvqkd/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cvqkd/rng.hpp"

namespace cvqkd {

namespace {

constexpr std::uint32_t kSubstreamShuffle = 4;

double mse_over(const MlpModel& model, const Eigen::Ref<const Eigen::MatrixXd>& features,
                const std::vector<int>& idx, Eigen::Index begin, Eigen::Index end,
                const Eigen::Ref<const Eigen::VectorXd>& targets) {
  double acc = 0.0;
  Eigen::MatrixXd block(features.rows(), end - begin);
  Eigen::VectorXd tgt(end - begin);
  for (Eigen::Index i = begin; i < end; ++i) {
    block.col(i - begin) = features.col(idx[static_cast<std::size_t>(i)]);
    tgt[i - begin] = targets[idx[static_cast<std::size_t>(i)]];
  }
  const Eigen::VectorXd out = mlp_forward_batch(model, block);
  acc = (out - tgt).squaredNorm();
  return acc / static_cast<double>(end - begin);
}

}  // namespace

void AdamW::reset(Eigen::Index parameter_count) {
  m = Eigen::VectorXd::Zero(parameter_count);
  v = Eigen::VectorXd::Zero(parameter_count);
  step_count = 0;
}

void AdamW::step(Eigen::Ref<Eigen::VectorXd> theta,
                 const Eigen::Ref<const Eigen::VectorXd>& grad) {
  if (theta.size() != m.size() || grad.size() != m.size()) {
    throw std::invalid_argument("AdamW::step: state/parameter size mismatch");
  }
  ++step_count;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  // Decoupled decay first, then the Adam step.
  theta *= (1.0 - learning_rate * weight_decay);
  theta -= learning_rate *
           ((m / bc1).array() / ((v / bc2).array().sqrt() + eps)).matrix();
}

TrainResult train_mlp(const Eigen::Ref<const Eigen::MatrixXd>& features,
                      const Eigen::Ref<const Eigen::VectorXd>& targets,
                      const TrainConfig& config, const std::vector<int>& dims) {
  const Eigen::Index n = features.cols();
  if (n != targets.size()) throw std::invalid_argument("train_mlp: target count mismatch");
  if (n < 4) throw std::invalid_argument("train_mlp: need at least 4 samples");
  if (config.batch_size < 1) throw std::invalid_argument("train_mlp: batch_size must be >= 1");
  if (config.epochs < 1) throw std::invalid_argument("train_mlp: epochs must be >= 1");
  if (!(config.val_fraction > 0.0 && config.val_fraction < 1.0)) {
    throw std::invalid_argument("train_mlp: val_fraction must lie in (0,1)");
  }

  const Eigen::Index n_val =
      std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(config.val_fraction * n)));
  const Eigen::Index n_train = n - n_val;
  if (n_train < 1) throw std::invalid_argument("train_mlp: empty training split");

  MlpModel model = make_mlp(dims, config.amplification, config.seed);
  if (features.rows() != model.input_dim()) {
    throw std::invalid_argument("train_mlp: feature dimension mismatch");
  }

  Eigen::VectorXd theta = model.flatten();
  AdamW opt;
  opt.learning_rate = config.learning_rate;
  opt.weight_decay = config.weight_decay;
  opt.reset(theta.size());

  std::vector<int> train_idx(static_cast<std::size_t>(n_train));
  std::iota(train_idx.begin(), train_idx.end(), 0);
  std::vector<int> val_idx(static_cast<std::size_t>(n_val));
  std::iota(val_idx.begin(), val_idx.end(), static_cast<int>(n_train));

  RngStream shuffle_stream(config.seed, 0, kSubstreamShuffle);

  TrainResult result;
  Eigen::VectorXd best_theta = theta;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = 0;

  Eigen::MatrixXd batch(features.rows(), config.batch_size);
  Eigen::VectorXd batch_tgt(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    // Fisher-Yates from the dedicated substream.
    for (std::size_t i = train_idx.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(shuffle_stream.next_u64() % i);
      std::swap(train_idx[i - 1], train_idx[j]);
    }

    double epoch_loss = 0.0;
    Eigen::Index seen = 0;
    for (Eigen::Index start = 0; start < n_train; start += config.batch_size) {
      const Eigen::Index count = std::min<Eigen::Index>(config.batch_size, n_train - start);
      for (Eigen::Index k = 0; k < count; ++k) {
        batch.col(k) = features.col(train_idx[static_cast<std::size_t>(start + k)]);
        batch_tgt[k] = targets[train_idx[static_cast<std::size_t>(start + k)]];
      }
      double loss = 0.0;
      const Eigen::VectorXd grad = mlp_batch_loss_gradient(
          model, batch.leftCols(count), batch_tgt.head(count), &loss);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("train_mlp: training diverged (non-finite loss)");
      }
      epoch_loss += loss * static_cast<double>(count);
      seen += count;
      opt.step(theta, grad);
      model.unflatten(theta);
    }

    const double train_mse = epoch_loss / static_cast<double>(seen);
    const double val_mse = mse_over(model, features, val_idx, 0, n_val, targets);
    if (!std::isfinite(val_mse)) {
      throw std::runtime_error("train_mlp: training diverged (non-finite validation loss)");
    }
    result.log.push_back(EpochStats{epoch, train_mse, val_mse});

    if (val_mse < best_val) {
      best_val = val_mse;
      best_epoch = epoch;
      best_theta = theta;
    } else if (epoch - best_epoch >= config.patience) {
      break;
    }
  }

  model.unflatten(best_theta);
  result.model = std::move(model);
  result.best_epoch = best_epoch;
  result.best_val_mse = best_val;
  return result;
}

void save_training_log(const std::vector<EpochStats>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_training_log: cannot open " + path);
  out << "epoch,train_mse,val_mse\n";
  char line[96];
  for (const auto& e : log) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", e.epoch, e.train_mse, e.val_mse);
    out << line;
  }
}

}  // namespace cvqkd
