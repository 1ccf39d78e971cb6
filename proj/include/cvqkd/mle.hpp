#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>

#include "cvqkd/channel.hpp"

namespace cvqkd {

// Maximum-likelihood fit of the per-quadrature linear model y = tau*x + z.
// tau_hat is the regression slope through the origin; t_hat = sqrt(mu)*tau_hat
// converts back to the physical gain at the key-rate boundary.
struct MleEstimate {
  double tau_hat = 0.0;
  double t_hat = 0.0;
  double sigma2_hat = 0.0;
  std::size_t m = 0;
  int mu = 1;
};

double estimate_gain(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y);

double estimate_noise_variance(const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& y, double tau_hat);

MleEstimate mle_from_moments(const SampleMoments& moments, int mu);

MleEstimate mle_estimate(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& y, int mu);

MleEstimate mle_estimate(const TrialDataset& data, int mu);

enum class BoundMethod { kMle, kNn };

std::string bound_method_name(BoundMethod method);

// One-sided confidence bounds held except with probability epsilon_pe/2 each:
// the gain bounded below, the noise variance above.
struct WorstCaseBounds {
  double t_min = 0.0;
  double sigma2_max = 0.0;
  double epsilon_pe = 0.0;
  BoundMethod method = BoundMethod::kMle;
};

// sqrt(mu) * (tau_hat - z_{eps/2} * sqrt(sigma2_hat / (m * v_a))).
double worst_case_t_min(const MleEstimate& estimate, double v_a, double epsilon_pe);

// sigma2_hat * (1 + z_{eps/2} * sqrt(2) / sqrt(m)).
double worst_case_sigma2_max(const MleEstimate& estimate, double epsilon_pe);

WorstCaseBounds mle_worst_case(const MleEstimate& estimate, double v_a, double epsilon_pe);

}  // namespace cvqkd
