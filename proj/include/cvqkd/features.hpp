#pragma once

#include <Eigen/Core>

#include "cvqkd/channel.hpp"

namespace cvqkd {

// Six summary statistics of one disclosed block, computed after the
// residual transform y' = y - tau_hat*x + (tau_hat/a)*x.  The amplification
// a > 1 rescales the weak excess-noise signal into the network's working
// range: in expectation amplified_noise = tau_hat^2*v_a + a^2*t^2*xi.
struct FeatureVector {
  double tau_hat_mle = 0.0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;
  double amplified_noise = 0.0;
  double cov_x_yprime = 0.0;
  double amplification = 0.0;

  Eigen::Matrix<double, 6, 1> to_vector() const;
};

FeatureVector features_from_moments(const SampleMoments& moments, double amplification);

FeatureVector extract_features(const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& y,
                               double amplification);

}  // namespace cvqkd
