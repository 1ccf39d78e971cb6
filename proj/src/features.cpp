#include "cvqkd/features.hpp"

#include <stdexcept>

namespace cvqkd {

Eigen::Matrix<double, 6, 1> FeatureVector::to_vector() const {
  Eigen::Matrix<double, 6, 1> v;
  v << tau_hat_mle, mean_x, mean_y, var_x, amplified_noise, cov_x_yprime;
  return v;
}

FeatureVector features_from_moments(const SampleMoments& mo, double amplification) {
  if (mo.m < 3) throw std::invalid_argument("extract_features: need at least 3 samples");
  if (!(amplification > 1.0)) {
    throw std::invalid_argument("extract_features: amplification must be > 1");
  }
  if (!(mo.sum_xx > 0.0)) {
    throw std::invalid_argument("extract_features: degenerate input, sum x^2 = 0");
  }
  const double m = static_cast<double>(mo.m);
  const double var_x = (mo.sum_xx - mo.sum_x * mo.sum_x / m) / (m - 1.0);
  if (!(var_x > 0.0)) {
    throw std::invalid_argument("extract_features: degenerate input, Var(x) = 0");
  }
  const double tau_hat = mo.sum_xy / mo.sum_xx;
  // y' = y - kappa*x with kappa = tau_hat*(1 - 1/a); raw-moment algebra below.
  const double kappa = tau_hat * (1.0 - 1.0 / amplification);
  const double sum_yp = mo.sum_y - kappa * mo.sum_x;
  const double sum_ypyp = mo.sum_yy - 2.0 * kappa * mo.sum_xy + kappa * kappa * mo.sum_xx;
  const double sum_xyp = mo.sum_xy - kappa * mo.sum_xx;
  const double var_yp = (sum_ypyp - sum_yp * sum_yp / m) / (m - 1.0);
  const double cov_x_yp = (sum_xyp - mo.sum_x * sum_yp / m) / (m - 1.0);

  FeatureVector f;
  f.tau_hat_mle = tau_hat;
  f.mean_x = mo.sum_x / m;
  f.mean_y = mo.sum_y / m;
  f.var_x = var_x;
  f.amplified_noise = amplification * amplification * (var_yp - 1.0);
  f.cov_x_yprime = cov_x_yp;
  f.amplification = amplification;
  return f;
}

FeatureVector extract_features(const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& y,
                               double amplification) {
  return features_from_moments(SampleMoments::from_samples(x, y), amplification);
}

}  // namespace cvqkd
