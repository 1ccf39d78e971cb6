#include "cvqkd/mle.hpp"

#include <cmath>
#include <stdexcept>

#include "cvqkd/quantiles.hpp"

namespace cvqkd {

namespace {

void check_epsilon(double epsilon_pe) {
  if (!(epsilon_pe > 0.0 && epsilon_pe <= 1.0)) {
    throw std::invalid_argument("worst-case bound: epsilon_pe must lie in (0,1]");
  }
}

}  // namespace

double estimate_gain(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("estimate_gain: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("estimate_gain: need at least 2 samples");
  const double sxx = x.squaredNorm();
  if (!(sxx > 0.0)) throw std::invalid_argument("estimate_gain: degenerate input, sum x^2 = 0");
  return x.dot(y) / sxx;
}

double estimate_noise_variance(const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& y, double tau_hat) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("estimate_noise_variance: length mismatch");
  }
  if (x.size() < 2) throw std::invalid_argument("estimate_noise_variance: need >= 2 samples");
  return (y - tau_hat * x).squaredNorm() / static_cast<double>(x.size());
}

MleEstimate mle_from_moments(const SampleMoments& mo, int mu) {
  if (mu != 1 && mu != 2) throw std::invalid_argument("mle_from_moments: mu must be 1 or 2");
  if (mo.m < 2) throw std::invalid_argument("mle_from_moments: need at least 2 samples");
  if (!(mo.sum_xx > 0.0)) {
    throw std::invalid_argument("mle_from_moments: degenerate input, sum x^2 = 0");
  }
  MleEstimate est;
  est.m = mo.m;
  est.mu = mu;
  est.tau_hat = mo.sum_xy / mo.sum_xx;
  // (1/m) * sum (y - tau_hat x)^2 expanded in raw moments.
  est.sigma2_hat =
      (mo.sum_yy - 2.0 * est.tau_hat * mo.sum_xy + est.tau_hat * est.tau_hat * mo.sum_xx) /
      static_cast<double>(mo.m);
  if (est.sigma2_hat < 0.0) est.sigma2_hat = 0.0;  // roundoff guard near perfect fits
  est.t_hat = std::sqrt(static_cast<double>(mu)) * est.tau_hat;
  return est;
}

MleEstimate mle_estimate(const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& y, int mu) {
  return mle_from_moments(SampleMoments::from_samples(x, y), mu);
}

MleEstimate mle_estimate(const TrialDataset& data, int mu) {
  return mle_estimate(data.x_est(), data.y_est(), mu);
}

std::string bound_method_name(BoundMethod method) {
  return method == BoundMethod::kMle ? "mle" : "nn";
}

double worst_case_t_min(const MleEstimate& estimate, double v_a, double epsilon_pe) {
  check_epsilon(epsilon_pe);
  if (!(v_a > 0.0)) throw std::invalid_argument("worst_case_t_min: v_a must be > 0");
  if (estimate.m < 2) throw std::invalid_argument("worst_case_t_min: need m >= 2");
  if (!(estimate.sigma2_hat >= 0.0)) {
    throw std::invalid_argument("worst_case_t_min: sigma2_hat must be >= 0");
  }
  const double z = gaussian_quantile(epsilon_pe);
  const double tau_min =
      estimate.tau_hat - z * std::sqrt(estimate.sigma2_hat / (static_cast<double>(estimate.m) * v_a));
  return std::sqrt(static_cast<double>(estimate.mu)) * tau_min;
}

double worst_case_sigma2_max(const MleEstimate& estimate, double epsilon_pe) {
  check_epsilon(epsilon_pe);
  if (estimate.m < 2) throw std::invalid_argument("worst_case_sigma2_max: need m >= 2");
  if (!(estimate.sigma2_hat >= 0.0)) {
    throw std::invalid_argument("worst_case_sigma2_max: sigma2_hat must be >= 0");
  }
  const double z = gaussian_quantile(epsilon_pe);
  return estimate.sigma2_hat *
         (1.0 + z * std::sqrt(2.0) / std::sqrt(static_cast<double>(estimate.m)));
}

WorstCaseBounds mle_worst_case(const MleEstimate& estimate, double v_a, double epsilon_pe) {
  WorstCaseBounds b;
  b.t_min = worst_case_t_min(estimate, v_a, epsilon_pe);
  b.sigma2_max = worst_case_sigma2_max(estimate, epsilon_pe);
  b.epsilon_pe = epsilon_pe;
  b.method = BoundMethod::kMle;
  return b;
}

}  // namespace cvqkd
