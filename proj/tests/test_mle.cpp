#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

#include "cvqkd/channel.hpp"
#include "cvqkd/mle.hpp"
#include "cvqkd/quantiles.hpp"
#include "doctest.h"

using namespace cvqkd;

TEST_CASE("slope on exact linear data") {
  Eigen::VectorXd x(5);
  x << -2, -1, 0.5, 1, 3;
  CHECK(estimate_gain(x, (2.0 * x).eval()) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(estimate_gain(x, (-x).eval()) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(estimate_noise_variance(x, (0.7 * x).eval(), 0.7) == doctest::Approx(0.0).scale(1.0));

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(5);
  CHECK_THROWS_AS(estimate_gain(zero, x), std::invalid_argument);
  Eigen::VectorXd short_x(1);
  short_x << 1.0;
  CHECK_THROWS_AS(estimate_gain(short_x, short_x), std::invalid_argument);
}

TEST_CASE("constant offset shows up as c^2 when x is balanced") {
  // Sum x = 0 keeps tau_hat at tau, so every residual equals c.
  Eigen::VectorXd x(4);
  x << -2, -1, 1, 2;
  const double c = 0.3;
  const Eigen::VectorXd y = 0.9 * x + Eigen::VectorXd::Constant(4, c);
  const double tau_hat = estimate_gain(x, y);
  CHECK(tau_hat == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(estimate_noise_variance(x, y, tau_hat) == doctest::Approx(c * c).epsilon(1e-12));
}

TEST_CASE("moment path equals the vector path bit for bit") {
  const ChannelParams p = ChannelParams::from_transmittance(5.0, 0.01, 0.8, 0.2, 2);
  const TrialDataset d = make_trial(p, 4000, 0.5, 5150, 2);
  const MleEstimate a = mle_estimate(d, 2);
  const MleEstimate b = mle_from_moments(SampleMoments::from_samples(d.x_est(), d.y_est()), 2);
  CHECK(a.tau_hat == b.tau_hat);
  CHECK(a.sigma2_hat == b.sigma2_hat);
  CHECK(a.t_hat == doctest::Approx(std::sqrt(2.0) * a.tau_hat).epsilon(1e-15));
  CHECK(a.m == 2000);
}

TEST_CASE("estimates land inside their own sampling bands") {
  // tau = 0.316..., sigma2 = 1.001, v_a = 5, m = 1e6, one quadrature.
  const ChannelParams p = ChannelParams::from_transmittance(5.0, 0.01, 0.8, 0.1, 1);
  const double tau = p.effective_gain();
  const double sigma2 = p.noise_variance();
  const std::size_t m = 1000000;
  const MleEstimate est = mle_from_moments(simulate_moments(p, m, 8086, 0), 1);
  CHECK(std::fabs(est.tau_hat - tau) < 3.0 * std::sqrt(sigma2 / (m * 5.0)));
  CHECK(std::fabs(est.sigma2_hat - sigma2) < 3.0 * sigma2 * std::sqrt(2.0 / m));
}

TEST_CASE("worst-case bound pinned values") {
  // Frozen from direct evaluation with the exact normal quantile:
  // tau_hat = sqrt(0.2), sigma2_hat = 1.002, m = 1e6, v_a = 5, eps = 1e-10.
  MleEstimate est;
  est.tau_hat = 0.4472;
  est.t_hat = est.tau_hat;
  est.sigma2_hat = 1.002;
  est.m = 1000000;
  est.mu = 1;
  const double z = gaussian_quantile(1e-10);
  CHECK(z == doctest::Approx(6.467).epsilon(1e-4));

  const double t_min = worst_case_t_min(est, 5.0, 1e-10);
  CHECK(t_min == doctest::Approx(est.tau_hat - z * std::sqrt(1.002 / 5e6)).epsilon(1e-14));
  CHECK(t_min == doctest::Approx(0.44434).epsilon(1e-4));

  const double s2_max = worst_case_sigma2_max(est, 1e-10);
  CHECK(s2_max == doctest::Approx(1.002 * (1.0 + z * std::sqrt(2.0) / 1e3)).epsilon(1e-14));
  CHECK(s2_max == doctest::Approx(1.01116).epsilon(1e-4));
}

TEST_CASE("gain bound converts through sqrt(mu)") {
  MleEstimate est;
  est.tau_hat = 0.3;
  est.sigma2_hat = 1.0;
  est.m = 10000;
  est.mu = 2;
  est.t_hat = std::sqrt(2.0) * est.tau_hat;
  const double z = gaussian_quantile(0.05);
  const double tau_min = est.tau_hat - z * std::sqrt(1.0 / (10000.0 * 5.0));
  CHECK(worst_case_t_min(est, 5.0, 0.05) == doctest::Approx(std::sqrt(2.0) * tau_min).epsilon(1e-14));
}

TEST_CASE("zero residual variance collapses the intervals") {
  MleEstimate est;
  est.tau_hat = 0.5;
  est.t_hat = 0.5;
  est.sigma2_hat = 0.0;
  est.m = 100;
  est.mu = 1;
  CHECK(worst_case_t_min(est, 5.0, 0.05) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(worst_case_sigma2_max(est, 0.05) == 0.0);
}

TEST_CASE("bounds are monotone in m and epsilon and bracket the estimate") {
  MleEstimate est;
  est.tau_hat = 0.4;
  est.t_hat = 0.4;
  est.sigma2_hat = 1.01;
  est.mu = 1;

  double prev_t = -1e300;
  double prev_s2 = 1e300;
  for (const std::size_t m : {100u, 1000u, 10000u, 100000u}) {
    est.m = m;
    const double t_min = worst_case_t_min(est, 5.0, 0.05);
    const double s2_max = worst_case_sigma2_max(est, 0.05);
    CHECK(t_min < est.tau_hat);
    CHECK(s2_max > est.sigma2_hat);
    CHECK(t_min > prev_t);
    CHECK(s2_max < prev_s2);
    prev_t = t_min;
    prev_s2 = s2_max;
  }

  est.m = 10000;
  // Smaller failure probability -> wider interval.
  CHECK(worst_case_t_min(est, 5.0, 1e-10) < worst_case_t_min(est, 5.0, 0.05));
  CHECK(worst_case_sigma2_max(est, 1e-10) > worst_case_sigma2_max(est, 0.05));
  CHECK_THROWS_AS(worst_case_t_min(est, 5.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(worst_case_sigma2_max(est, 1.5), std::invalid_argument);
}

TEST_CASE("scale equivariance of the fit") {
  const ChannelParams p = ChannelParams::from_transmittance(5.0, 0.01, 0.8, 0.2, 2);
  const TrialDataset d = make_trial(p, 2000, 0.5, 17, 0);
  const MleEstimate base = mle_estimate(d.x_est(), d.y_est(), 2);
  const double c = 3.7;
  const MleEstimate scaled = mle_estimate(d.x_est(), (c * d.y_est()).eval(), 2);
  CHECK(scaled.tau_hat == doctest::Approx(c * base.tau_hat).epsilon(1e-13));
  CHECK(scaled.sigma2_hat == doctest::Approx(c * c * base.sigma2_hat).epsilon(1e-13));
}

TEST_CASE("worst-case record carries the failure probability and method") {
  MleEstimate est;
  est.tau_hat = 0.4;
  est.t_hat = 0.4;
  est.sigma2_hat = 1.0;
  est.m = 5000;
  est.mu = 1;
  const WorstCaseBounds wc = mle_worst_case(est, 5.0, 0.05);
  CHECK(wc.epsilon_pe == 0.05);
  CHECK(wc.method == BoundMethod::kMle);
  CHECK(bound_method_name(wc.method) == "mle");
  CHECK(bound_method_name(BoundMethod::kNn) == "nn");
  CHECK(wc.t_min == worst_case_t_min(est, 5.0, 0.05));
  CHECK(wc.sigma2_max == worst_case_sigma2_max(est, 0.05));
}
