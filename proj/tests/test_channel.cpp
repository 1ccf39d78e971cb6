#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "cvqkd/channel.hpp"
#include "doctest.h"

using namespace cvqkd;

TEST_CASE("fiber attenuation: 0.2 dB/km under the detector efficiency") {
  CHECK(transmittance_from_distance(0.0, 0.8) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(transmittance_from_distance(50.0, 0.8) == doctest::Approx(0.08).epsilon(1e-14));
  CHECK(transmittance_from_distance(100.0, 0.8) == doctest::Approx(0.008).epsilon(1e-14));
  CHECK(transmittance_from_distance(10.0, 1.0) == doctest::Approx(std::pow(10.0, -0.2)).epsilon(1e-14));
  CHECK_THROWS_AS(transmittance_from_distance(-1.0, 0.8), std::invalid_argument);
  CHECK_THROWS_AS(transmittance_from_distance(10.0, 0.0), std::invalid_argument);
}

TEST_CASE("channel parameter accessors") {
  const ChannelParams p = ChannelParams::from_distance(5.0, 0.01, 0.8, 50.0, 2);
  CHECK(p.transmittance() == doctest::Approx(0.08).epsilon(1e-14));
  CHECK(p.gain() == doctest::Approx(std::sqrt(0.08)).epsilon(1e-14));
  CHECK(p.effective_gain() == doctest::Approx(std::sqrt(0.04)).epsilon(1e-14));
  CHECK(p.noise_variance() == doctest::Approx(1.0 + 0.08 * 0.01).epsilon(1e-14));

  // from_transmittance recovers the distance.
  const ChannelParams q = ChannelParams::from_transmittance(5.0, 0.01, 0.8, 0.08, 2);
  CHECK(q.distance_km == doctest::Approx(50.0).epsilon(1e-12));
  CHECK_THROWS_AS(ChannelParams::from_transmittance(5.0, 0.01, 0.8, 0.9, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(ChannelParams::from_distance(-5.0, 0.01, 0.8, 10.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(ChannelParams::from_distance(5.0, -0.01, 0.8, 10.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(ChannelParams::from_distance(5.0, 0.01, 0.8, 10.0, 3), std::invalid_argument);
}

TEST_CASE("trial split arithmetic and shapes") {
  const ChannelParams p = ChannelParams::from_distance(5.0, 0.01, 0.8, 20.0, 2);
  const TrialDataset d = make_trial(p, 1000, 0.5, 7, 3);
  CHECK(d.n_total == 1000);
  CHECK(d.n_est == 500);
  CHECK(d.x.size() == 1000);
  CHECK(d.y.size() == 1000);
  CHECK(d.x_est().size() == 500);
  CHECK(d.seed.master_seed == 7);
  CHECK(d.seed.trial_index == 3);
  CHECK_THROWS_AS(make_trial(p, 1000, 0.0, 7, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_trial(p, 1000, 1.0, 7, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_trial(p, 1, 0.5, 7, 3), std::invalid_argument);
}

TEST_CASE("trials are deterministic in (seed, trial) and differ across them") {
  const ChannelParams p = ChannelParams::from_distance(5.0, 0.01, 0.8, 20.0, 2);
  const TrialDataset a = make_trial(p, 400, 0.5, 11, 9);
  const TrialDataset b = make_trial(p, 400, 0.5, 11, 9);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  const TrialDataset c = make_trial(p, 400, 0.5, 11, 10);
  const TrialDataset d = make_trial(p, 12, 0.5, 11, 9);
  CHECK(a.x != c.x);
  CHECK(a.x.head(12) == d.x);  // same stream, same prefix
}

TEST_CASE("streaming moments equal the dense trial block bit for bit") {
  const ChannelParams p = ChannelParams::from_distance(5.0, 0.01, 0.8, 35.0, 2);
  const TrialDataset d = make_trial(p, 2000, 0.5, 21, 4);
  const SampleMoments dense = SampleMoments::from_samples(d.x_est(), d.y_est());
  const SampleMoments streamed = simulate_moments(p, 1000, 21, 4);
  CHECK(streamed.m == dense.m);
  CHECK(streamed.sum_x == dense.sum_x);
  CHECK(streamed.sum_y == dense.sum_y);
  CHECK(streamed.sum_xx == dense.sum_xx);
  CHECK(streamed.sum_xy == dense.sum_xy);
  CHECK(streamed.sum_yy == dense.sum_yy);
}

TEST_CASE("sample moments match the generative model") {
  const double v_a = 5.0, xi = 0.01, eta = 0.8;
  const ChannelParams p = ChannelParams::from_transmittance(v_a, xi, eta, 0.2, 2);
  const std::size_t m = 200000;
  const SampleMoments mo = simulate_moments(p, m, 31415, 0);
  const double md = static_cast<double>(m);
  const double tau = p.effective_gain();
  const double sigma2 = p.noise_variance();

  const double var_x = mo.sum_xx / md;
  const double mean_x = mo.sum_x / md;
  const double exy = mo.sum_xy / md;
  const double var_y = mo.sum_yy / md;
  // 5-sigma bands on each raw moment.
  CHECK(std::fabs(mean_x) < 5.0 * std::sqrt(v_a / md));
  CHECK(std::fabs(var_x - v_a) < 5.0 * v_a * std::sqrt(2.0 / md));
  CHECK(std::fabs(exy - tau * v_a) < 5.0 * std::sqrt(v_a * (sigma2 + 2.0 * tau * tau * v_a) / md));
  const double var_y_expected = tau * tau * v_a + sigma2;
  CHECK(std::fabs(var_y - var_y_expected) < 5.0 * var_y_expected * std::sqrt(2.0 / md));
}

TEST_CASE("channel noise is gaussian: standardized residual moments") {
  const ChannelParams p = ChannelParams::from_transmittance(5.0, 0.01, 0.8, 0.2, 2);
  const TrialDataset d = make_trial(p, 200000, 0.5, 999, 1);
  const double tau = p.effective_gain();
  const double sd = std::sqrt(p.noise_variance());
  const Eigen::VectorXd z = (d.y - tau * d.x) / sd;
  const double n = static_cast<double>(z.size());
  const double m1 = z.mean();
  const double m2 = z.array().square().mean();
  const double m3 = z.array().cube().mean();
  const double m4 = z.array().pow(4).mean();
  CHECK(std::fabs(m1) < 5.0 / std::sqrt(n));
  CHECK(std::fabs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::fabs(m3) < 5.0 * std::sqrt(15.0 / n));
  CHECK(std::fabs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
  // Noise independent of the modulation.
  const double rho = (d.x.array() * z.array()).mean() / std::sqrt(p.v_a);
  CHECK(std::fabs(rho) < 5.0 / std::sqrt(n));
}

TEST_CASE("trial dump round-trips") {
  const ChannelParams p = ChannelParams::from_distance(5.0, 0.01, 0.8, 12.0, 2);
  const TrialDataset d = make_trial(p, 64, 0.5, 0xDEADBEEFCAFE1234ull, 77);
  const std::string path = (std::filesystem::temp_directory_path() / "cvqkd_trial_rt.csv").string();
  save_trial(d, path);
  const TrialDataset r = load_trial(path);
  CHECK(r.n_total == d.n_total);
  CHECK(r.n_est == d.n_est);
  CHECK(r.seed.master_seed == d.seed.master_seed);
  CHECK(r.seed.trial_index == d.seed.trial_index);
  CHECK(r.x == d.x);  // %.17g round-trip is exact for doubles
  CHECK(r.y == d.y);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_trial("/nonexistent/file.csv"), std::runtime_error);
}
