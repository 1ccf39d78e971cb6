#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cvqkd/keyrate.hpp"
#include "cvqkd/rng.hpp"

using namespace cvqkd;

namespace {

SecurityParams default_security() {
  SecurityParams sec;
  sec.n_key = 500000;
  sec.n_total = 1000000;
  return sec;
}

// Moduli of the eigenvalues of Omega*Gamma, sorted ascending.  For a
// physical two-mode state these are {nu2, nu2, nu1, nu1}.
std::vector<double> eigensolver_moduli(const CovarianceMatrix& cov) {
  Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
  omega(0, 1) = 1.0;
  omega(1, 0) = -1.0;
  omega(2, 3) = 1.0;
  omega(3, 2) = -1.0;
  const Eigen::Matrix4d m = omega * cov.full();
  Eigen::EigenSolver<Eigen::Matrix4d> es(m, false);
  std::vector<double> mod(4);
  for (int i = 0; i < 4; ++i) mod[static_cast<std::size_t>(i)] = std::abs(es.eigenvalues()[i]);
  std::sort(mod.begin(), mod.end());
  return mod;
}

}  // namespace

TEST_CASE("covariance blocks at pinned parameters") {
  const CovarianceMatrix cov = build_covariance(5.0, 0.2, 1.002);
  CHECK(cov.alice_var == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(cov.bob_var == doctest::Approx(1.202).epsilon(1e-15));
  // corr = t * sqrt(v_a^2 + 2 v_a) = 0.2 * sqrt(35).
  CHECK(cov.corr == doctest::Approx(0.2 * std::sqrt(35.0)).epsilon(1e-15));
  CHECK(cov.corr == doctest::Approx(1.1832159566199232).epsilon(1e-14));

  const Eigen::Matrix4d g = cov.full();
  CHECK(g(0, 0) == 6.0);
  CHECK(g(1, 1) == 6.0);
  CHECK(g(2, 2) == 1.202);
  CHECK(g(3, 3) == 1.202);
  CHECK(g(0, 2) == cov.corr);
  CHECK(g(1, 3) == -cov.corr);
  CHECK(g(0, 1) == 0.0);
  CHECK(g(0, 3) == 0.0);
  CHECK((g - g.transpose()).norm() == 0.0);
}

TEST_CASE("zero transmittance factorizes the state") {
  const CovarianceMatrix cov = build_covariance(5.0, 0.0, 1.0);
  const auto [nu1, nu2] = symplectic_eigenvalues(cov);
  CHECK(nu1 == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(nu2 == doctest::Approx(1.0).epsilon(1e-14));
  // The measurement reveals nothing about the purifying system.
  CHECK(std::abs(holevo_bound(cov, 2)) < 1e-12);
  CHECK(std::abs(holevo_bound(cov, 1)) < 1e-12);
  CHECK(mutual_information(5.0, 0.0, 1.0, 2) == 0.0);
}

TEST_CASE("identity channel leaks nothing") {
  const CovarianceMatrix cov = build_covariance(5.0, 1.0, 1.0);
  const auto [nu1, nu2] = symplectic_eigenvalues(cov);
  CHECK(nu1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(nu2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(holevo_bound(cov, 2)) < 1e-9);
  CHECK(std::abs(holevo_bound(cov, 1)) < 1e-9);
}

TEST_CASE("entropy kernel pinned values and shape") {
  CHECK(g_function(1.0) == 0.0);
  CHECK(g_function(3.0) == doctest::Approx(2.0).epsilon(1e-15));
  // g(7) = 4*log2(4) - 3*log2(3).
  CHECK(g_function(7.0) == doctest::Approx(8.0 - 3.0 * std::log2(3.0)).epsilon(1e-15));
  CHECK(g_function(7.0) == doctest::Approx(3.2451124978365313).epsilon(1e-14));

  double prev = 0.0;
  for (double nu : {1.0 + 1e-9, 1.001, 1.1, 2.0, 5.0, 50.0, 1e4}) {
    const double val = g_function(nu);
    CHECK(val >= prev);
    prev = val;
  }

  // Large-argument expansion g(nu) -> log2(nu/2) + 1/ln 2.  The direct
  // evaluation cancels two ~nu-sized terms, so only ~1e-7 absolute survives.
  CHECK(g_function(1e8) ==
        doctest::Approx(std::log2(5e7) + 1.0 / std::log(2.0)).epsilon(1e-8));

  CHECK_THROWS_AS(g_function(0.9), std::invalid_argument);
  CHECK_THROWS_AS(g_function(-2.0), std::invalid_argument);
  CHECK(g_function(1.0 - 1e-10) == 0.0);
}

TEST_CASE("symplectic eigenvalues match a direct eigensolve of omega*gamma") {
  RngStream rs(2024, 0, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const double v_a = 0.2 + 19.8 * rs.next_double();
    const double t = rs.next_double();
    const double sigma2 = 1.0 + 0.2 * rs.next_double();
    const CovarianceMatrix cov = build_covariance(v_a, t, sigma2);
    const auto [nu1, nu2] = symplectic_eigenvalues(cov);
    const std::vector<double> mod = eigensolver_moduli(cov);
    CAPTURE(v_a);
    CAPTURE(t);
    CAPTURE(sigma2);
    CHECK(mod[0] == doctest::Approx(nu2).epsilon(1e-9));
    CHECK(mod[1] == doctest::Approx(nu2).epsilon(1e-9));
    CHECK(mod[2] == doctest::Approx(nu1).epsilon(1e-9));
    CHECK(mod[3] == doctest::Approx(nu1).epsilon(1e-9));
    CHECK(nu1 >= nu2);
    CHECK(nu2 >= 1.0 - 1e-9);
  }
}

TEST_CASE("conditional eigenvalue agrees with the matrix-level reduction") {
  RngStream rs(7, 0, 1);
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d sz;
  sz << 1.0, 0.0, 0.0, -1.0;
  for (int rep = 0; rep < 100; ++rep) {
    const double v_a = 0.5 + 10.0 * rs.next_double();
    const double t = 0.05 + 0.9 * rs.next_double();
    const double sigma2 = 1.0 + 0.1 * rs.next_double();
    const CovarianceMatrix cov = build_covariance(v_a, t, sigma2);
    const Eigen::Matrix2d a = cov.alice_var * id;
    const Eigen::Matrix2d b = cov.bob_var * id;
    const Eigen::Matrix2d c = cov.corr * sz;

    // Heterodyne conditioning: A - C (B + I)^{-1} C^T.
    const Eigen::Matrix2d het = a - c * (b + id).inverse() * c.transpose();
    CHECK(std::sqrt(het.determinant()) ==
          doctest::Approx(conditional_eigenvalue(cov, 2)).epsilon(1e-12));

    // Homodyne conditioning of the x quadrature via the pseudo-inverse of
    // Pi B Pi with Pi = diag(1, 0): A - C diag(1/b, 0) C^T.
    Eigen::Matrix2d pinv = Eigen::Matrix2d::Zero();
    pinv(0, 0) = 1.0 / cov.bob_var;
    const Eigen::Matrix2d hom = a - c * pinv * c.transpose();
    CHECK(std::sqrt(hom.determinant()) ==
          doctest::Approx(conditional_eigenvalue(cov, 1)).epsilon(1e-12));
  }
  const CovarianceMatrix cov = build_covariance(5.0, 0.2, 1.002);
  // a = 6, b = 1.202, c^2 = 1.4: 6 - 1.4/2.202.
  CHECK(conditional_eigenvalue(cov, 2) ==
        doctest::Approx(6.0 - 1.4 / 2.202).epsilon(1e-14));
  CHECK_THROWS_AS(conditional_eigenvalue(cov, 3), std::invalid_argument);
}

TEST_CASE("holevo information is nonnegative and grows with excess noise") {
  RngStream rs(5, 0, 2);
  for (int rep = 0; rep < 200; ++rep) {
    const double v_a = 0.5 + 15.0 * rs.next_double();
    const double t = rs.next_double();
    const double sigma2 = 1.0 + 0.15 * rs.next_double();
    const CovarianceMatrix cov = build_covariance(v_a, t, sigma2);
    CHECK(holevo_bound(cov, 2) >= -1e-10);
    CHECK(holevo_bound(cov, 1) >= -1e-10);
  }

  const double t = 0.35;
  double prev = -1.0;
  for (double xi : {0.0, 0.005, 0.01, 0.02, 0.05, 0.1}) {
    const double sigma2 = 1.0 + t * t * xi;
    const double chi = holevo_bound(build_covariance(5.0, t, sigma2), 2);
    CHECK(chi > prev);
    prev = chi;
  }
}

TEST_CASE("mutual information pinned values and histogram estimate") {
  CHECK(mutual_information(5.0, 1.0, 1.0, 2) ==
        doctest::Approx(std::log2(3.5)).epsilon(1e-15));
  CHECK(mutual_information(5.0, 1.0, 1.0, 2) ==
        doctest::Approx(1.8073549220576042).epsilon(1e-14));
  CHECK(mutual_information(5.0, 1.0, 1.0, 1) ==
        doctest::Approx(0.5 * std::log2(6.0)).epsilon(1e-15));

  // Heterodyne splits into two independent quadrature channels with gain
  // t/sqrt(2); a binned plug-in estimate of one quadrature's information,
  // bias-corrected, must land near half the closed form.
  const double v_a = 5.0, t = 0.9, sigma2 = 1.01;
  const double tau = t / std::sqrt(2.0);
  const double sx = std::sqrt(v_a);
  const double sy = std::sqrt(tau * tau * v_a + sigma2);
  constexpr int kBins = 128;
  constexpr double kRange = 5.0;
  const Eigen::Index m = 500000;

  RngStream rs(99, 0, 3);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(kBins, kBins);
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = sx * rs.next_normal();
    const double y = tau * x + std::sqrt(sigma2) * rs.next_normal();
    const double ux = (x / (sx * kRange) + 1.0) * 0.5;
    const double uy = (y / (sy * kRange) + 1.0) * 0.5;
    if (ux < 0.0 || ux >= 1.0 || uy < 0.0 || uy >= 1.0) continue;
    counts(static_cast<int>(ux * kBins), static_cast<int>(uy * kBins)) += 1.0;
    ++kept;
  }
  REQUIRE(kept > m - 100);

  const double total = static_cast<double>(kept);
  const Eigen::VectorXd row = counts.rowwise().sum();
  const Eigen::VectorXd col = counts.colwise().sum();
  double info = 0.0;
  int occupied = 0;
  for (int i = 0; i < kBins; ++i) {
    for (int j = 0; j < kBins; ++j) {
      const double n = counts(i, j);
      if (n == 0.0) continue;
      ++occupied;
      info += n / total * std::log2(n * total / (row[i] * col[j]));
    }
  }
  const int rx = (row.array() > 0.0).count();
  const int cy = (col.array() > 0.0).count();
  // Miller-Madow correction of the plug-in bias.
  info -= static_cast<double>(occupied - rx - cy + 1) / (2.0 * total * std::log(2.0));

  const double closed = mutual_information(v_a, t, sigma2, 2);
  CHECK(2.0 * info > closed - 0.05);
  CHECK(2.0 * info < closed + 0.02);

  CHECK_THROWS_AS(mutual_information(0.0, 0.5, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(mutual_information(5.0, 0.5, 0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(mutual_information(5.0, -0.5, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(mutual_information(5.0, 0.5, 1.0, 4), std::invalid_argument);
}

TEST_CASE("finite size penalty pinned value and structure") {
  const double delta = finite_size_delta(1000000, 1e-10, 1e-10, 2);
  CHECK(delta == doctest::Approx(0.0410146).epsilon(1e-4));

  // Independent recomputation of both terms.
  const double n = 1e6;
  const double sqrt_term = 7.0 * std::sqrt(std::log2(2.0 / 1e-10) / n);
  const double pa_term = 2.0 / n * std::log2(1e10);
  CHECK(delta == doctest::Approx(sqrt_term + pa_term).epsilon(1e-15));

  // Raising dim_hx by one adds exactly 2 sqrt(log2(2/eps_bar)/n).
  const double delta3 = finite_size_delta(1000000, 1e-10, 1e-10, 3);
  CHECK(delta3 - delta ==
        doctest::Approx(2.0 * std::sqrt(std::log2(2.0 / 1e-10) / n)).epsilon(1e-10));

  // Shrinks with block length, vanishes asymptotically.
  CHECK(finite_size_delta(4000000, 1e-10, 1e-10, 2) < delta);
  CHECK(finite_size_delta(100000000000000ULL, 1e-10, 1e-10, 2) < 5e-6);

  CHECK_THROWS_AS(finite_size_delta(0, 1e-10, 1e-10, 2), std::invalid_argument);
  CHECK_THROWS_AS(finite_size_delta(1000, 0.0, 1e-10, 2), std::invalid_argument);
  CHECK_THROWS_AS(finite_size_delta(1000, 1e-10, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(finite_size_delta(1000, 1e-10, 1e-10, 0), std::invalid_argument);
}

TEST_CASE("secret key rate is the wired combination of its pieces") {
  const SecurityParams sec = default_security();
  const double v_a = 5.0, t = 0.5, sigma2 = 1.0025;
  const KeyRateReport r = secret_key_rate(v_a, t, sigma2, 2, sec, "true");

  const double i_ab = mutual_information(v_a, t, sigma2, 2);
  const double chi = holevo_bound(build_covariance(v_a, t, sigma2), 2);
  const double delta = finite_size_delta(sec.n_key, sec.eps_bar, sec.eps_pa, sec.dim_hx);
  CHECK(r.i_ab == i_ab);
  CHECK(r.holevo == chi);
  CHECK(r.delta_n == delta);
  CHECK(r.k_eps ==
        doctest::Approx(0.5 * 0.9 * (0.95 * i_ab - chi - delta)).epsilon(1e-14));
  CHECK(r.t_used == t);
  CHECK(r.sigma2_used == sigma2);
  CHECK(r.method == "true");
  CHECK(r.eps_total == doctest::Approx(3.9e-10).epsilon(1e-12));

  // Worst-case ordering: rates never improve when t drops or sigma2 rises.
  for (double tt : {0.2, 0.4, 0.6, 0.8}) {
    for (double ss : {1.0, 1.002, 1.01, 1.03}) {
      const double base = secret_key_rate(v_a, tt, ss, 2, sec, "x").k_eps;
      CHECK(secret_key_rate(v_a, tt - 0.02, ss, 2, sec, "x").k_eps <= base + 1e-15);
      CHECK(secret_key_rate(v_a, tt, ss + 0.01, 2, sec, "x").k_eps <= base + 1e-15);
    }
  }

  // The rate can be negative; no silent clamping.
  SecurityParams tiny = sec;
  tiny.n_key = 2000;
  tiny.n_total = 4000;
  CHECK(secret_key_rate(v_a, 0.1, 1.05, 2, tiny, "x").k_eps < 0.0);
}

TEST_CASE("unphysical states and bad budgets are rejected") {
  CHECK_THROWS_AS(build_covariance(5.0, 1.2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_covariance(5.0, -0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_covariance(5.0, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_covariance(0.0, 0.5, 1.0), std::invalid_argument);
  CHECK_NOTHROW(build_covariance(5.0, 0.5, 1.0 - 1e-13));

  SecurityParams sec = default_security();
  CHECK_NOTHROW(sec.validate());
  SecurityParams bad = sec;
  bad.eps_pe = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = sec;
  bad.p_ec = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = sec;
  bad.p_ec = 1.0;
  CHECK_NOTHROW(bad.validate());
  bad = sec;
  bad.beta = 1.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = sec;
  bad.dim_hx = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = sec;
  bad.n_key = bad.n_total;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = sec;
  bad.n_key = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
