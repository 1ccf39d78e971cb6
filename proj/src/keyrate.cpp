#include "cvqkd/keyrate.hpp"

#include <cmath>
#include <stdexcept>

namespace cvqkd {

namespace {

constexpr double kNuTolerance = 1e-9;

void check_mu(int mu) {
  if (mu != 1 && mu != 2) throw std::invalid_argument("keyrate: mu must be 1 or 2");
}

}  // namespace

double SecurityParams::total_epsilon() const {
  return p_ec * eps_pe + eps_cor + eps_bar + eps_pa;
}

void SecurityParams::validate() const {
  auto in_unit = [](double e) { return e > 0.0 && e < 1.0; };
  if (!in_unit(eps_pe) || !in_unit(eps_cor) || !in_unit(eps_bar) || !in_unit(eps_pa)) {
    throw std::invalid_argument("SecurityParams: every epsilon must lie in (0,1)");
  }
  if (!(p_ec > 0.0 && p_ec <= 1.0)) {
    throw std::invalid_argument("SecurityParams: p_ec must lie in (0,1]");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("SecurityParams: beta must lie in [0,1]");
  }
  if (dim_hx < 1) throw std::invalid_argument("SecurityParams: dim_hx must be >= 1");
  if (n_key == 0 || n_total == 0 || n_key >= n_total) {
    throw std::invalid_argument("SecurityParams: need 0 < n_key < n_total");
  }
}

Eigen::Matrix4d CovarianceMatrix::full() const {
  Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
  g(0, 0) = g(1, 1) = alice_var;
  g(2, 2) = g(3, 3) = bob_var;
  g(0, 2) = g(2, 0) = corr;
  g(1, 3) = g(3, 1) = -corr;
  return g;
}

CovarianceMatrix build_covariance(double v_a, double t, double sigma2) {
  if (!(v_a > 0.0)) throw std::invalid_argument("build_covariance: v_a must be > 0");
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("build_covariance: t must lie in [0,1]");
  }
  if (!(sigma2 >= 1.0 - 1e-12)) {
    throw std::invalid_argument("build_covariance: sigma2 must be >= 1 (shot-noise units)");
  }
  CovarianceMatrix cov;
  cov.alice_var = v_a + 1.0;
  cov.bob_var = t * t * v_a + sigma2;
  cov.corr = t * std::sqrt(v_a * v_a + 2.0 * v_a);
  const auto [nu1, nu2] = symplectic_eigenvalues(cov);
  if (nu2 < 1.0 - kNuTolerance || nu1 < 1.0 - kNuTolerance) {
    throw std::invalid_argument("build_covariance: unphysical state, symplectic eigenvalue < 1");
  }
  return cov;
}

std::pair<double, double> symplectic_eigenvalues(const CovarianceMatrix& cov) {
  const double a = cov.alice_var;
  const double b = cov.bob_var;
  const double c = cov.corr;
  const double delta = a * a + b * b - 2.0 * c * c;
  const double det = a * b - c * c;
  double disc = delta * delta - 4.0 * det * det;
  if (disc < 0.0) {
    if (disc < -kNuTolerance * std::max(1.0, delta * delta)) {
      throw std::invalid_argument("symplectic_eigenvalues: negative discriminant");
    }
    disc = 0.0;
  }
  const double root = std::sqrt(disc);
  const double nu1_sq = 0.5 * (delta + root);
  const double nu2_sq = std::max(0.0, 0.5 * (delta - root));
  return {std::sqrt(nu1_sq), std::sqrt(nu2_sq)};
}

double conditional_eigenvalue(const CovarianceMatrix& cov, int mu) {
  check_mu(mu);
  const double a = cov.alice_var;
  const double b = cov.bob_var;
  const double c = cov.corr;
  // Heterodyne: a - c^2/(b+1); homodyne: sqrt(a(a - c^2/b)).
  if (mu == 2) return a - c * c / (b + 1.0);
  return std::sqrt(a * (a - c * c / b));
}

double g_function(double nu) {
  if (nu < 1.0 - kNuTolerance) {
    throw std::invalid_argument("g_function: argument must be >= 1");
  }
  if (nu <= 1.0) return 0.0;
  const double up = 0.5 * (nu + 1.0);
  const double dn = 0.5 * (nu - 1.0);
  return up * std::log2(up) - dn * std::log2(dn);
}

double holevo_bound(const CovarianceMatrix& cov, int mu) {
  check_mu(mu);
  const auto [nu1, nu2] = symplectic_eigenvalues(cov);
  const double nu3 = conditional_eigenvalue(cov, mu);
  return g_function(nu1) + g_function(nu2) - g_function(nu3);
}

double mutual_information(double v_a, double t, double sigma2, int mu) {
  check_mu(mu);
  if (!(v_a > 0.0)) throw std::invalid_argument("mutual_information: v_a must be > 0");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("mutual_information: sigma2 must be > 0");
  if (!(t >= 0.0)) throw std::invalid_argument("mutual_information: t must be >= 0");
  const double mu_d = static_cast<double>(mu);
  return 0.5 * mu_d * std::log2(1.0 + t * t * v_a / (mu_d * sigma2));
}

double finite_size_delta(std::size_t n_key, double eps_bar, double eps_pa, int dim_hx) {
  if (n_key == 0) throw std::invalid_argument("finite_size_delta: n_key must be > 0");
  if (!(eps_bar > 0.0 && eps_bar < 1.0) || !(eps_pa > 0.0 && eps_pa < 1.0)) {
    throw std::invalid_argument("finite_size_delta: epsilons must lie in (0,1)");
  }
  if (dim_hx < 1) throw std::invalid_argument("finite_size_delta: dim_hx must be >= 1");
  const double n = static_cast<double>(n_key);
  return (2.0 * dim_hx + 3.0) * std::sqrt(std::log2(2.0 / eps_bar) / n) +
         2.0 / n * std::log2(1.0 / eps_pa);
}

KeyRateReport secret_key_rate(double v_a, double t, double sigma2, int mu,
                              const SecurityParams& sec, const std::string& method) {
  sec.validate();
  const CovarianceMatrix cov = build_covariance(v_a, t, sigma2);
  KeyRateReport r;
  r.i_ab = mutual_information(v_a, t, sigma2, mu);
  r.holevo = holevo_bound(cov, mu);
  r.delta_n = finite_size_delta(sec.n_key, sec.eps_bar, sec.eps_pa, sec.dim_hx);
  const double n_over_total =
      static_cast<double>(sec.n_key) / static_cast<double>(sec.n_total);
  r.k_eps = n_over_total * sec.p_ec * (sec.beta * r.i_ab - r.holevo - r.delta_n);
  r.t_used = t;
  r.sigma2_used = sigma2;
  r.eps_total = sec.total_epsilon();
  r.method = method;
  return r;
}

}  // namespace cvqkd
