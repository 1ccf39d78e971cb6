#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <utility>

namespace cvqkd {

// Security budget and block bookkeeping for the composable finite-size rate.
struct SecurityParams {
  double eps_pe = 1e-10;
  double eps_cor = 1e-10;
  double eps_bar = 1e-10;
  double eps_pa = 1e-10;
  double p_ec = 0.9;
  double beta = 0.95;
  int dim_hx = 2;
  std::size_t n_key = 0;    // signals left for the key, n = N - m
  std::size_t n_total = 0;  // N

  // p_ec*eps_pe + eps_cor + eps_bar + eps_pa.
  double total_epsilon() const;
  void validate() const;
};

// Two-mode covariance matrix of the entanglement-based description in block
// form [[alice_var*I2, corr*sigma_z], [corr*sigma_z, bob_var*I2]] with
// alice_var = v_a + 1, bob_var = t^2 v_a + sigma2, corr = t*sqrt(v_a^2+2v_a).
struct CovarianceMatrix {
  double alice_var = 0.0;
  double bob_var = 0.0;
  double corr = 0.0;

  Eigen::Matrix4d full() const;
};

// Validates physicality: both symplectic eigenvalues >= 1 - 1e-9.
CovarianceMatrix build_covariance(double v_a, double t, double sigma2);

// nu_{1,2}^2 = (Delta -+ sqrt(Delta^2 - 4 D^2))/2, returned (nu1, nu2) with
// nu1 >= nu2.
std::pair<double, double> symplectic_eigenvalues(const CovarianceMatrix& cov);

// Symplectic eigenvalue of Alice's mode conditioned on Bob's heterodyne
// (mu = 2) or homodyne (mu = 1) measurement.
double conditional_eigenvalue(const CovarianceMatrix& cov, int mu);

// Bosonic entropy kernel g(nu); g(1) = 0, increasing for nu >= 1.
double g_function(double nu);

// Holevo information chi(y:E) = g(nu1) + g(nu2) - g(nu3).
double holevo_bound(const CovarianceMatrix& cov, int mu);

// I(x:y) = (mu/2) log2(1 + t^2 v_a / (mu sigma2)).
double mutual_information(double v_a, double t, double sigma2, int mu);

// Finite-size penalty Delta(n)/n-style term:
//   (2 dim_hx + 3) sqrt(log2(2/eps_bar)/n) + (2/n) log2(1/eps_pa).
double finite_size_delta(std::size_t n_key, double eps_bar, double eps_pa, int dim_hx);

struct KeyRateReport {
  double i_ab = 0.0;
  double holevo = 0.0;
  double delta_n = 0.0;
  double k_eps = 0.0;         // signed; clamping happens only at presentation
  double t_used = 0.0;
  double sigma2_used = 0.0;
  double eps_total = 0.0;
  std::string method;
};

// k_eps = (n p_ec / N) * (beta I - chi - Delta(n)) at the given channel
// parameters (true values or worst-case bounds).
KeyRateReport secret_key_rate(double v_a, double t, double sigma2, int mu,
                              const SecurityParams& sec, const std::string& method);

}  // namespace cvqkd
