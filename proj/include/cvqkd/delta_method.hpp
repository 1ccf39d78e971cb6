#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "cvqkd/mlp.hpp"

namespace cvqkd {

enum class IntervalForm { kEq24, kEq25 };

IntervalForm interval_form_from_string(const std::string& name);
std::string interval_form_name(IntervalForm form);

// Calibration of the trained network as a nonlinear regression: Jacobian
// rows f_i = d(output)/d(theta) at n_cal fresh labeled trials, Gram matrix
// G = sum f_i f_i^T + ridge*I Cholesky-factored, residual scale
// s^2 = RSS/(n_cal - p).  Only the factor is kept; G is never re-formed.
struct CalibrationRecord {
  std::size_t n_cal = 0;
  int p = 0;
  double s2 = 0.0;
  double ridge = 0.0;
  std::size_t m_per_trial = 0;      // samples behind each calibration feature row
  std::uint64_t model_checksum = 0;
  Eigen::MatrixXd chol_lower;       // L with L*L^T = G; upper triangle unspecified

  // f0^T G^{-1} f0 via one triangular solve.
  double quad_form(const Eigen::Ref<const Eigen::VectorXd>& f0) const;
};

// Same computation path as the Jacobian mode of backpropagation.
Eigen::VectorXd output_jacobian_row(const MlpModel& model,
                                    const Eigen::Ref<const Eigen::VectorXd>& features);

// ridge < 0 requests the default 1e-8 * trace(G)/p.  Requires n_cal > p.
CalibrationRecord calibrate(const MlpModel& model,
                            const Eigen::Ref<const Eigen::MatrixXd>& features,
                            const Eigen::Ref<const Eigen::VectorXd>& targets,
                            double ridge, std::size_t m_per_trial);

// t_quantile * s * sqrt(1 + q)  (kEq24)  or  t_quantile * s * (1 + q)  (kEq25).
double interval_halfwidth(double s, double quad, double t_quantile, IntervalForm form);

struct NnWorstCase {
  double upsilon_hat = 0.0;   // raw network output (scaled-noise units)
  double halfwidth = 0.0;     // prediction-interval halfwidth, same units
  double sigma2_nn = 0.0;     // point estimate 1 + upsilon_hat/a^2
  double sigma2_max = 0.0;    // 1 + (upsilon_hat + halfwidth)/a^2
  double epsilon_pe = 0.0;
};

NnWorstCase worst_case_sigma2_max_nn(const MlpModel& model, const CalibrationRecord& calib,
                                     const FeatureVector& features, double epsilon_pe,
                                     IntervalForm form = IntervalForm::kEq24);

// Versioned little-endian container; the factor block is ~p(p+1)/2 doubles
// (about 79 MB at p = 4450).
void save_calibration(const CalibrationRecord& calib, const std::string& path);
CalibrationRecord load_calibration(const std::string& path);
std::size_t calibration_file_bytes(int p);

}  // namespace cvqkd
