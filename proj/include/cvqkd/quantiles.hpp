#pragma once

namespace cvqkd {

// P(Z <= z) and P(Z > z) for a standard normal, via std::erfc.
double normal_cdf(double z);
double normal_sf(double z);

// z such that P(Z > z) = tail_prob, 0 < tail_prob < 1.
// Hastings initial guess refined by Halley steps on the erfc-based
// survival function; accurate to a few ulp over the full double range.
double normal_upper_quantile(double tail_prob);

// Two-sided convention used by the worst-case bounds: returns z with
// P(Z > z) = epsilon/2.  Domain 0 < epsilon <= 1; epsilon = 1 gives 0.
double gaussian_quantile(double epsilon);

// Inverse error function on (-1, 1).  Provided so the exact-quantile and
// the erf-inverse-without-sqrt2 conventions can be compared side by side.
double erf_inv(double x);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Survival function of Student's t with dof degrees of freedom (dof > 0,
// not necessarily integer).
double student_t_sf(double t, double dof);

// t such that P(T > t) = tail_prob for Student's t.
double student_t_upper_quantile(double tail_prob, double dof);

// Same epsilon/2 convention as gaussian_quantile.
double student_t_quantile(double epsilon, double dof);

}  // namespace cvqkd
