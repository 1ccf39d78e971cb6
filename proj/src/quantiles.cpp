#include "cvqkd/quantiles.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cvqkd {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Continued fraction for the incomplete beta function (modified Lentz).
// Iteration demand grows like sqrt(max(a,b)) on the convergent branch, so
// the cap covers shape parameters up to ~10^8.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 20000;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete_beta: continued fraction did not converge");
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / kSqrt2); }

double normal_upper_quantile(double tail_prob) {
  if (!(tail_prob > 0.0 && tail_prob < 1.0)) {
    throw std::domain_error("normal_upper_quantile: tail probability must lie in (0,1)");
  }
  if (tail_prob == 0.5) return 0.0;
  const bool flip = tail_prob > 0.5;
  const double p = flip ? 1.0 - tail_prob : tail_prob;

  // Hastings rational approximation, |error| < 4.5e-4.
  const double t = std::sqrt(-2.0 * std::log(p));
  double z = t - (2.515517 + t * (0.802853 + t * 0.010328)) /
                     (1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308)));

  // Halley refinement of normal_sf(z) = p; cubic convergence.
  for (int i = 0; i < 3; ++i) {
    const double f = normal_sf(z) - p;
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * z * z);
    if (pdf <= 0.0) break;
    const double u = f / pdf;
    z += u / (1.0 - 0.5 * z * u);
  }
  return flip ? -z : z;
}

double gaussian_quantile(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw std::domain_error("gaussian_quantile: epsilon must lie in (0,1]");
  }
  if (epsilon == 1.0) return 0.0;
  return normal_upper_quantile(0.5 * epsilon);
}

double erf_inv(double x) {
  if (!(x > -1.0 && x < 1.0)) {
    throw std::domain_error("erf_inv: argument must lie in (-1,1)");
  }
  if (x == 0.0) return 0.0;
  return normal_upper_quantile(0.5 * (1.0 - x)) / kSqrt2;
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("incomplete_beta: shape parameters must be positive");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("incomplete_beta: x must lie in [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_cf(a, b, x) / a;
  }
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double dof) {
  if (!(dof > 0.0)) throw std::domain_error("student_t_sf: dof must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  const double x = dof / (dof + t * t);
  const double half_two_sided = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
  return t >= 0.0 ? half_two_sided : 1.0 - half_two_sided;
}

double student_t_upper_quantile(double tail_prob, double dof) {
  if (!(dof > 0.0)) {
    throw std::domain_error("student_t_upper_quantile: dof must be positive");
  }
  if (!(tail_prob > 0.0 && tail_prob < 1.0)) {
    throw std::domain_error("student_t_upper_quantile: tail probability must lie in (0,1)");
  }
  if (tail_prob == 0.5) return 0.0;
  if (tail_prob > 0.5) return -student_t_upper_quantile(1.0 - tail_prob, dof);

  double hi = 1.0;
  while (student_t_sf(hi, dof) > tail_prob) {
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("student_t_upper_quantile: bracket overflow");
  }
  double lo = 0.0;
  // Monotone bisection; survival function is strictly decreasing in t.
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (student_t_sf(mid, dof) > tail_prob) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double student_t_quantile(double epsilon, double dof) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw std::domain_error("student_t_quantile: epsilon must lie in (0,1]");
  }
  if (epsilon == 1.0) return 0.0;
  return student_t_upper_quantile(0.5 * epsilon, dof);
}

}  // namespace cvqkd
