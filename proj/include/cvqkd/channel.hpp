#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "cvqkd/rng.hpp"

namespace cvqkd {

// Substream roles within one trial's RNG allotment.
inline constexpr std::uint32_t kSubstreamAlice = 0;
inline constexpr std::uint32_t kSubstreamNoise = 1;
inline constexpr std::uint32_t kSubstreamParam = 2;

// Fixed-attenuation fiber: 0.2 dB/km on top of the detector efficiency.
double transmittance_from_distance(double distance_km, double eta_eff);

// Physical layer of one Gaussian-modulated coherent-state link with
// heterodyne (mu = 2) or homodyne (mu = 1) detection.  The per-quadrature
// linear model is y = (t/sqrt(mu)) * x + z with z ~ N(0, sigma2) and
// sigma2 = 1 + t^2 * xi in shot-noise units.
struct ChannelParams {
  double v_a = 5.0;
  double xi = 0.01;
  double eta_eff = 0.8;
  double distance_km = 0.0;
  int mu = 2;

  double transmittance() const;          // T in (0, eta_eff]
  double gain() const;                   // t = sqrt(T)
  double effective_gain() const;         // tau = t / sqrt(mu)
  double noise_variance() const;         // sigma2 = 1 + t^2 * xi >= 1

  static ChannelParams from_distance(double v_a, double xi, double eta_eff,
                                     double distance_km, int mu);
  static ChannelParams from_transmittance(double v_a, double xi, double eta_eff,
                                          double transmittance, int mu);
  void validate() const;
};

struct SeedRecord {
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;
};

// One simulated block of N signals; the first n_est pairs are disclosed for
// parameter estimation, the rest feed key extraction.
struct TrialDataset {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  std::size_t n_total = 0;
  std::size_t n_est = 0;
  SeedRecord seed;

  auto x_est() const { return x.head(static_cast<Eigen::Index>(n_est)); }
  auto y_est() const { return y.head(static_cast<Eigen::Index>(n_est)); }
};

// Raw sums of one sample block; sufficient statistics for the gain/noise
// estimators and the feature map, accumulated in a single streaming pass.
struct SampleMoments {
  std::size_t m = 0;
  double sum_x = 0.0;
  double sum_y = 0.0;
  double sum_xx = 0.0;
  double sum_xy = 0.0;
  double sum_yy = 0.0;

  void add(double x, double y);
  static SampleMoments from_samples(const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const Eigen::Ref<const Eigen::VectorXd>& y);
};

// Alice's modulation: x_i ~ N(0, v_a), i.i.d.
Eigen::VectorXd sample_alice(std::size_t count, double v_a, RngStream& stream);

// Applies the linear channel to a block of Alice symbols.
Eigen::VectorXd apply_channel(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const ChannelParams& params, RngStream& stream);

// Full trial: N signals, m = round(fraction_est * N) disclosed.
TrialDataset make_trial(const ChannelParams& params, std::size_t n_total,
                        double fraction_est, std::uint64_t master_seed,
                        std::uint64_t trial_index);

// Streaming equivalent of make_trial for the estimation block only: same
// draws in the same order, but O(1) memory.
SampleMoments simulate_moments(const ChannelParams& params, std::size_t m,
                               std::uint64_t master_seed, std::uint64_t trial_index);

// Text dump: header line `cvqkd-trial v1, N=<int>, m=<int>, seed=<hex>`
// followed by one `x,y` row per signal at 17 significant digits.
void save_trial(const TrialDataset& data, const std::string& path);
TrialDataset load_trial(const std::string& path);

}  // namespace cvqkd
