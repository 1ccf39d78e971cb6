#include "cvqkd/channel.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cvqkd {

double transmittance_from_distance(double distance_km, double eta_eff) {
  if (!(distance_km >= 0.0)) {
    throw std::invalid_argument("transmittance_from_distance: distance must be >= 0");
  }
  if (!(eta_eff > 0.0 && eta_eff <= 1.0)) {
    throw std::invalid_argument("transmittance_from_distance: eta_eff must lie in (0,1]");
  }
  return eta_eff * std::pow(10.0, -0.02 * distance_km);
}

double ChannelParams::transmittance() const {
  return transmittance_from_distance(distance_km, eta_eff);
}

double ChannelParams::gain() const { return std::sqrt(transmittance()); }

double ChannelParams::effective_gain() const { return gain() / std::sqrt(static_cast<double>(mu)); }

double ChannelParams::noise_variance() const { return 1.0 + transmittance() * xi; }

ChannelParams ChannelParams::from_distance(double v_a, double xi, double eta_eff,
                                           double distance_km, int mu) {
  ChannelParams p{v_a, xi, eta_eff, distance_km, mu};
  p.validate();
  return p;
}

ChannelParams ChannelParams::from_transmittance(double v_a, double xi, double eta_eff,
                                                double transmittance, int mu) {
  if (!(transmittance > 0.0 && transmittance <= eta_eff)) {
    throw std::invalid_argument("ChannelParams: transmittance must lie in (0, eta_eff]");
  }
  const double distance_km = 50.0 * std::log10(eta_eff / transmittance);
  ChannelParams p{v_a, xi, eta_eff, distance_km, mu};
  p.validate();
  return p;
}

void ChannelParams::validate() const {
  if (!(v_a > 0.0)) throw std::invalid_argument("ChannelParams: v_a must be > 0");
  if (!(xi >= 0.0)) throw std::invalid_argument("ChannelParams: xi must be >= 0");
  if (!(eta_eff > 0.0 && eta_eff <= 1.0)) {
    throw std::invalid_argument("ChannelParams: eta_eff must lie in (0,1]");
  }
  if (!(distance_km >= 0.0)) throw std::invalid_argument("ChannelParams: distance must be >= 0");
  if (mu != 1 && mu != 2) throw std::invalid_argument("ChannelParams: mu must be 1 or 2");
}

void SampleMoments::add(double x, double y) {
  ++m;
  sum_x += x;
  sum_y += y;
  sum_xx += x * x;
  sum_xy += x * y;
  sum_yy += y * y;
}

SampleMoments SampleMoments::from_samples(const Eigen::Ref<const Eigen::VectorXd>& x,
                                          const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("SampleMoments: x and y must have equal length");
  }
  SampleMoments mo;
  for (Eigen::Index i = 0; i < x.size(); ++i) mo.add(x[i], y[i]);
  return mo;
}

Eigen::VectorXd sample_alice(std::size_t count, double v_a, RngStream& stream) {
  if (!(v_a > 0.0)) throw std::invalid_argument("sample_alice: v_a must be > 0");
  const double sd = std::sqrt(v_a);
  Eigen::VectorXd x(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = sd * stream.next_normal();
  return x;
}

Eigen::VectorXd apply_channel(const Eigen::Ref<const Eigen::VectorXd>& x,
                              const ChannelParams& params, RngStream& stream) {
  params.validate();
  const double tau = params.effective_gain();
  const double sigma = std::sqrt(params.noise_variance());
  Eigen::VectorXd y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = tau * x[i] + sigma * stream.next_normal();
  return y;
}

TrialDataset make_trial(const ChannelParams& params, std::size_t n_total,
                        double fraction_est, std::uint64_t master_seed,
                        std::uint64_t trial_index) {
  params.validate();
  if (n_total < 2) throw std::invalid_argument("make_trial: n_total must be >= 2");
  if (!(fraction_est > 0.0 && fraction_est < 1.0)) {
    throw std::invalid_argument("make_trial: fraction_est must lie in (0,1)");
  }
  const std::size_t m = static_cast<std::size_t>(std::llround(fraction_est * n_total));
  if (m < 2 || m >= n_total) {
    throw std::invalid_argument("make_trial: estimation block must satisfy 2 <= m < N");
  }
  TrialDataset data;
  data.n_total = n_total;
  data.n_est = m;
  data.seed = SeedRecord{master_seed, trial_index};
  RngStream alice(master_seed, trial_index, kSubstreamAlice);
  RngStream noise(master_seed, trial_index, kSubstreamNoise);
  data.x = sample_alice(n_total, params.v_a, alice);
  data.y = apply_channel(data.x, params, noise);
  return data;
}

SampleMoments simulate_moments(const ChannelParams& params, std::size_t m,
                               std::uint64_t master_seed, std::uint64_t trial_index) {
  params.validate();
  if (m < 2) throw std::invalid_argument("simulate_moments: m must be >= 2");
  const double sd = std::sqrt(params.v_a);
  const double tau = params.effective_gain();
  const double sigma = std::sqrt(params.noise_variance());
  RngStream alice(master_seed, trial_index, kSubstreamAlice);
  RngStream noise(master_seed, trial_index, kSubstreamNoise);
  SampleMoments mo;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = sd * alice.next_normal();
    const double y = tau * x + sigma * noise.next_normal();
    mo.add(x, y);
  }
  return mo;
}

void save_trial(const TrialDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_trial: cannot open " + path);
  char line[96];
  std::snprintf(line, sizeof(line), "cvqkd-trial v1, N=%zu, m=%zu, seed=%016llx%016llx\n",
                data.n_total, data.n_est,
                static_cast<unsigned long long>(data.seed.master_seed),
                static_cast<unsigned long long>(data.seed.trial_index));
  out << line;
  for (Eigen::Index i = 0; i < data.x.size(); ++i) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g\n", data.x[i], data.y[i]);
    out << line;
  }
  if (!out) throw std::runtime_error("save_trial: write failed for " + path);
}

TrialDataset load_trial(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_trial: cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("load_trial: empty file " + path);
  std::size_t n_total = 0, m = 0;
  char seed_hex[40] = {0};
  if (std::sscanf(header.c_str(), "cvqkd-trial v1, N=%zu, m=%zu, seed=%39s",
                  &n_total, &m, seed_hex) != 3) {
    throw std::runtime_error("load_trial: malformed header in " + path);
  }
  if (n_total < 2 || m < 2 || m >= n_total) {
    throw std::runtime_error("load_trial: inconsistent N/m in " + path);
  }
  TrialDataset data;
  data.n_total = n_total;
  data.n_est = m;
  const std::size_t hex_len = std::strlen(seed_hex);
  if (hex_len == 0 || hex_len > 32) {
    throw std::runtime_error("load_trial: malformed seed field in " + path);
  }
  if (hex_len > 16) {
    const std::string master(seed_hex, hex_len - 16);
    const std::string trial(seed_hex + (hex_len - 16), 16);
    data.seed.master_seed = std::stoull(master, nullptr, 16);
    data.seed.trial_index = std::stoull(trial, nullptr, 16);
  } else {
    data.seed.master_seed = std::stoull(seed_hex, nullptr, 16);
    data.seed.trial_index = 0;
  }
  data.x.resize(static_cast<Eigen::Index>(n_total));
  data.y.resize(static_cast<Eigen::Index>(n_total));
  std::string row;
  for (std::size_t i = 0; i < n_total; ++i) {
    if (!std::getline(in, row)) throw std::runtime_error("load_trial: truncated file " + path);
    double xv = 0.0, yv = 0.0;
    if (std::sscanf(row.c_str(), "%lf,%lf", &xv, &yv) != 2) {
      throw std::runtime_error("load_trial: malformed row in " + path);
    }
    data.x[static_cast<Eigen::Index>(i)] = xv;
    data.y[static_cast<Eigen::Index>(i)] = yv;
  }
  return data;
}

}  // namespace cvqkd
