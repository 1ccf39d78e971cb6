#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvqkd/channel.hpp"
#include "cvqkd/keyrate.hpp"

namespace cvqkd {

// Experiment configuration, read from a `key = value` text file (one pair
// per line, '#' comments).  Every run is pinned by master_seed; there is no
// wall-clock fallback anywhere.
struct ExperimentConfig {
  // Channel and protocol.
  double v_a = 5.0;
  double xi = 0.01;
  double eta_eff = 0.8;
  int mu = 2;
  double beta = 0.95;
  double p_ec = 0.9;
  int dim_hx = 2;
  double fraction_est = 0.5;
  double eps_pe = 1e-10;
  double eps_cor = 1e-10;
  double eps_bar = 1e-10;
  double eps_pa = 1e-10;

  // Harness.
  std::string experiment = "single_trial";  // rmse_vs_m | keyrate_vs_distance | keyrate_vs_n
  std::uint64_t master_seed = 0;
  bool seed_set = false;
  std::string estimator = "both";           // mle | nn | both
  std::vector<double> m_list = {1e4, 1e5, 1e6};
  std::vector<double> n_list = {2e6};
  std::vector<double> distance_grid;        // default filled by finalize()
  double fixed_transmittance = 0.2;         // keyrate_vs_n operating point
  double distance_km = 30.10299956639812;   // single_trial operating point
  int trial_count = 100;
  std::string output_dir = "out";
  std::string model_path;                   // empty: derived from config hash
  std::string calibration_path;             // empty: derived from config hash

  // Training.
  int train_trials = 10000;
  double m_train = 1e5;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  int batch_size = 256;
  int epochs = 200;
  int patience = 20;
  double val_fraction = 0.1;
  double amplification = 10.0;
  double d_min = 0.0;                       // design range for the gain draw
  double d_max = 200.0;

  // Calibration / interval.
  int n_cal = 17800;
  double ridge = -1.0;                      // negative: 1e-8 * trace/p default
  std::string interval_form = "eq24";

  ChannelParams channel_at_distance(double d_km) const;
  SecurityParams security(std::size_t n_total) const;
  // Gain range [t_lo, t_hi] induced by [d_min, d_max].
  std::pair<double, double> gain_range() const;

  void validate() const;
};

// Parses a config file; unknown keys and malformed values are errors.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

// Canonical serialization (sorted keys, %.17g values) and its FNV-1a hash;
// all derived artifact/CSV names key off this.
std::string canonical_config(const ExperimentConfig& config);
std::string config_hash_hex(const ExperimentConfig& config);

// Subset hashes used for stage caching.
std::string train_config_hash_hex(const ExperimentConfig& config);
std::string calibration_config_hash_hex(const ExperimentConfig& config, std::size_t m);

std::string format_double(double v);  // %.17g
std::string u64_hex(std::uint64_t v);  // 16 lowercase hex digits

}  // namespace cvqkd
