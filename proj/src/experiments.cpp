#include "cvqkd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cvqkd/features.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/model_io.hpp"
#include "cvqkd/train.hpp"

namespace cvqkd {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kCellBits = 16;
constexpr std::uint64_t kIndexBits = 28;

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::string>& rows) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << header << "\n";
  for (const std::string& row : rows) out << row << "\n";
  out.flush();
  if (!out) throw std::runtime_error("short write to " + path);
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Worst-case bounds can stray outside the physical region on unlucky
// draws (tiny m); the rate is evaluated at the nearest physical point.
KeyRateReport rate_from_bounds(const ExperimentConfig& config, const SecurityParams& sec,
                               double t_min, double sigma2_max, const std::string& tag) {
  const double t = std::clamp(t_min, 1e-12, 1.0);
  const double s2 = std::max(sigma2_max, 1.0);
  return secret_key_rate(config.v_a, t, s2, config.mu, sec, tag);
}

std::string keyrate_row(const ExperimentConfig& config, double n_total, double distance_km,
                        const KeyRateReport& report, const std::string& seed_hex,
                        const std::string& hash) {
  (void)config;
  std::string row = format_double(n_total);
  row += "," + format_double(distance_km);
  row += "," + report.method;
  row += "," + format_double(report.i_ab);
  row += "," + format_double(report.holevo);
  row += "," + format_double(report.delta_n);
  row += "," + format_double(report.k_eps);
  row += "," + seed_hex;
  row += "," + hash;
  return row;
}

struct TrialBounds {
  MleEstimate est;
  WorstCaseBounds mle;
  double sigma2_max_nn = 0.0;
};

TrialBounds bounds_for_trial(const ExperimentConfig& config, const SampleMoments& moments,
                             const MlpModel* model, const CalibrationRecord* calib) {
  TrialBounds out;
  out.est = mle_from_moments(moments, config.mu);
  out.mle = mle_worst_case(out.est, config.v_a, config.eps_pe);
  if (model != nullptr && calib != nullptr) {
    const FeatureVector fv = features_from_moments(moments, config.amplification);
    const NnWorstCase wc =
        worst_case_sigma2_max_nn(*model, *calib, fv, config.eps_pe,
                                 interval_form_from_string(config.interval_form));
    out.sigma2_max_nn = wc.sigma2_max;
  }
  return out;
}

// First down-crossing of k through zero along the grid, refined by
// bisection to 0.1 km.  Returns NaN when k never starts positive or never
// crosses inside the grid.
double crossing_distance(const std::vector<double>& grid, const std::vector<double>& k,
                         const std::function<double(double)>& k_at) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (grid.size() < 2 || k[0] <= 0.0) return nan;
  std::size_t bracket = grid.size();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (k[i] > 0.0 && k[i + 1] <= 0.0) {
      bracket = i;
      break;
    }
  }
  if (bracket == grid.size()) return nan;
  double lo = grid[bracket];
  double hi = grid[bracket + 1];
  while (hi - lo > 0.1) {
    const double mid = 0.5 * (lo + hi);
    if (k_at(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::uint64_t stage_trial_id(Stage stage, std::uint64_t cell, std::uint64_t index) {
  if (cell >= (std::uint64_t{1} << kCellBits)) {
    throw std::invalid_argument("stage_trial_id: cell out of range");
  }
  if (index >= (std::uint64_t{1} << kIndexBits)) {
    throw std::invalid_argument("stage_trial_id: index out of range");
  }
  return (static_cast<std::uint64_t>(stage) << (kCellBits + kIndexBits)) |
         (cell << kIndexBits) | index;
}

std::uint64_t cell_salt(std::size_t m) {
  const auto v = static_cast<std::uint64_t>(m);
  return (v ^ (v >> 16) ^ (v >> 32) ^ (v >> 48)) & 0xFFFFull;
}

double design_gain(const ExperimentConfig& config, std::uint64_t trial_id) {
  const auto [t_lo, t_hi] = config.gain_range();
  RngStream stream(config.master_seed, trial_id, kSubstreamParam);
  return t_lo + (t_hi - t_lo) * stream.next_double();
}

FeatureDataset simulate_feature_dataset(const ExperimentConfig& config, Stage stage,
                                        std::uint64_t cell, int count, std::size_t m) {
  if (count < 1) throw std::invalid_argument("simulate_feature_dataset: count must be positive");
  FeatureDataset out;
  out.features.resize(6, count);
  out.targets.resize(count);
  out.t_true.reserve(count);
  out.sigma2_true.reserve(count);
  out.moments.reserve(count);
  const bool report = static_cast<double>(count) * static_cast<double>(m) >= 2e8;
  const int step = std::max(1, count / 20);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t tid = stage_trial_id(stage, cell, static_cast<std::uint64_t>(i));
    const double t = design_gain(config, tid);
    const ChannelParams channel = ChannelParams::from_transmittance(
        config.v_a, config.xi, config.eta_eff, t * t, config.mu);
    const SampleMoments moments = simulate_moments(channel, m, config.master_seed, tid);
    const FeatureVector fv = features_from_moments(moments, config.amplification);
    out.features.col(i) = fv.to_vector();
    out.targets(i) = config.amplification * config.amplification * t * t * config.xi;
    out.t_true.push_back(t);
    out.sigma2_true.push_back(channel.noise_variance());
    out.moments.push_back(moments);
    if (report && ((i + 1) % step == 0 || i + 1 == count)) {
      std::fprintf(stderr, "[simulate] %d/%d trials (m=%zu)\n", i + 1, count, m);
    }
  }
  return out;
}

std::string default_model_path(const ExperimentConfig& config) {
  return config.output_dir + "/model-" + train_config_hash_hex(config) + ".bin";
}

std::string default_calibration_path(const ExperimentConfig& config, std::size_t m) {
  return config.output_dir + "/calib-" + calibration_config_hash_hex(config, m) + "-m" +
         std::to_string(m) + ".bin";
}

MlpModel ensure_model(const ExperimentConfig& config, bool force, std::string* path_out) {
  const std::string path =
      config.model_path.empty() ? default_model_path(config) : config.model_path;
  if (path_out) *path_out = path;
  if (!force && fs::exists(path)) {
    MlpModel model = load_model(path);
    if (model.amplification != config.amplification) {
      throw std::runtime_error("model " + path + " uses amplification " +
                               format_double(model.amplification) + " but the config wants " +
                               format_double(config.amplification) +
                               "; delete the file or point model_path elsewhere");
    }
    return model;
  }
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  const auto m_train = static_cast<std::size_t>(config.m_train);
  std::fprintf(stderr, "[train] simulating %d trials at m=%zu\n", config.train_trials, m_train);
  const FeatureDataset data =
      simulate_feature_dataset(config, Stage::kTrain, 0, config.train_trials, m_train);
  TrainConfig tc;
  tc.learning_rate = config.learning_rate;
  tc.weight_decay = config.weight_decay;
  tc.batch_size = config.batch_size;
  tc.epochs = config.epochs;
  tc.patience = config.patience;
  tc.val_fraction = config.val_fraction;
  tc.amplification = config.amplification;
  tc.seed = config.master_seed;
  std::fprintf(stderr, "[train] optimizing (up to %d epochs)\n", config.epochs);
  TrainResult result = train_mlp(data.features, data.targets, tc);
  save_model(result.model, path);
  save_training_log(result.log, path + ".log.csv");
  std::fprintf(stderr, "[train] best epoch %d, val mse %.6g -> %s\n", result.best_epoch,
               result.best_val_mse, path.c_str());
  return result.model;
}

CalibrationRecord ensure_calibration(const ExperimentConfig& config, const MlpModel& model,
                                     std::size_t m, bool force, std::string* path_out) {
  const std::string path = config.calibration_path.empty()
                               ? default_calibration_path(config, m)
                               : config.calibration_path;
  if (path_out) *path_out = path;
  if (!force && fs::exists(path)) {
    CalibrationRecord record = load_calibration(path);
    if (record.model_checksum != model_checksum(model)) {
      throw std::runtime_error("calibration " + path +
                               " was built for a different model; delete it or point "
                               "calibration_path elsewhere");
    }
    if (record.m_per_trial != m) {
      throw std::runtime_error("calibration " + path + " was built at m=" +
                               std::to_string(record.m_per_trial) + ", need m=" +
                               std::to_string(m));
    }
    return record;
  }
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  const std::size_t bytes = calibration_file_bytes(model.parameter_count());
  if (bytes > (std::size_t{50} << 20)) {
    std::fprintf(stderr, "[calibrate] factor file will be ~%zu MB\n", bytes >> 20);
  }
  std::fprintf(stderr, "[calibrate] %d jacobian rows at m=%zu\n", config.n_cal, m);
  const FeatureDataset data =
      simulate_feature_dataset(config, Stage::kCalibration, cell_salt(m), config.n_cal, m);
  CalibrationRecord record = calibrate(model, data.features, data.targets, config.ridge, m);
  save_calibration(record, path);
  std::fprintf(stderr, "[calibrate] s=%.6g, ridge=%.3g -> %s\n", std::sqrt(record.s2),
               record.ridge, path.c_str());
  return record;
}

std::vector<std::string> run_rmse_vs_m(const ExperimentConfig& config, bool force) {
  config.validate();
  const bool use_mle = config.estimator != "nn";
  const bool use_nn = config.estimator != "mle";
  const std::string hash = config_hash_hex(config);
  const std::string path = config.output_dir + "/rmse_vs_m-" + hash + ".csv";
  if (!force && fs::exists(path)) {
    std::fprintf(stderr, "[rmse_vs_m] cached: %s\n", path.c_str());
    return {path};
  }
  MlpModel model;
  if (use_nn) model = ensure_model(config);
  const std::string seed_hex = u64_hex(config.master_seed);
  std::vector<std::string> rows;
  for (std::size_t mi = 0; mi < config.m_list.size(); ++mi) {
    const auto m = static_cast<std::size_t>(config.m_list[mi]);
    CalibrationRecord calib;
    if (use_nn) calib = ensure_calibration(config, model, m);
    const FeatureDataset data =
        simulate_feature_dataset(config, Stage::kRmse, mi, config.trial_count, m);
    double se_mle = 0.0, gap_mle = 0.0, se_nn = 0.0, gap_nn = 0.0;
    for (int i = 0; i < config.trial_count; ++i) {
      const double sigma2_true = data.sigma2_true[i];
      const MleEstimate est = mle_from_moments(data.moments[i], config.mu);
      if (use_mle) {
        const double e = est.sigma2_hat - sigma2_true;
        se_mle += e * e;
        gap_mle += worst_case_sigma2_max(est, config.eps_pe) - sigma2_true;
      }
      if (use_nn) {
        const FeatureVector fv = features_from_moments(data.moments[i], config.amplification);
        const double e = predict_sigma2(model, fv) - sigma2_true;
        se_nn += e * e;
        const NnWorstCase wc =
            worst_case_sigma2_max_nn(model, calib, fv, config.eps_pe,
                                     interval_form_from_string(config.interval_form));
        gap_nn += wc.sigma2_max - sigma2_true;
      }
    }
    const double inv = 1.0 / static_cast<double>(config.trial_count);
    const std::string tail = "," + std::to_string(config.trial_count) + "," + seed_hex + "," + hash;
    if (use_mle) {
      rows.push_back(format_double(config.m_list[mi]) + ",mle," +
                     format_double(std::sqrt(se_mle * inv)) + "," + format_double(gap_mle * inv) +
                     tail);
    }
    if (use_nn) {
      rows.push_back(format_double(config.m_list[mi]) + ",nn," +
                     format_double(std::sqrt(se_nn * inv)) + "," + format_double(gap_nn * inv) +
                     tail);
    }
  }
  write_csv(path, "m,method,rmse,mean_bound_gap,trials,seed,config_hash", rows);
  std::fprintf(stderr, "[rmse_vs_m] wrote %s\n", path.c_str());
  return {path};
}

std::vector<std::string> run_keyrate_vs_distance(const ExperimentConfig& config, bool force) {
  config.validate();
  const bool use_mle = config.estimator != "nn";
  const bool use_nn = config.estimator != "mle";
  const std::string hash = config_hash_hex(config);
  const std::string path = config.output_dir + "/keyrate_vs_distance-" + hash + ".csv";
  const std::string cross_path = config.output_dir + "/crossings-" + hash + ".csv";
  if (!force && fs::exists(path) && fs::exists(cross_path)) {
    std::fprintf(stderr, "[keyrate_vs_distance] cached: %s\n", path.c_str());
    return {path, cross_path};
  }
  MlpModel model;
  if (use_nn) model = ensure_model(config);
  const std::string seed_hex = u64_hex(config.master_seed);
  const std::vector<double>& grid = config.distance_grid;
  std::vector<std::string> rows;
  std::vector<std::string> cross_rows;
  for (std::size_t ni = 0; ni < config.n_list.size(); ++ni) {
    const double n_total_d = config.n_list[ni];
    const auto n_total = static_cast<std::size_t>(n_total_d);
    const SecurityParams sec = config.security(n_total);
    const std::size_t m = sec.n_total - sec.n_key;
    CalibrationRecord calib;
    if (use_nn) calib = ensure_calibration(config, model, m);
    const MlpModel* model_ptr = use_nn ? &model : nullptr;
    const CalibrationRecord* calib_ptr = use_nn ? &calib : nullptr;

    std::vector<double> k_true(grid.size()), k_mle(grid.size()), k_nn(grid.size());
    for (std::size_t di = 0; di < grid.size(); ++di) {
      const ChannelParams channel = config.channel_at_distance(grid[di]);
      const KeyRateReport truth = secret_key_rate(config.v_a, channel.gain(),
                                                  channel.noise_variance(), config.mu, sec, "true");
      k_true[di] = truth.k_eps;
      rows.push_back(keyrate_row(config, n_total_d, grid[di], truth, seed_hex, hash));
      const std::uint64_t tid = stage_trial_id(Stage::kKeyrateDistance, ni, di);
      const SampleMoments moments = simulate_moments(channel, m, config.master_seed, tid);
      const TrialBounds tb = bounds_for_trial(config, moments, model_ptr, calib_ptr);
      if (use_mle) {
        const KeyRateReport r = rate_from_bounds(config, sec, tb.mle.t_min, tb.mle.sigma2_max, "mle");
        k_mle[di] = r.k_eps;
        rows.push_back(keyrate_row(config, n_total_d, grid[di], r, seed_hex, hash));
      }
      if (use_nn) {
        const KeyRateReport r = rate_from_bounds(config, sec, tb.mle.t_min, tb.sigma2_max_nn, "nn");
        k_nn[di] = r.k_eps;
        rows.push_back(keyrate_row(config, n_total_d, grid[di], r, seed_hex, hash));
      }
    }

    // Crossing refinement evaluates fresh trials at interior distances; a
    // per-method counter keeps the ids deterministic.
    auto estimator_rate = [&](double d, int method_id, std::uint64_t& counter) {
      const ChannelParams channel = config.channel_at_distance(d);
      const std::uint64_t tid =
          stage_trial_id(Stage::kCrossing, ni * 4 + static_cast<std::uint64_t>(method_id),
                         counter++);
      const SampleMoments moments = simulate_moments(channel, m, config.master_seed, tid);
      const TrialBounds tb = bounds_for_trial(config, moments, model_ptr, calib_ptr);
      const double s2 = (method_id == 2) ? tb.sigma2_max_nn : tb.mle.sigma2_max;
      return rate_from_bounds(config, sec, tb.mle.t_min, s2, "probe").k_eps;
    };

    const double cross_true = crossing_distance(grid, k_true, [&](double d) {
      const ChannelParams channel = config.channel_at_distance(d);
      return secret_key_rate(config.v_a, channel.gain(), channel.noise_variance(), config.mu, sec,
                             "true")
          .k_eps;
    });
    double cross_mle = std::numeric_limits<double>::quiet_NaN();
    double cross_nn = std::numeric_limits<double>::quiet_NaN();
    if (use_mle) {
      std::uint64_t counter = 0;
      cross_mle = crossing_distance(grid, k_mle, [&](double d) { return estimator_rate(d, 1, counter); });
    }
    if (use_nn) {
      std::uint64_t counter = 0;
      cross_nn = crossing_distance(grid, k_nn, [&](double d) { return estimator_rate(d, 2, counter); });
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::string tail = "," + seed_hex + "," + hash;
    cross_rows.push_back(format_double(n_total_d) + ",true," + format_double(cross_true) + "," +
                         format_double(nan) + tail);
    if (use_mle) {
      cross_rows.push_back(format_double(n_total_d) + ",mle," + format_double(cross_mle) + "," +
                           format_double(nan) + tail);
    }
    if (use_nn) {
      const double gain = (use_mle && std::isfinite(cross_mle) && std::isfinite(cross_nn))
                              ? cross_nn - cross_mle
                              : nan;
      cross_rows.push_back(format_double(n_total_d) + ",nn," + format_double(cross_nn) + "," +
                           format_double(gain) + tail);
    }
  }
  write_csv(path, "N,distance_km,method,i_ab,holevo,delta_n,k_eps,seed,config_hash", rows);
  write_csv(cross_path, "N,method,crossing_km,gain_vs_mle_km,seed,config_hash", cross_rows);
  std::fprintf(stderr, "[keyrate_vs_distance] wrote %s\n", path.c_str());
  return {path, cross_path};
}

std::vector<std::string> run_keyrate_vs_n(const ExperimentConfig& config, bool force) {
  config.validate();
  const bool use_mle = config.estimator != "nn";
  const bool use_nn = config.estimator != "mle";
  const std::string hash = config_hash_hex(config);
  const std::string path = config.output_dir + "/keyrate_vs_n-" + hash + ".csv";
  if (!force && fs::exists(path)) {
    std::fprintf(stderr, "[keyrate_vs_n] cached: %s\n", path.c_str());
    return {path};
  }
  MlpModel model;
  if (use_nn) model = ensure_model(config);
  const std::string seed_hex = u64_hex(config.master_seed);
  const ChannelParams channel = ChannelParams::from_transmittance(
      config.v_a, config.xi, config.eta_eff, config.fixed_transmittance, config.mu);
  std::vector<std::string> rows;
  for (std::size_t ni = 0; ni < config.n_list.size(); ++ni) {
    const double n_total_d = config.n_list[ni];
    const auto n_total = static_cast<std::size_t>(n_total_d);
    const SecurityParams sec = config.security(n_total);
    const std::size_t m = sec.n_total - sec.n_key;
    CalibrationRecord calib;
    if (use_nn) calib = ensure_calibration(config, model, m);
    const MlpModel* model_ptr = use_nn ? &model : nullptr;
    const CalibrationRecord* calib_ptr = use_nn ? &calib : nullptr;

    const KeyRateReport truth = secret_key_rate(config.v_a, channel.gain(),
                                                channel.noise_variance(), config.mu, sec, "true");
    std::vector<double> k_mle, k_nn;
    for (int trial = 0; trial < config.trial_count; ++trial) {
      const std::uint64_t tid =
          stage_trial_id(Stage::kKeyrateN, ni, static_cast<std::uint64_t>(trial));
      const SampleMoments moments = simulate_moments(channel, m, config.master_seed, tid);
      const TrialBounds tb = bounds_for_trial(config, moments, model_ptr, calib_ptr);
      if (use_mle) {
        k_mle.push_back(rate_from_bounds(config, sec, tb.mle.t_min, tb.mle.sigma2_max, "mle").k_eps);
      }
      if (use_nn) {
        k_nn.push_back(rate_from_bounds(config, sec, tb.mle.t_min, tb.sigma2_max_nn, "nn").k_eps);
      }
    }
    const std::string tail = "," + seed_hex + "," + hash;
    rows.push_back(format_double(n_total_d) + ",true," + format_double(truth.k_eps) + tail);
    if (use_mle) {
      rows.push_back(format_double(n_total_d) + ",mle," + format_double(median(k_mle)) + tail);
    }
    if (use_nn) {
      rows.push_back(format_double(n_total_d) + ",nn," + format_double(median(k_nn)) + tail);
    }
  }
  write_csv(path, "N,method,k_eps,seed,config_hash", rows);
  std::fprintf(stderr, "[keyrate_vs_n] wrote %s\n", path.c_str());
  return {path};
}

std::vector<std::string> run_single_trial(const ExperimentConfig& config, bool force) {
  config.validate();
  const bool use_mle = config.estimator != "nn";
  const bool use_nn = config.estimator != "mle";
  const std::string hash = config_hash_hex(config);
  const std::string path = config.output_dir + "/single_trial-" + hash + ".csv";
  if (!force && fs::exists(path)) {
    std::fprintf(stderr, "[single_trial] cached: %s\n", path.c_str());
    return {path};
  }
  MlpModel model;
  if (use_nn) model = ensure_model(config);
  const double n_total_d = config.n_list.front();
  const auto n_total = static_cast<std::size_t>(n_total_d);
  const SecurityParams sec = config.security(n_total);
  const std::size_t m = sec.n_total - sec.n_key;
  CalibrationRecord calib;
  if (use_nn) calib = ensure_calibration(config, model, m);
  const ChannelParams channel = config.channel_at_distance(config.distance_km);
  const std::uint64_t tid = stage_trial_id(Stage::kSingle, 0, 0);
  const SampleMoments moments = simulate_moments(channel, m, config.master_seed, tid);
  const TrialBounds tb = bounds_for_trial(config, moments, use_nn ? &model : nullptr,
                                          use_nn ? &calib : nullptr);

  const std::string seed_hex = u64_hex(config.master_seed);
  std::vector<std::string> rows;
  const KeyRateReport truth = secret_key_rate(config.v_a, channel.gain(),
                                              channel.noise_variance(), config.mu, sec, "true");
  rows.push_back(keyrate_row(config, n_total_d, config.distance_km, truth, seed_hex, hash));
  std::printf("single trial: d=%.3f km, N=%zu, m=%zu, seed=%s\n", config.distance_km, n_total, m,
              seed_hex.c_str());
  std::printf("  true      t=%.8f sigma2=%.8f k_eps=%.6g\n", channel.gain(),
              channel.noise_variance(), truth.k_eps);
  std::printf("  mle       t_hat=%.8f sigma2_hat=%.8f\n", tb.est.t_hat, tb.est.sigma2_hat);
  if (use_mle) {
    const KeyRateReport r = rate_from_bounds(config, sec, tb.mle.t_min, tb.mle.sigma2_max, "mle");
    rows.push_back(keyrate_row(config, n_total_d, config.distance_km, r, seed_hex, hash));
    std::printf("  mle wc    t_min=%.8f sigma2_max=%.8f k_eps=%.6g\n", tb.mle.t_min,
                tb.mle.sigma2_max, r.k_eps);
  }
  if (use_nn) {
    const KeyRateReport r = rate_from_bounds(config, sec, tb.mle.t_min, tb.sigma2_max_nn, "nn");
    rows.push_back(keyrate_row(config, n_total_d, config.distance_km, r, seed_hex, hash));
    std::printf("  nn wc     t_min=%.8f sigma2_max=%.8f k_eps=%.6g\n", tb.mle.t_min,
                tb.sigma2_max_nn, r.k_eps);
  }
  std::printf("  eps: pe=%.3g cor=%.3g bar=%.3g pa=%.3g -> total=%.6g\n", sec.eps_pe, sec.eps_cor,
              sec.eps_bar, sec.eps_pa, sec.total_epsilon());
  write_csv(path, "N,distance_km,method,i_ab,holevo,delta_n,k_eps,seed,config_hash", rows);
  return {path};
}

std::vector<std::string> run_experiment(const ExperimentConfig& config, bool force) {
  if (config.experiment == "rmse_vs_m") return run_rmse_vs_m(config, force);
  if (config.experiment == "keyrate_vs_distance") return run_keyrate_vs_distance(config, force);
  if (config.experiment == "keyrate_vs_n") return run_keyrate_vs_n(config, force);
  if (config.experiment == "single_trial") return run_single_trial(config, force);
  throw std::runtime_error("unknown experiment '" + config.experiment + "'");
}

}  // namespace cvqkd
