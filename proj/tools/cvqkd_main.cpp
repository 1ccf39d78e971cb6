// Command-line front end: config-driven experiment pipelines plus small
// one-shot utilities (dataset dump, single estimates, key-rate report).
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cvqkd/channel.hpp"
#include "cvqkd/config.hpp"
#include "cvqkd/experiments.hpp"
#include "cvqkd/features.hpp"
#include "cvqkd/keyrate.hpp"
#include "cvqkd/mle.hpp"
#include "cvqkd/model_io.hpp"

namespace {

using namespace cvqkd;

struct CliState {
  std::string config_path;
  bool force = false;
  std::uint64_t seed_override = 0;
  bool seed_override_set = false;

  ExperimentConfig load() const {
    ExperimentConfig config = parse_config_file(config_path);
    if (seed_override_set) {
      config.master_seed = seed_override;
      config.seed_set = true;
      config.validate();
    }
    return config;
  }
};

void print_estimates(const ExperimentConfig& config, const SampleMoments& moments) {
  const MleEstimate est = mle_from_moments(moments, config.mu);
  const WorstCaseBounds wc = mle_worst_case(est, config.v_a, config.eps_pe);
  std::printf("m=%zu\n", moments.m);
  std::printf("mle: tau_hat=%.10g t_hat=%.10g sigma2_hat=%.10g\n", est.tau_hat, est.t_hat,
              est.sigma2_hat);
  std::printf("mle worst case (eps_pe=%.3g): t_min=%.10g sigma2_max=%.10g\n", wc.epsilon_pe,
              wc.t_min, wc.sigma2_max);
  if (config.estimator != "mle") {
    const MlpModel model = ensure_model(config);
    const CalibrationRecord calib = ensure_calibration(config, model, moments.m);
    const FeatureVector fv = features_from_moments(moments, config.amplification);
    const NnWorstCase nn = worst_case_sigma2_max_nn(
        model, calib, fv, config.eps_pe, interval_form_from_string(config.interval_form));
    std::printf("nn:  sigma2_hat=%.10g\n", nn.sigma2_nn);
    std::printf("nn worst case (eps_pe=%.3g, %s): sigma2_max=%.10g halfwidth=%.10g\n",
                nn.epsilon_pe, config.interval_form.c_str(), nn.sigma2_max, nn.halfwidth);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-size CV-QKD parameter-estimation laboratory"};
  app.require_subcommand(1);

  CliState state;
  app.add_option("-c,--config", state.config_path, "key=value config file")->required();
  app.add_flag("--force", state.force, "recompute cached artifacts and CSVs");
  app.add_option("--seed", state.seed_override, "override master_seed")
      ->each([&state](const std::string&) { state.seed_override_set = true; });

  // generate
  auto* generate = app.add_subcommand("generate", "simulate one trial and dump it as text");
  std::string gen_out = "trial.csv";
  double gen_distance = -1.0;
  double gen_n = -1.0;
  std::uint64_t gen_trial = 0;
  generate->add_option("-o,--out", gen_out, "output path");
  generate->add_option("--distance", gen_distance, "link distance in km (default: config)");
  generate->add_option("--n", gen_n, "total signals N (default: first n_list entry)");
  generate->add_option("--trial", gen_trial, "trial index within the ad-hoc region");
  generate->callback([&] {
    const ExperimentConfig config = state.load();
    const double d = gen_distance >= 0.0 ? gen_distance : config.distance_km;
    const double n_d = gen_n > 0.0 ? gen_n : config.n_list.front();
    const ChannelParams channel = config.channel_at_distance(d);
    const std::uint64_t tid = stage_trial_id(Stage::kSingle, 1, gen_trial);
    const TrialDataset data = make_trial(channel, static_cast<std::size_t>(n_d),
                                         config.fraction_est, config.master_seed, tid);
    save_trial(data, gen_out);
    std::printf("wrote %s (N=%zu, m=%zu, d=%.3f km)\n", gen_out.c_str(), data.n_total, data.n_est,
                d);
  });

  // train
  auto* train = app.add_subcommand("train", "train the noise regressor (cached by config hash)");
  train->callback([&] {
    const ExperimentConfig config = state.load();
    std::string path;
    const MlpModel model = ensure_model(config, state.force, &path);
    std::printf("model: %s (p=%d, checksum=%s)\n", path.c_str(), model.parameter_count(),
                u64_hex(model_checksum(model)).c_str());
  });

  // calibrate
  auto* calibrate_cmd = app.add_subcommand("calibrate", "build the prediction-interval factor");
  double cal_m = -1.0;
  calibrate_cmd->add_option("--m", cal_m, "block size the intervals will be used at "
                                          "(default: fraction_est * first n_list entry)");
  calibrate_cmd->callback([&] {
    const ExperimentConfig config = state.load();
    const MlpModel model = ensure_model(config, false);
    const std::size_t m =
        cal_m > 0.0 ? static_cast<std::size_t>(cal_m)
                    : static_cast<std::size_t>(config.fraction_est * config.n_list.front());
    std::string path;
    const CalibrationRecord record = ensure_calibration(config, model, m, state.force, &path);
    std::printf("calibration: %s (n_cal=%zu, p=%d, s=%.6g)\n", path.c_str(), record.n_cal,
                record.p, std::sqrt(record.s2));
  });

  // estimate
  auto* estimate = app.add_subcommand("estimate", "parameter estimates and worst-case bounds");
  std::string est_data;
  double est_distance = -1.0;
  double est_n = -1.0;
  std::uint64_t est_trial = 0;
  estimate->add_option("--data", est_data, "trial dump to estimate from (default: simulate)");
  estimate->add_option("--distance", est_distance, "link distance in km (default: config)");
  estimate->add_option("--n", est_n, "total signals N (default: first n_list entry)");
  estimate->add_option("--trial", est_trial, "trial index when simulating");
  estimate->callback([&] {
    const ExperimentConfig config = state.load();
    SampleMoments moments;
    if (!est_data.empty()) {
      const TrialDataset data = load_trial(est_data);
      moments = SampleMoments::from_samples(data.x_est(), data.y_est());
    } else {
      const double d = est_distance >= 0.0 ? est_distance : config.distance_km;
      const double n_d = est_n > 0.0 ? est_n : config.n_list.front();
      const ChannelParams channel = config.channel_at_distance(d);
      const auto n_total = static_cast<std::size_t>(n_d);
      const auto m = static_cast<std::size_t>(
          std::llround(config.fraction_est * static_cast<double>(n_total)));
      const std::uint64_t tid = stage_trial_id(Stage::kSingle, 2, est_trial);
      moments = simulate_moments(channel, m, config.master_seed, tid);
      std::printf("simulated at d=%.3f km: true t=%.10g sigma2=%.10g\n", d, channel.gain(),
                  channel.noise_variance());
    }
    print_estimates(config, moments);
  });

  // keyrate
  auto* keyrate = app.add_subcommand("keyrate", "single-trial key-rate report");
  double kr_distance = -1.0;
  double kr_n = -1.0;
  keyrate->add_option("--distance", kr_distance, "link distance in km (default: config)");
  keyrate->add_option("--n", kr_n, "total signals N (default: first n_list entry)");
  keyrate->callback([&] {
    ExperimentConfig config = state.load();
    if (kr_distance >= 0.0) config.distance_km = kr_distance;
    if (kr_n > 0.0) config.n_list = {kr_n};
    config.validate();
    for (const std::string& p : run_single_trial(config, state.force)) {
      std::printf("wrote %s\n", p.c_str());
    }
  });

  // experiment
  auto* experiment = app.add_subcommand("experiment", "run a full experiment pipeline");
  std::string experiment_id;
  experiment
      ->add_option("id", experiment_id,
                   "rmse_vs_m | keyrate_vs_distance | keyrate_vs_n | single_trial "
                   "(default: config)")
      ->expected(0, 1);
  experiment->callback([&] {
    ExperimentConfig config = state.load();
    if (!experiment_id.empty()) {
      config.experiment = experiment_id;
      config.validate();
    }
    for (const std::string& p : run_experiment(config, state.force)) {
      std::printf("wrote %s\n", p.c_str());
    }
  });

  // report
  auto* report = app.add_subcommand("report", "echo config provenance and artifact status");
  report->callback([&] {
    const ExperimentConfig config = state.load();
    std::printf("config hash: %s\n", config_hash_hex(config).c_str());
    std::printf("%s", canonical_config(config).c_str());
    const auto n_total = static_cast<std::size_t>(config.n_list.front());
    const SecurityParams sec = config.security(n_total);
    std::printf("epsilon budget at N=%zu: pe=%.3g cor=%.3g bar=%.3g pa=%.3g total=%.6g\n", n_total,
                sec.eps_pe, sec.eps_cor, sec.eps_bar, sec.eps_pa, sec.total_epsilon());
    const std::string model_path =
        config.model_path.empty() ? default_model_path(config) : config.model_path;
    std::printf("model artifact: %s (%s)\n", model_path.c_str(),
                std::filesystem::exists(model_path) ? "present" : "missing");
    for (const double m_d : config.m_list) {
      const auto m = static_cast<std::size_t>(m_d);
      const std::string cal = config.calibration_path.empty()
                                  ? default_calibration_path(config, m)
                                  : config.calibration_path;
      std::printf("calibration (m=%zu): %s (%s)\n", m, cal.c_str(),
                  std::filesystem::exists(cal) ? "present" : "missing");
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
