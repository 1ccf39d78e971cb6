#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "cvqkd/channel.hpp"
#include "cvqkd/config.hpp"
#include "cvqkd/delta_method.hpp"
#include "cvqkd/mle.hpp"
#include "cvqkd/mlp.hpp"

namespace cvqkd {

// Pipeline stages own disjoint trial-id regions so that training,
// calibration and evaluation draws can never overlap.
enum class Stage : std::uint64_t {
  kSingle = 0,
  kTrain = 1,
  kCalibration = 2,
  kRmse = 3,
  kCoverage = 4,
  kKeyrateDistance = 5,
  kKeyrateN = 6,
  kCrossing = 7,
};

// trial_id = stage:4 | cell:16 | index:28 (bit widths checked).
std::uint64_t stage_trial_id(Stage stage, std::uint64_t cell, std::uint64_t index);

// 16-bit fold of a block size, used as the cell salt where one stage runs
// at several m.
std::uint64_t cell_salt(std::size_t m);

// Gain drawn uniformly from the design range induced by [d_min, d_max],
// from the trial's parameter substream.
double design_gain(const ExperimentConfig& config, std::uint64_t trial_id);

// One simulated batch of trials: per trial a design-drawn gain, m channel
// uses reduced to moments, the feature map, and the scaled-noise target
// a^2 t^2 xi.  Memory is O(count), independent of m.
struct FeatureDataset {
  Eigen::MatrixXd features;          // 6 x count
  Eigen::VectorXd targets;
  std::vector<double> t_true;
  std::vector<double> sigma2_true;
  std::vector<SampleMoments> moments;
};

FeatureDataset simulate_feature_dataset(const ExperimentConfig& config, Stage stage,
                                        std::uint64_t cell, int count, std::size_t m);

std::string default_model_path(const ExperimentConfig& config);
std::string default_calibration_path(const ExperimentConfig& config, std::size_t m);

// Loads the model artifact if present, otherwise trains and saves it.
// The artifact name is keyed by the hash of every config key the training
// outcome depends on.
MlpModel ensure_model(const ExperimentConfig& config, bool force = false,
                      std::string* path_out = nullptr);

// Same contract for the calibration artifact at block size m.
CalibrationRecord ensure_calibration(const ExperimentConfig& config, const MlpModel& model,
                                     std::size_t m, bool force = false,
                                     std::string* path_out = nullptr);

// Experiment drivers.  Each writes CSVs under config.output_dir, named by
// the config hash; existing outputs are reused unless force is set.
// Returned paths are the files belonging to the run.
std::vector<std::string> run_rmse_vs_m(const ExperimentConfig& config, bool force = false);
std::vector<std::string> run_keyrate_vs_distance(const ExperimentConfig& config,
                                                 bool force = false);
std::vector<std::string> run_keyrate_vs_n(const ExperimentConfig& config, bool force = false);
std::vector<std::string> run_single_trial(const ExperimentConfig& config, bool force = false);

// Dispatch on config.experiment.
std::vector<std::string> run_experiment(const ExperimentConfig& config, bool force = false);

}  // namespace cvqkd
