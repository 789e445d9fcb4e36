#pragma once

#include <string>
#include <vector>

#include "stad/datagen.hpp"
#include "stad/shrinkage.hpp"

namespace stad {

/// One estimator entry of an experiment, with its parameters.
struct EstimatorSpec {
  EstimatorTag tag = EstimatorTag::LWD;
  double noise_floor = 1.0;  // FML sigma^2 / LWD clip floor
  Index rank = 0;            // AndersonR spike count

  std::string name() const { return to_string(tag); }
};

struct ExperimentConfig {
  Scenario scenario;  // population model, amplitude, distribution, master seed
  std::vector<Index> n_values;
  std::vector<EstimatorSpec> estimators;
  int trials = 100;
  double tau = 3.0;
  double q = 0.9;
  std::vector<double> percentiles = {10.0, 50.0, 90.0};
  int workers = 1;
  int fa_training_draws = 20;
  Index fa_test_draws = 100000;
  int coverage_trials = 2000;
  std::string config_hash;  // set by the config loader; copied into outputs

  void validate() const;
};

struct TrialRecord {
  std::string estimator;
  Index n = 0;
  int trial = 0;
  double eta = 0.0;
  double eta_tilde = 0.0;
  double xi = 0.0;
  double nu_sq = 0.0;
  double nu_hat = 0.0;
  double runtime_s = 0.0;
};

struct PercentileRow {
  std::string estimator;
  Index n = 0;
  std::string metric;
  double percentile = 0.0;
  double value = 0.0;
};

struct SweepTable {
  std::vector<TrialRecord> trials;
  std::vector<PercentileRow> percentiles;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  double wall_seconds = 0.0;
};

struct FalseAlarmRow {
  std::string estimator;
  Index n = 0;
  int draw = 0;
  double xi = 0.0;
  double predicted_pfa = 0.0;   // exp(-tau / xi), exact given the training
  double empirical_pfa = 0.0;   // rate over fa_test_draws H0 returns
  double std_error = 0.0;       // binomial s.e. at the predicted rate
};

struct CoverageRow {
  std::string estimator;
  Index n = 0;
  double q = 0.0;
  int trials = 0;
  double empirical_coverage = 0.0;
};

/// Population covariance and its coloring factor, resolved from a config.
struct PopulationModel {
  HermitianMatrix covariance;
  CMatrix factor;  // F with F F' = R
};

PopulationModel resolve_population(const ExperimentConfig& config);

/// One (estimator, n, trial) cell. Deterministic in
/// (master seed, estimator, n, trial_index); the steering vector, training
/// matrix, and test return depend only on (master seed, n, trial_index), so
/// all estimators see identical data within a trial.
TrialRecord run_trial(const ExperimentConfig& config,
                      const EstimatorSpec& estimator, Index n,
                      int trial_index);

/// Full Monte Carlo sweep with nearest-rank percentile reduction. Trials are
/// distributed over config.workers threads; the result is a pure function of
/// the config regardless of worker count. LWD is skipped (with a warning)
/// for any n equal to p.
SweepTable sweep(const ExperimentConfig& config);

/// Conditional false-alarm validation: per training draw, the exact
/// conditional rate exp(-tau / xi) and an empirical rate from H0 returns.
std::vector<FalseAlarmRow> false_alarm_experiment(const ExperimentConfig& config);

/// Confidence-interval coverage of the conditional detection probability.
std::vector<CoverageRow> coverage_experiment(const ExperimentConfig& config);

/// Nearest-rank percentile of a sample (0 maps to the minimum).
double nearest_rank_percentile(std::vector<double> values, double percentile);

}  // namespace stad
