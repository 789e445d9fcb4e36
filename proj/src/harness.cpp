#include "stad/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <mutex>
#include <thread>

#include "stad/covariance_io.hpp"
#include "stad/detection.hpp"

namespace stad {

void ExperimentConfig::validate() const {
  if (scenario.p < 1) {
    throw InputError("config: p must be positive");
  }
  if (!scenario.spectrum.has_value() && !scenario.covariance_path.has_value()) {
    throw InputError("config: either a spiked spectrum or a covariance file "
                     "is required");
  }
  if (n_values.empty()) {
    throw InputError("config: n_values must be nonempty");
  }
  for (Index n : n_values) {
    if (n < 1) {
      throw InputError("config: every n must be positive");
    }
  }
  if (estimators.empty()) {
    throw InputError("config: at least one estimator is required");
  }
  if (trials < 1) {
    throw InputError("config: trials must be at least 1");
  }
  if (!(tau >= 0.0)) {
    throw InputError("config: tau must be nonnegative");
  }
  if (!(q >= 0.0) || q >= 1.0) {
    throw InputError("config: q must lie in [0, 1)");
  }
  if (!std::is_sorted(percentiles.begin(), percentiles.end())) {
    throw InputError("config: percentiles must be sorted");
  }
  for (double pct : percentiles) {
    if (pct < 0.0 || pct > 100.0) {
      throw InputError("config: percentiles must lie in [0, 100]");
    }
  }
  if (workers < 1) {
    throw InputError("config: workers must be at least 1");
  }
  if (fa_training_draws < 1 || fa_test_draws < 1 || coverage_trials < 1) {
    throw InputError("config: draw counts must be positive");
  }
  for (const EstimatorSpec& est : estimators) {
    if (!(est.noise_floor > 0.0)) {
      throw InputError("config: noise_floor must be positive");
    }
    if (est.rank < 0 || est.rank >= scenario.p) {
      throw InputError("config: AndersonR rank must lie in [0, p)");
    }
  }
  for (Index n : n_values) {
    if (n == scenario.p) {
      std::cerr << "warning: configuration includes n = p = " << n
                << " (gamma = 1); the kernel shrinkage estimator is "
                   "disabled at that sample count\n";
    }
  }
}

PopulationModel resolve_population(const ExperimentConfig& config) {
  if (config.scenario.covariance_path.has_value()) {
    HermitianMatrix r = load_covariance(*config.scenario.covariance_path);
    if (r.dim() != config.scenario.p) {
      throw InputError("config: covariance file dimension " +
                       std::to_string(r.dim()) + " does not match p = " +
                       std::to_string(config.scenario.p));
    }
    CMatrix f = sqrt_factor(r);
    return PopulationModel{std::move(r), std::move(f)};
  }
  HermitianMatrix r = spiked_covariance(*config.scenario.spectrum);
  CMatrix f = sqrt_factor(r);
  return PopulationModel{std::move(r), std::move(f)};
}

namespace {

struct TrialData {
  CVector s;
  CMatrix x_train;
  EigenSystem s_eig;
  CVector x_h1;
};

TrialData make_trial_data(const ExperimentConfig& config,
                          const PopulationModel& pop, Index n,
                          int trial_index) {
  const std::uint64_t seed = config.scenario.seed;
  const auto nn = static_cast<std::uint64_t>(n);
  const auto tt = static_cast<std::uint64_t>(trial_index);
  RngStream steering_rng(seed, "steering", nn, tt);
  RngStream training_rng(seed, "training", nn, tt);
  RngStream test_rng(seed, "test", nn, tt);

  TrialData data;
  data.s = sample_steering(config.scenario.p, steering_rng);
  data.x_train = sample_training_with_factor(
      pop.factor, n, config.scenario.distribution, training_rng);
  data.s_eig = hermitian_eig(scm(data.x_train));
  data.x_h1 = sample_test_vector_with_factor(pop.factor, data.s,
                                             config.scenario.amplitude,
                                             Hypothesis::H1, test_rng);
  return data;
}

ShrinkageResult fit_estimator(const EstimatorSpec& spec, const TrialData& data,
                              const PopulationModel& pop) {
  switch (spec.tag) {
    case EstimatorTag::SCM:
      return ShrinkageResult{data.s_eig.eigenvectors, data.s_eig.eigenvalues,
                             EstimatorTag::SCM,
                             reconstruct(data.s_eig.eigenvectors,
                                         data.s_eig.eigenvalues)};
    case EstimatorTag::Oracle:
      return oracle_shrinker(data.s_eig, pop.covariance);
    case EstimatorTag::FML:
      return fml(data.s_eig, spec.noise_floor);
    case EstimatorTag::AndersonR:
      return anderson(data.s_eig, spec.rank);
    case EstimatorTag::LWLinear:
      return lw_linear(data.x_train);
    case EstimatorTag::LWD:
      return lwd_shrink(data.x_train, spec.noise_floor);
  }
  throw InputError("fit_estimator: unknown estimator tag");
}

TrialRecord evaluate_trial(const ExperimentConfig& config,
                           const PopulationModel& pop, const TrialData& data,
                           const EstimatorSpec& spec, Index n,
                           int trial_index) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.estimator = spec.name();
  rec.n = n;
  rec.trial = trial_index;
  try {
    const ShrinkageResult fit = fit_estimator(spec, data, pop);
    rec.eta = nsinr(data.s, fit.matrix, pop.covariance);
    rec.eta_tilde = eta_tilde(fit.matrix, pop.covariance);
    rec.xi = xi(data.s, fit.matrix, pop.covariance);
    rec.nu_sq = effective_sinr(data.s, fit.matrix, pop.covariance,
                               config.scenario.amplitude);
    rec.nu_hat = nu_hat(data.s, fit.matrix, data.x_h1);
  } catch (const std::exception& e) {
    throw NumericalError("trial failed (estimator=" + spec.name() +
                         ", n=" + std::to_string(n) +
                         ", trial=" + std::to_string(trial_index) +
                         "): " + e.what());
  }
  rec.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return rec;
}

/// Runs fn(i) for i in [0, count) on the configured number of workers.
/// Exceptions are captured and rethrown on the caller thread.
void parallel_for(int workers, std::size_t count,
                  const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers), count));
  pool.reserve(static_cast<std::size_t>(spawn));
  for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

bool estimator_enabled(const EstimatorSpec& spec, Index n, Index p) {
  return !(spec.tag == EstimatorTag::LWD && n == p);
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& config,
                      const EstimatorSpec& estimator, Index n,
                      int trial_index) {
  config.validate();
  const PopulationModel pop = resolve_population(config);
  const TrialData data = make_trial_data(config, pop, n, trial_index);
  return evaluate_trial(config, pop, data, estimator, n, trial_index);
}

SweepTable sweep(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const PopulationModel pop = resolve_population(config);
  const Index p = config.scenario.p;

  struct Cell {
    Index n;
    int trial;
  };
  std::vector<Cell> cells;
  for (Index n : config.n_values) {
    for (int t = 0; t < config.trials; ++t) {
      cells.push_back(Cell{n, t});
    }
  }

  // records[cell][estimator], in canonical order independent of scheduling.
  std::vector<std::vector<TrialRecord>> records(cells.size());
  parallel_for(config.workers, cells.size(), [&](std::size_t i) {
    const Cell cell = cells[i];
    const TrialData data = make_trial_data(config, pop, cell.n, cell.trial);
    for (const EstimatorSpec& spec : config.estimators) {
      if (!estimator_enabled(spec, cell.n, p)) continue;
      records[i].push_back(
          evaluate_trial(config, pop, data, spec, cell.n, cell.trial));
    }
  });

  SweepTable table;
  table.config_hash = config.config_hash;
  table.master_seed = config.scenario.seed;
  for (const auto& group : records) {
    table.trials.insert(table.trials.end(), group.begin(), group.end());
  }
  std::stable_sort(table.trials.begin(), table.trials.end(),
                   [](const TrialRecord& a, const TrialRecord& b) {
                     if (a.estimator != b.estimator)
                       return a.estimator < b.estimator;
                     if (a.n != b.n) return a.n < b.n;
                     return a.trial < b.trial;
                   });

  const std::vector<std::pair<std::string, double TrialRecord::*>> metrics = {
      {"eta", &TrialRecord::eta},
      {"eta_tilde", &TrialRecord::eta_tilde},
      {"xi", &TrialRecord::xi},
      {"nu_sq", &TrialRecord::nu_sq},
      {"nu_hat", &TrialRecord::nu_hat},
  };
  for (const EstimatorSpec& spec : config.estimators) {
    for (Index n : config.n_values) {
      if (!estimator_enabled(spec, n, p)) continue;
      std::vector<const TrialRecord*> group;
      for (const TrialRecord& rec : table.trials) {
        if (rec.estimator == spec.name() && rec.n == n) {
          group.push_back(&rec);
        }
      }
      for (const auto& [metric_name, member] : metrics) {
        std::vector<double> values;
        values.reserve(group.size());
        for (const TrialRecord* rec : group) {
          values.push_back(rec->*member);
        }
        for (double pct : config.percentiles) {
          table.percentiles.push_back(PercentileRow{
              spec.name(), n, metric_name, pct,
              nearest_rank_percentile(values, pct)});
        }
      }
    }
  }

  table.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return table;
}

std::vector<FalseAlarmRow> false_alarm_experiment(
    const ExperimentConfig& config) {
  config.validate();
  if (!(config.tau > 0.0)) {
    throw InputError("false_alarm_experiment: tau must be positive");
  }
  const PopulationModel pop = resolve_population(config);
  const Index p = config.scenario.p;

  struct Cell {
    std::size_t estimator;
    Index n;
    int draw;
  };
  std::vector<Cell> cells;
  for (std::size_t e = 0; e < config.estimators.size(); ++e) {
    for (Index n : config.n_values) {
      if (!estimator_enabled(config.estimators[e], n, p)) continue;
      for (int d = 0; d < config.fa_training_draws; ++d) {
        cells.push_back(Cell{e, n, d});
      }
    }
  }

  std::vector<FalseAlarmRow> rows(cells.size());
  parallel_for(config.workers, cells.size(), [&](std::size_t i) {
    const Cell cell = cells[i];
    const EstimatorSpec& spec = config.estimators[cell.estimator];
    const std::uint64_t seed = config.scenario.seed;
    const auto nn = static_cast<std::uint64_t>(cell.n);
    const auto dd = static_cast<std::uint64_t>(cell.draw);
    RngStream steering_rng(seed, "fa-steering", nn, dd);
    RngStream training_rng(seed, "fa-training", nn, dd);
    RngStream test_rng(seed, "fa-test", nn, dd);

    const CVector s = sample_steering(p, steering_rng);
    const CMatrix x_train = sample_training_with_factor(
        pop.factor, cell.n, config.scenario.distribution, training_rng);
    TrialData data;
    data.s = s;
    data.x_train = x_train;
    data.s_eig = hermitian_eig(scm(x_train));
    const ShrinkageResult fit = fit_estimator(spec, data, pop);

    FalseAlarmRow row;
    row.estimator = spec.name();
    row.n = cell.n;
    row.draw = cell.draw;
    row.xi = xi(s, fit.matrix, pop.covariance);
    row.predicted_pfa = pfa_conditional(config.tau, row.xi);

    // Empirical rate over H0 returns x = F z. With w = R_hat^{-1} s and
    // g = F' w, the statistic reduces to |g' z|^2 / (s' w), so each draw
    // costs O(p).
    Eigen::LLT<CMatrix> llt(fit.matrix.mat());
    if (llt.info() != Eigen::Success) {
      throw NumericalError("false_alarm_experiment: estimate is not "
                           "positive definite");
    }
    const CVector w = llt.solve(s);
    const double denom = s.dot(w).real();
    const CVector g = pop.factor.adjoint() * w;
    Index exceed = 0;
    for (Index m = 0; m < config.fa_test_draws; ++m) {
      const CVector z = test_rng.cnormal_vector(p);
      const double t = std::norm(g.dot(z)) / denom;
      if (t > config.tau) ++exceed;
    }
    row.empirical_pfa = static_cast<double>(exceed) /
                        static_cast<double>(config.fa_test_draws);
    row.std_error =
        std::sqrt(row.predicted_pfa * (1.0 - row.predicted_pfa) /
                  static_cast<double>(config.fa_test_draws));
    rows[i] = row;
  });
  return rows;
}

std::vector<CoverageRow> coverage_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.scenario.amplitude == Complex(0.0, 0.0)) {
    throw InputError("coverage_experiment: amplitude must be nonzero");
  }
  const PopulationModel pop = resolve_population(config);
  const Index p = config.scenario.p;

  std::vector<CoverageRow> rows;
  for (const EstimatorSpec& spec : config.estimators) {
    for (Index n : config.n_values) {
      if (!estimator_enabled(spec, n, p)) continue;
      std::vector<std::uint8_t> covered(
          static_cast<std::size_t>(config.coverage_trials), 0);
      parallel_for(
          config.workers, covered.size(), [&](std::size_t i) {
            const std::uint64_t seed = config.scenario.seed;
            const auto nn = static_cast<std::uint64_t>(n);
            RngStream steering_rng(seed, "cov-steering", nn, i);
            RngStream training_rng(seed, "cov-training", nn, i);
            RngStream test_rng(seed, "cov-test", nn, i);

            TrialData data;
            data.s = sample_steering(p, steering_rng);
            data.x_train = sample_training_with_factor(
                pop.factor, n, config.scenario.distribution, training_rng);
            data.s_eig = hermitian_eig(scm(data.x_train));
            const CVector x = sample_test_vector_with_factor(
                pop.factor, data.s, config.scenario.amplitude, Hypothesis::H1,
                test_rng);

            const ShrinkageResult fit = fit_estimator(spec, data, pop);
            const double xi_val = xi(data.s, fit.matrix, pop.covariance);
            const double nu_sq = effective_sinr(
                data.s, fit.matrix, pop.covariance, config.scenario.amplitude);
            const double pd_true =
                pd_conditional(config.tau, xi_val, nu_sq);
            const double nu = nu_hat(data.s, fit.matrix, x);
            const auto interval = pd_interval(config.tau, nu, config.q);
            covered[i] = (interval.first <= pd_true &&
                          pd_true <= interval.second)
                             ? 1
                             : 0;
          });
      CoverageRow row;
      row.estimator = spec.name();
      row.n = n;
      row.q = config.q;
      row.trials = config.coverage_trials;
      double sum = 0.0;
      for (std::uint8_t c : covered) sum += c;
      row.empirical_coverage = sum / static_cast<double>(covered.size());
      rows.push_back(row);
    }
  }
  return rows;
}

double nearest_rank_percentile(std::vector<double> values, double percentile) {
  if (values.empty()) {
    throw InputError("nearest_rank_percentile: empty sample");
  }
  if (percentile < 0.0 || percentile > 100.0) {
    throw InputError("nearest_rank_percentile: percentile out of [0, 100]");
  }
  std::sort(values.begin(), values.end());
  const auto count = static_cast<double>(values.size());
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(percentile / 100.0 * count));
  if (rank < 1) rank = 1;
  return values[rank - 1];
}

}  // namespace stad
