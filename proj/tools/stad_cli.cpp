#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stad/config.hpp"
#include "stad/covariance_io.hpp"
#include "stad/detection.hpp"
#include "stad/harness.hpp"

namespace {

using namespace stad;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw InputError("cannot open output file: " + path);
  }
  return out;
}

std::string timestamp_comment() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return std::string("# generated_at=") + buf;
}

void write_sweep_csv(std::ofstream& out, const SweepTable& table) {
  out << "# config_hash=" << table.config_hash
      << " seed=" << table.master_seed << '\n';
  out << timestamp_comment() << " wall_seconds="
      << format_double(table.wall_seconds) << '\n';
  out << "estimator,n,trial,eta,eta_tilde,xi,nu_sq,nu_hat,runtime_s\n";
  for (const TrialRecord& rec : table.trials) {
    out << rec.estimator << ',' << rec.n << ',' << rec.trial << ','
        << format_double(rec.eta) << ',' << format_double(rec.eta_tilde)
        << ',' << format_double(rec.xi) << ',' << format_double(rec.nu_sq)
        << ',' << format_double(rec.nu_hat) << ','
        << format_double(rec.runtime_s) << '\n';
  }
  out << "estimator,n,metric,percentile,value\n";
  for (const PercentileRow& row : table.percentiles) {
    out << row.estimator << ',' << row.n << ',' << row.metric << ','
        << format_double(row.percentile) << ',' << format_double(row.value)
        << '\n';
  }
}

struct CommonOptions {
  std::string config_path;
  std::string out_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

ExperimentConfig load_config(const CommonOptions& opts) {
  std::vector<std::string> overrides = opts.overrides;
  if (opts.seed.has_value()) {
    overrides.push_back("seed=" + std::to_string(*opts.seed));
  }
  return parse_config(opts.config_path, overrides);
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool needs_config) {
  if (needs_config) {
    cmd->add_option("--config", opts.config_path, "JSON experiment config")
        ->required();
    cmd->add_option("--set", opts.overrides,
                    "KEY=VALUE config override (repeatable)");
    cmd->add_option("--seed", opts.seed, "master seed override");
  }
  cmd->add_option("--out", opts.out_path, "output CSV path")->required();
  cmd->add_flag("--quiet", opts.quiet, "suppress the summary line");
}

void summarize(const CommonOptions& opts, std::size_t rows, double seconds) {
  if (!opts.quiet) {
    std::cout << rows << " rows written to " << opts.out_path << " in "
              << seconds << " s\n";
  }
}

int run_sweep(const CommonOptions& opts) {
  const ExperimentConfig config = load_config(opts);
  const SweepTable table = sweep(config);
  std::ofstream out = open_out(opts.out_path);
  write_sweep_csv(out, table);
  summarize(opts, table.trials.size() + table.percentiles.size(),
            table.wall_seconds);
  return 0;
}

int run_fa(const CommonOptions& opts) {
  const ExperimentConfig config = load_config(opts);
  const auto start = std::chrono::steady_clock::now();
  const auto rows = false_alarm_experiment(config);
  std::ofstream out = open_out(opts.out_path);
  out << "# config_hash=" << config.config_hash
      << " seed=" << config.scenario.seed << '\n';
  out << timestamp_comment() << '\n';
  out << "estimator,n,draw,xi,predicted_pfa,empirical_pfa,std_error\n";
  for (const FalseAlarmRow& row : rows) {
    out << row.estimator << ',' << row.n << ',' << row.draw << ','
        << format_double(row.xi) << ',' << format_double(row.predicted_pfa)
        << ',' << format_double(row.empirical_pfa) << ','
        << format_double(row.std_error) << '\n';
  }
  summarize(opts, rows.size(),
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count());
  return 0;
}

int run_coverage(const CommonOptions& opts) {
  const ExperimentConfig config = load_config(opts);
  const auto start = std::chrono::steady_clock::now();
  const auto rows = coverage_experiment(config);
  std::ofstream out = open_out(opts.out_path);
  out << "# config_hash=" << config.config_hash
      << " seed=" << config.scenario.seed << '\n';
  out << timestamp_comment() << '\n';
  out << "estimator,n,q,trials,empirical_coverage\n";
  for (const CoverageRow& row : rows) {
    out << row.estimator << ',' << row.n << ',' << format_double(row.q) << ','
        << row.trials << ',' << format_double(row.empirical_coverage) << '\n';
  }
  summarize(opts, rows.size(),
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          start)
                .count());
  return 0;
}

struct DetectOptions {
  std::string covariance_path;
  std::string steering_path;
  std::string test_path;
  std::string population_path;
  std::string out_path;
  double tau = 3.0;
  double q = 0.9;
  bool quiet = false;
};

int run_detect(const DetectOptions& opts) {
  const HermitianMatrix r_hat = load_covariance(opts.covariance_path);
  const CVector s = load_cvector(opts.steering_path);
  const CVector x = load_cvector(opts.test_path);
  std::optional<HermitianMatrix> population;
  if (!opts.population_path.empty()) {
    population = load_covariance(opts.population_path);
  }
  const DetectionReport report = make_detection_report(
      s, r_hat, x, opts.tau, opts.q,
      population.has_value() ? &*population : nullptr);
  std::ofstream out = open_out(opts.out_path);
  out << "statistic,threshold,decision,xi,nu_hat,pfa_predicted,pd_lower,"
         "pd_upper,confidence\n";
  out << format_double(report.statistic) << ','
      << format_double(report.threshold) << ','
      << (report.decide_h1 ? "H1" : "H0") << ','
      << format_double(report.xi) << ',' << format_double(report.nu_hat)
      << ',' << format_double(report.pfa_predicted) << ','
      << format_double(report.pd_lower) << ','
      << format_double(report.pd_upper) << ','
      << format_double(report.confidence) << '\n';
  if (!opts.quiet) {
    std::cout << "decision=" << (report.decide_h1 ? "H1" : "H0")
              << " statistic=" << report.statistic << " written to "
              << opts.out_path << '\n';
  }
  return 0;
}

struct EstimateOptions {
  CommonOptions common;
  std::string training_path;
  std::string estimator = "LWD";
  double noise_floor = 1.0;
  Index rank = 0;
};

int run_estimate(const EstimateOptions& opts) {
  CMatrix x_train;
  std::optional<ExperimentConfig> config;
  if (!opts.training_path.empty()) {
    x_train = load_cmatrix(opts.training_path);
  } else {
    if (opts.common.config_path.empty()) {
      throw InputError("estimate: provide --training or --config");
    }
    config = load_config(opts.common);
    const PopulationModel pop = resolve_population(*config);
    RngStream rng(config->scenario.seed, "training",
                  static_cast<std::uint64_t>(config->n_values.front()), 0);
    x_train = sample_training_with_factor(pop.factor, config->n_values.front(),
                                          config->scenario.distribution, rng);
  }

  const EstimatorTag tag = estimator_tag_from_string(opts.estimator);
  ShrinkageResult fit = [&] {
    switch (tag) {
      case EstimatorTag::LWD:
        return lwd_shrink(x_train, opts.noise_floor);
      case EstimatorTag::LWLinear:
        return lw_linear(x_train);
      case EstimatorTag::FML:
        return fml(hermitian_eig(scm(x_train)), opts.noise_floor);
      case EstimatorTag::AndersonR:
        return anderson(hermitian_eig(scm(x_train)), opts.rank);
      case EstimatorTag::SCM: {
        const EigenSystem es = hermitian_eig(scm(x_train));
        return ShrinkageResult{es.eigenvectors, es.eigenvalues,
                               EstimatorTag::SCM,
                               reconstruct(es.eigenvectors, es.eigenvalues)};
      }
      case EstimatorTag::Oracle:
        throw InputError(
            "estimate: the oracle requires the population covariance and is "
            "not available from training data");
    }
    throw InputError("estimate: unknown estimator");
  }();

  save_covariance(opts.common.out_path, fit.matrix);
  if (!opts.common.quiet) {
    std::cout << to_string(tag) << " estimate (" << fit.matrix.dim() << "x"
              << fit.matrix.dim() << ") written to " << opts.common.out_path
              << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shrinkage covariance estimation and adaptive matched "
               "filter experiments"};
  app.require_subcommand(1);

  CommonOptions sweep_opts;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Monte Carlo NSINR/xi sweep over n");
  add_common(sweep_cmd, sweep_opts, true);

  CommonOptions fa_opts;
  CLI::App* fa_cmd =
      app.add_subcommand("fa", "conditional false-alarm validation");
  add_common(fa_cmd, fa_opts, true);

  CommonOptions cov_opts;
  CLI::App* cov_cmd =
      app.add_subcommand("coverage", "detection-probability interval coverage");
  add_common(cov_cmd, cov_opts, true);

  DetectOptions detect_opts;
  CLI::App* detect_cmd =
      app.add_subcommand("detect", "single-shot detection report");
  detect_cmd->add_option("--covariance", detect_opts.covariance_path,
                         "covariance estimate CSV")->required();
  detect_cmd->add_option("--steering", detect_opts.steering_path,
                         "steering vector CSV")->required();
  detect_cmd->add_option("--test", detect_opts.test_path,
                         "test (return) vector CSV")->required();
  detect_cmd->add_option("--population", detect_opts.population_path,
                         "known population covariance (enables exact xi)");
  detect_cmd->add_option("--tau", detect_opts.tau, "detection threshold");
  detect_cmd->add_option("--q", detect_opts.q, "confidence for the p_d interval");
  detect_cmd->add_option("--out", detect_opts.out_path, "output CSV path")
      ->required();
  detect_cmd->add_flag("--quiet", detect_opts.quiet, "suppress summary");

  EstimateOptions est_opts;
  CLI::App* est_cmd =
      app.add_subcommand("estimate", "fit one estimator and write the matrix");
  est_cmd->add_option("--config", est_opts.common.config_path,
                      "JSON config (synthesizes training data)");
  est_cmd->add_option("--set", est_opts.common.overrides,
                      "KEY=VALUE config override (repeatable)");
  est_cmd->add_option("--seed", est_opts.common.seed, "master seed override");
  est_cmd->add_option("--training", est_opts.training_path,
                      "training matrix CSV (overrides --config data)");
  est_cmd->add_option("--estimator", est_opts.estimator,
                      "SCM|FML|AndersonR|LWLinear|LWD");
  est_cmd->add_option("--noise-floor", est_opts.noise_floor,
                      "noise floor for FML/LWD");
  est_cmd->add_option("--rank", est_opts.rank, "spike count for AndersonR");
  est_cmd->add_option("--out", est_opts.common.out_path, "output path")
      ->required();
  est_cmd->add_flag("--quiet", est_opts.common.quiet, "suppress summary");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep_cmd->parsed()) return run_sweep(sweep_opts);
    if (fa_cmd->parsed()) return run_fa(fa_opts);
    if (cov_cmd->parsed()) return run_coverage(cov_opts);
    if (detect_cmd->parsed()) return run_detect(detect_opts);
    if (est_cmd->parsed()) return run_estimate(est_opts);
  } catch (const stad::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
