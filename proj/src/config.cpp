#include "stad/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stad/covariance_io.hpp"

namespace stad {

namespace {

using nlohmann::json;

const std::set<std::string> kKnownKeys = {
    "p",          "spikes",     "covariance_file", "amplitude",
    "distribution", "seed",     "n_values",        "estimators",
    "trials",     "tau",        "q",               "percentiles",
    "workers",    "fa_training_draws", "fa_test_draws", "coverage_trials",
};

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
  throw InputError(origin + ": " + message);
}

EstimatorSpec parse_estimator(const json& entry, const std::string& origin) {
  EstimatorSpec spec;
  if (entry.is_string()) {
    spec.tag = estimator_tag_from_string(entry.get<std::string>());
    return spec;
  }
  if (!entry.is_object()) {
    fail(origin, "estimator entries must be tag strings or objects");
  }
  if (!entry.contains("tag")) {
    fail(origin, "estimator object is missing 'tag'");
  }
  spec.tag = estimator_tag_from_string(entry.at("tag").get<std::string>());
  for (const auto& [key, value] : entry.items()) {
    if (key == "tag") continue;
    if (key == "noise_floor" || key == "sigma2") {
      spec.noise_floor = value.get<double>();
    } else if (key == "rank") {
      spec.rank = value.get<Index>();
    } else {
      fail(origin, "unknown estimator field '" + key + "'");
    }
  }
  return spec;
}

json normalized_json(const ExperimentConfig& config) {
  json j;
  j["p"] = config.scenario.p;
  if (config.scenario.spectrum.has_value()) {
    j["spikes"] = config.scenario.spectrum->spikes;
  }
  if (config.scenario.covariance_path.has_value()) {
    j["covariance_file"] = *config.scenario.covariance_path;
  }
  j["amplitude"] = {config.scenario.amplitude.real(),
                    config.scenario.amplitude.imag()};
  j["distribution"] =
      config.scenario.distribution == Distribution::Gaussian ? "gaussian"
                                                             : "laplace";
  j["seed"] = config.scenario.seed;
  j["n_values"] = config.n_values;
  json ests = json::array();
  for (const EstimatorSpec& est : config.estimators) {
    ests.push_back({{"tag", to_string(est.tag)},
                    {"noise_floor", est.noise_floor},
                    {"rank", est.rank}});
  }
  j["estimators"] = ests;
  j["trials"] = config.trials;
  j["tau"] = config.tau;
  j["q"] = config.q;
  j["percentiles"] = config.percentiles;
  j["fa_training_draws"] = config.fa_training_draws;
  j["fa_test_draws"] = config.fa_test_draws;
  j["coverage_trials"] = config.coverage_trials;
  // workers deliberately excluded: results are worker-count independent.
  return j;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::string>& overrides,
                                   const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(origin, std::string("JSON parse error: ") + e.what());
  }
  if (!j.is_object()) {
    fail(origin, "top-level JSON value must be an object");
  }

  for (const std::string& override_expr : overrides) {
    const auto eq = override_expr.find('=');
    if (eq == std::string::npos) {
      fail(origin, "override '" + override_expr + "' is not KEY=VALUE");
    }
    const std::string key = override_expr.substr(0, eq);
    const std::string value = override_expr.substr(eq + 1);
    if (kKnownKeys.find(key) == kKnownKeys.end()) {
      fail(origin, "override references unknown key '" + key + "'");
    }
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::parse_error&) {
      parsed = value;  // bare strings, e.g. distribution=laplace
    }
    j[key] = parsed;
  }

  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (kKnownKeys.find(key) == kKnownKeys.end()) {
      fail(origin, "unknown key '" + key + "'");
    }
  }

  ExperimentConfig config;
  try {
    if (!j.contains("p")) fail(origin, "missing required key 'p'");
    config.scenario.p = j.at("p").get<Index>();
    if (j.contains("spikes")) {
      SpikedSpectrum spectrum;
      spectrum.dim = config.scenario.p;
      spectrum.spikes = j.at("spikes").get<std::vector<double>>();
      std::sort(spectrum.spikes.begin(), spectrum.spikes.end(),
                std::greater<double>());
      config.scenario.spectrum = std::move(spectrum);
    }
    if (j.contains("covariance_file")) {
      config.scenario.covariance_path = j.at("covariance_file").get<std::string>();
    }
    if (!j.contains("spikes") && !j.contains("covariance_file")) {
      // Identity population: the spiked model with no spikes.
      SpikedSpectrum spectrum;
      spectrum.dim = config.scenario.p;
      config.scenario.spectrum = std::move(spectrum);
    }
    if (j.contains("amplitude")) {
      const json& amp = j.at("amplitude");
      if (amp.is_array()) {
        if (amp.size() != 2) {
          fail(origin, "'amplitude' array must be [real, imag]");
        }
        config.scenario.amplitude =
            Complex(amp.at(0).get<double>(), amp.at(1).get<double>());
      } else {
        config.scenario.amplitude = Complex(amp.get<double>(), 0.0);
      }
    }
    if (j.contains("distribution")) {
      const std::string dist = j.at("distribution").get<std::string>();
      if (dist == "gaussian") {
        config.scenario.distribution = Distribution::Gaussian;
      } else if (dist == "laplace") {
        config.scenario.distribution = Distribution::Laplace;
      } else {
        fail(origin, "unknown distribution '" + dist + "'");
      }
    }
    if (!j.contains("seed")) fail(origin, "missing required key 'seed'");
    config.scenario.seed = j.at("seed").get<std::uint64_t>();
    if (!j.contains("n_values")) {
      fail(origin, "missing required key 'n_values'");
    }
    config.n_values = j.at("n_values").get<std::vector<Index>>();
    if (!j.contains("estimators")) {
      fail(origin, "missing required key 'estimators'");
    }
    for (const json& entry : j.at("estimators")) {
      config.estimators.push_back(parse_estimator(entry, origin));
    }
    if (j.contains("trials")) config.trials = j.at("trials").get<int>();
    if (j.contains("tau")) config.tau = j.at("tau").get<double>();
    if (j.contains("q")) config.q = j.at("q").get<double>();
    if (j.contains("percentiles")) {
      config.percentiles = j.at("percentiles").get<std::vector<double>>();
    }
    if (j.contains("workers")) config.workers = j.at("workers").get<int>();
    if (j.contains("fa_training_draws")) {
      config.fa_training_draws = j.at("fa_training_draws").get<int>();
    }
    if (j.contains("fa_test_draws")) {
      config.fa_test_draws = j.at("fa_test_draws").get<Index>();
    }
    if (j.contains("coverage_trials")) {
      config.coverage_trials = j.at("coverage_trials").get<int>();
    }
  } catch (const json::exception& e) {
    fail(origin, std::string("invalid field: ") + e.what());
  }

  config.validate();
  config.config_hash = config_fingerprint(config);
  return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path,
                              const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open config file: " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), overrides, path.string());
}

std::string config_fingerprint(const ExperimentConfig& config) {
  const std::string canonical = normalized_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : canonical) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace stad
