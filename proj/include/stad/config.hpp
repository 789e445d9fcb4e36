#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stad/harness.hpp"

namespace stad {

/// Loads an ExperimentConfig from a flat JSON file. Unknown keys are
/// rejected; omitted keys take the documented defaults (tau = 3, q = 0.9,
/// percentiles = [10, 50, 90], trials = 100). `overrides` entries are
/// "key=value" pairs applied on top of the file, and must reference known
/// keys.
ExperimentConfig parse_config(const std::filesystem::path& path,
                              const std::vector<std::string>& overrides = {});

/// Same, from JSON text (used by tests and the override machinery).
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::vector<std::string>& overrides,
                                   const std::string& origin);

/// FNV-1a hash of the canonical serialized config, hex-encoded; recorded in
/// output headers so results can be tied to their configuration.
std::string config_fingerprint(const ExperimentConfig& config);

}  // namespace stad
