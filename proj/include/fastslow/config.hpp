#pragma once

#include <string>

#include "fastslow/canard.hpp"
#include "fastslow/model.hpp"
#include "fastslow/scan.hpp"

namespace fastslow {

/// Fully validated run configuration. Parsing rejects unknown keys and
/// reports the JSON path of every violation.
struct RunConfig {
    SystemDefinition system;
    ForcingProfile forcing;
    IntegratorSettings integrator;
    GridSpec grid;
    CanardSettings canard;
    std::string output_dir = ".";
    int workers = 1;
};

/// Parses and validates a config document. Throws ConfigError with the
/// offending key path on any violation.
RunConfig parse_config(const std::string& json_text);

/// Reads the file and delegates to parse_config.
RunConfig load_config(const std::string& path);

}  // namespace fastslow
