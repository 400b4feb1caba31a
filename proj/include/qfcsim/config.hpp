#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "qfcsim/simulate.hpp"

namespace qfcsim::cli {

/// Everything `qfcsim simulate` needs. Values are SI (seconds, meters, watts).
struct ScenarioConfig {
    std::string name = "run";
    sim::ExperimentConfig experiment;
    double duration = 1.0;
    std::uint64_t seed = 1;
    std::string output_dir = ".";

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Sectioned key=value text. Errors are DataError/InvalidArgument carrying
/// "<source>:<line>: message".
ScenarioConfig parse_config(std::istream& in, const std::string& source_name = "config");
ScenarioConfig load_config(const std::string& path);

/// Writes every field; parse_config(serialize_config(c)) reproduces c exactly.
std::string serialize_config(const ScenarioConfig& c);

}  // namespace qfcsim::cli
