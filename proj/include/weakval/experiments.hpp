#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "weakval/config.hpp"
#include "weakval/parallel.hpp"

namespace weakval {

/// One pass/fail comparison recorded in an experiment summary.
struct Check {
    std::string name;
    bool pass;
    double value;
    double reference;
    double tolerance;
};

struct ExperimentOutput {
    std::string name;
    std::string csv;
    nlohmann::json summary;
    std::vector<Check> checks;

    bool pass() const;
};

/// Runs the experiment named in the config. Results depend only on the config
/// (including its seed), never on the worker count.
/// Throws InvalidArgument on an unknown experiment or a config that fails validation.
ExperimentOutput run_experiment(const ExperimentConfig& config, unsigned workers = worker_count());

/// Writes <dir>/<name>.csv and <dir>/<name>.summary.json, creating dir.
void write_outputs(const ExperimentOutput& output, const std::filesystem::path& dir);

/// Independent 64-bit seed for a sub-run, derived from the run seed and a tag.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace weakval
