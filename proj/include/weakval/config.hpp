#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "weakval/amplifier.hpp"
#include "weakval/core.hpp"
#include "weakval/cqed.hpp"
#include "weakval/measurement.hpp"
#include "weakval/trajectory.hpp"

namespace weakval {

/// Unnormalized amplitudes as read from a config; validated separately so a
/// bad state yields a diagnostic rather than an exception.
struct StateSpec {
    Complex c1;
    Complex c2;

    double norm2() const { return std::norm(c1) + std::norm(c2); }
};

struct Fig1Options {
    double theta_min = 0.02;  ///< units of pi
    double theta_max = 0.99;  ///< units of pi
    int points = 25;
};

struct SweepOptions {
    std::vector<double> g{0.01, 0.1, 0.5, 1.0, 2.0};
};

struct ConvergenceOptions {
    std::vector<double> dt{1e-2, 1e-3, 1e-4, 1e-5};
    double horizon = 0.1;
    int refine = 16;
};

struct AmplifierOptions {
    AmplifierModel model{};
    /// sigma values as multiples of eps.
    std::vector<double> sigma_over_eps{0.0, 0.1, 1.0, 10.0};
    int random_points = 50;
};

struct CqedOptions {
    CqedParams params{};
    double t_m = 1.0;
    std::size_t n_steps = 1;
    CqedStepper stepper = CqedStepper::Bayes;
    int phi_points = 9;
};

struct ExperimentConfig {
    std::string experiment;
    std::optional<std::uint64_t> seed;
    std::int64_t n_traj = 100000;
    std::string output = "results";
    Stepper stepper = Stepper::BayesExact;
    MeasurementStrength measurement{0.01, 0.1, 1.0};

    /// Selection angle in units of pi; used unless explicit states are given.
    std::optional<double> theta = 0.9;
    StateSpec psi_i{};
    StateSpec psi_f{};

    Fig1Options fig1{};
    SweepOptions sweep{};
    ConvergenceOptions convergence{};
    AmplifierOptions amplifier{};
    CqedOptions cqed{};

    /// theta_selection(theta pi) or the explicit states; throws InvalidArgument
    /// on unnormalized states.
    PrePostSelection selection() const;
};

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity;
    std::string field;
    int line;  ///< 0 when unknown
    std::string message;

    /// "error: line 4: measurement.gamma: gamma must be > 0 (got -1)".
    std::string format() const;
};

bool has_errors(const std::vector<Diagnostic>& diagnostics);

struct ParsedConfig {
    ExperimentConfig config;
    std::vector<Diagnostic> diagnostics;
    std::map<std::string, int> lines;  ///< source line of each key
};

/// Parses `key = value` text with optional `[section]` headers (keys inside a
/// section are prefixed with `section.`); `#` and `;` start comments. Text
/// whose first non-blank character is `{` is read as JSON, nested objects
/// mapping to dotted keys. Syntax and type errors are reported as diagnostics.
ParsedConfig parse_config(std::string_view text);
ParsedConfig load_config(const std::filesystem::path& path);

/// Schema and physics checks: required fields, positivity of rates and
/// steps, state normalization, kappa > 0, bad-cavity (chi/kappa < 0.1) and
/// step-size (4 sqrt(gamma dt) <= 0.2) warnings.
std::vector<Diagnostic> validate(const ExperimentConfig& config,
                                 const std::map<std::string, int>& lines = {});

const std::vector<std::string>& experiment_names();
std::string_view experiment_description(std::string_view name);

}  // namespace weakval
