#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "weakval/config.hpp"
#include "weakval/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheckFailed = 2;

void print_diagnostics(const std::vector<weakval::Diagnostic>& diagnostics)
{
    for (const auto& d : diagnostics) {
        std::cerr << d.format() << '\n';
    }
}

int cmd_validate(const std::string& path)
{
    auto parsed = weakval::load_config(path);
    auto diagnostics = parsed.diagnostics;
    if (!weakval::has_errors(diagnostics)) {
        const auto more = weakval::validate(parsed.config, parsed.lines);
        diagnostics.insert(diagnostics.end(), more.begin(), more.end());
    }
    print_diagnostics(diagnostics);
    if (weakval::has_errors(diagnostics)) {
        return kExitUsage;
    }
    std::cout << path << ": ok\n";
    return kExitOk;
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::int64_t> n_traj,
            std::optional<std::string> out_dir)
{
    auto parsed = weakval::load_config(path);
    if (seed) {
        parsed.config.seed = *seed;
    }
    if (n_traj) {
        parsed.config.n_traj = *n_traj;
    }
    if (out_dir) {
        parsed.config.output = *out_dir;
    }
    auto diagnostics = parsed.diagnostics;
    if (!weakval::has_errors(diagnostics)) {
        const auto more = weakval::validate(parsed.config, parsed.lines);
        diagnostics.insert(diagnostics.end(), more.begin(), more.end());
    }
    print_diagnostics(diagnostics);
    if (weakval::has_errors(diagnostics)) {
        return kExitUsage;
    }

    try {
        const auto result = weakval::run_experiment(parsed.config);
        weakval::write_outputs(result, parsed.config.output);
        for (const auto& c : result.checks) {
            if (!c.pass) {
                std::cerr << "check failed: " << c.name << " (value " << c.value << ", reference "
                          << c.reference << ", tolerance " << c.tolerance << ")\n";
            }
        }
        std::cout << result.name << ": " << (result.pass() ? "all checks passed" : "checks failed") << " -> "
                  << parsed.config.output << '\n';
        return result.pass() ? kExitOk : kExitCheckFailed;
    } catch (const weakval::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const weakval::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCheckFailed;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulator for weak values under continuous qubit measurement"};
    app.require_subcommand(1);

    std::string run_config;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> n_traj;
    std::optional<std::string> out_dir;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", run_config, "config file (key = value or JSON)")->required();
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--n-traj", n_traj, "override the number of trajectories");
    run->add_option("--out", out_dir, "output directory");

    std::string validate_config;
    auto* validate = app.add_subcommand("validate", "check a config file without running it");
    validate->add_option("config", validate_config, "config file")->required();

    auto* list = app.add_subcommand("list-experiments", "list the available experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (*list) {
        for (const auto& name : weakval::experiment_names()) {
            std::cout << name << "\t" << weakval::experiment_description(name) << '\n';
        }
        return kExitOk;
    }
    if (*validate) {
        return cmd_validate(validate_config);
    }
    return cmd_run(run_config, seed, n_traj, out_dir);
}
