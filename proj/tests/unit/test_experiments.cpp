#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "weakval/experiments.hpp"

using namespace weakval;

namespace {

ExperimentConfig config_from(const std::string& text)
{
    auto parsed = parse_config(text);
    REQUIRE(parsed.diagnostics.empty());
    return parsed.config;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("derived seeds are distinct and stable")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t tag = 0; tag < 1000; ++tag) {
        seen.insert(derive_seed(42, tag));
    }
    CHECK(seen.size() == 1000);
    CHECK(derive_seed(42, 3) == derive_seed(42, 3));
    CHECK(derive_seed(42, 3) != derive_seed(43, 3));
}

TEST_CASE("outputs do not depend on the worker count")
{
    const auto cfg = config_from("experiment = wv-sweep\nseed = 5\nn_traj = 4000\n[measurement]\n"
                                 "gamma = 1\ndt = 0.01\n[sweep]\ng = 0.1, 0.5\n");
    const auto a = run_experiment(cfg, 1);
    const auto b = run_experiment(cfg, 3);
    CHECK(a.csv == b.csv);
    CHECK(a.summary.dump() == b.summary.dump());
}

TEST_CASE("csv and summary format")
{
    const auto cfg = config_from("experiment = cqed-quadratures\nseed = 8\nn_traj = 2000\n"
                                 "[cqed]\neps_m = 4\nt_m = 0.3\nphi_points = 3\n");
    const auto out = run_experiment(cfg, 2);
    CHECK(out.name == "cqed-quadratures");
    CHECK(out.csv.rfind("# schema=1\nphi,Gamma_ci,Gamma_ba,wv_mc,wv_closed,wv_stderr,success_rate\n", 0) == 0);
    CHECK(out.csv.find('\r') == std::string::npos);
    CHECK(out.csv.back() == '\n');
    REQUIRE(out.summary.contains("checks"));
    for (const auto& c : out.summary["checks"]) {
        CHECK(c.contains("value"));
        CHECK(c.contains("reference"));
        CHECK(c.contains("tolerance"));
    }

    const auto dir = std::filesystem::temp_directory_path() / "weakval_test_outputs";
    std::filesystem::remove_all(dir);
    write_outputs(out, dir);
    CHECK(slurp(dir / "cqed-quadratures.csv") == out.csv);
    const auto js = nlohmann::json::parse(slurp(dir / "cqed-quadratures.summary.json"));
    CHECK(js["experiment"] == "cqed-quadratures");
    std::filesystem::remove_all(dir);
}

TEST_CASE("invalid configs are rejected before running")
{
    auto cfg = config_from("experiment = fig1\nseed = 1\n");
    cfg.measurement.gamma = -1.0;
    CHECK_THROWS_AS(run_experiment(cfg, 1), InvalidArgument);
    cfg = config_from("experiment = fig1\n");
    CHECK_THROWS_AS(run_experiment(cfg, 1), InvalidArgument);
}

TEST_CASE("seed changes the Monte Carlo columns only")
{
    const std::string base = "experiment = wv-sweep\nn_traj = 2000\n[measurement]\ngamma = 1\n"
                             "dt = 0.01\n[sweep]\ng = 0.5\n";
    const auto a = run_experiment(config_from("seed = 1\n" + base), 1);
    const auto b = run_experiment(config_from("seed = 2\n" + base), 1);
    CHECK(a.csv != b.csv);
    CHECK(a.summary["checks"][0]["value"] == b.summary["checks"][0]["value"]);
}
