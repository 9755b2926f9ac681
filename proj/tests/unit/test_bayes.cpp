#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "weakval/bayes.hpp"
#include "weakval/trajectory.hpp"

using namespace weakval;

namespace {

struct Sampler {
    std::mt19937_64 gen;
    std::uniform_real_distribution<double> u{0.0, 1.0};

    explicit Sampler(std::uint64_t seed) : gen(seed) {}

    PureState pure()
    {
        const double a = std::acos(2.0 * u(gen) - 1.0);
        const double phi = 2.0 * std::numbers::pi * u(gen);
        return PureState(std::cos(0.5 * a), std::polar(std::sin(0.5 * a), phi));
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * u(gen); }
};

}  // namespace

TEST_CASE("eigenstates are fixed points")
{
    const GaussianLikelihood lik{1.0, -1.0, 1.0};
    for (double x : {-30.0, -1.0, 0.0, 2.5, 30.0}) {
        const auto s = bayes_update(QubitState(1.0, 0.0), x, lik);
        CHECK(s.rho11() == 1.0);
        CHECK(s.rho12() == Complex(0.0, 0.0));
    }
}

TEST_CASE("mixed state update at x = xbar1")
{
    const auto s = bayes_update(QubitState::maximally_mixed(), 1.0, {1.0, -1.0, 1.0});
    CHECK(s.rho11() == doctest::Approx(0.880797077977882444059729141302).epsilon(1e-15));
}

TEST_CASE("far-tail records are handled in log space")
{
    const GaussianLikelihood lik{0.1, -0.1, 0.01};
    const auto s = bayes_update(QubitState(0.5, 0.5), 3.0, lik);
    CHECK(s.rho11() == doctest::Approx(1.0));
    CHECK(std::isfinite(s.rho12().real()));
}

TEST_CASE("trace and purity are exact for random states and records")
{
    Sampler rs(11);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const auto psi = rs.pure();
        const double eps = rs.uniform(0.01, 2.0);
        const GaussianLikelihood lik{eps, -eps, rs.uniform(0.05, 2.0)};
        const double x = rs.uniform(-3.0, 3.0);
        const auto s = bayes_update(QubitState::from_pure(psi), x, lik);
        worst = std::max(worst, std::abs(s.rho11() * s.rho22() - std::norm(s.rho12())));
        CHECK(std::abs(s.matrix().trace() - 1.0) < 1e-15);
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("short-interval updates compose into one finite-time update")
{
    Sampler rs(12);
    for (int trial = 0; trial < 20; ++trial) {
        const MeasurementStrength ms{rs.uniform(0.1, 2.0), 0.01, 0.5};
        const auto start = QubitState::from_pure(rs.pure());
        auto chained = start;
        double total = 0.0;
        for (std::size_t k = 0; k < ms.n_steps(); ++k) {
            const double dx = rs.uniform(-0.2, 0.2);
            chained = bayes_update(chained, dx, ms.step_likelihood());
            total += dx;
        }
        const auto once = bayes_finite_time(start, total, ms);
        CHECK(std::abs(chained.rho11() - once.rho11()) < 1e-10);
        CHECK(std::abs(std::abs(chained.rho12()) - std::abs(once.rho12())) < 1e-10);
    }
}

TEST_CASE("finite-time coherence average reproduces exp(-2g)")
{
    // Averaging rho12 sqrt(P1 P2)/N over x ~ N(x) is the integral of sqrt(P1 P2).
    const MeasurementStrength ms{1.0, 0.5, 0.5};
    const auto start = QubitState(0.5, 0.5);
    const auto lik = ms.likelihood();
    double acc = 0.0;
    const double h = 1e-4;
    for (double x = -10.0; x < 10.0; x += h) {
        const double weight = 0.5 * lik.density(1, x) + 0.5 * lik.density(2, x);
        acc += bayes_finite_time(start, x, ms).rho12().real() * weight * h;
    }
    CHECK(acc / 0.5 == doctest::Approx(std::exp(-2.0 * ms.g())).epsilon(1e-8));
}

TEST_CASE("symmetric record at the midpoint leaves the state unchanged")
{
    const MeasurementStrength ms{1.0, 0.5, 0.5};
    const auto s = bayes_finite_time(QubitState(0.5, 0.5), 0.0, ms);
    CHECK(s.rho11() == doctest::Approx(0.5));
    CHECK(s.rho12().real() == doctest::Approx(0.5));
}

TEST_CASE("likelihood floor")
{
    const GaussianLikelihood lik{1.0, -1.0, 1e-4};
    CHECK_THROWS_AS(bayes_update(QubitState(1.0, 0.0), -1.0, lik), ZeroLikelihood);
    CHECK_NOTHROW(bayes_update(QubitState(0.5, 0.0), -1.0, lik));
}

TEST_CASE("second-order expansion matches the Ito-Euler step")
{
    Sampler rs(13);
    for (int i = 0; i < 3; ++i) {
        const MeasurementStrength ms{rs.uniform(0.2, 2.0), 1e-3, 1e-3};
        const auto s = QubitState::from_pure(rs.pure());
        const double dW = rs.uniform(-0.05, 0.05);
        const double x = sample_output(s, ms, dW);
        const auto expanded = bayes_expand_small(s, x, ms.step_likelihood(), 2);
        const auto euler = step_ito_euler(s, ms, dW);
        CHECK(std::abs(expanded.rho11() - euler.rho11()) < 1e-12);
        CHECK(std::abs(expanded.rho12() - euler.rho12()) < 1e-12);
    }
}

TEST_CASE("first-order expansion at the symmetric point")
{
    const GaussianLikelihood lik{0.02, -0.02, 0.01};
    const auto s = bayes_expand_small(QubitState(0.5, 0.3), 0.0, lik, 1);
    CHECK(s.rho11() == doctest::Approx(0.5));
    CHECK_THROWS_AS(bayes_expand_small(QubitState(0.9, 0.0), 1.0, {1.0, -1.0, 0.1}, 1), ExpansionDiverged);
    CHECK_THROWS_AS(bayes_expand_small(QubitState(0.9, 0.0), 0.0, lik, 3), InvalidArgument);
}

TEST_CASE("weighted update keeps the trace")
{
    const auto s = weighted_update(QubitState(0.3, Complex(0.2, 0.1)), -1.0, 0.5, Complex(0.0, 1.0), -0.25);
    CHECK(std::abs(s.matrix().trace() - 1.0) < 1e-15);
    CHECK(s.rho11() < 0.3);
}

TEST_CASE("first-order expansion reproduces the Stratonovich coefficients")
{
    const double gamma = 0.7;
    const double dt = 1e-9;
    const double e = 2.0 * std::sqrt(gamma) * dt;
    const GaussianLikelihood lik{e, -e, dt};
    const QubitState states[] = {QubitState(0.3, Complex(0.2, 0.1)), QubitState(0.8, Complex(-0.1, 0.35)),
                                 QubitState(0.55, Complex(0.0, -0.4))};
    for (const auto& s : states) {
        const double z = s.sz();
        // record increment x = 2 sqrt(gamma) <sz> dt + dW
        auto advance = [&](double dW) { return bayes_expand_small(s, e * z + dW, lik, 1); };
        const auto drift = advance(0.0);
        CHECK((drift.rho11() - s.rho11()) / dt ==
              doctest::Approx(8.0 * gamma * z * s.rho11() * s.rho22()).epsilon(1e-6));
        const Complex d12 = (drift.rho12() - s.rho12()) / dt;
        CHECK(std::abs(d12 + 4.0 * gamma * z * z * s.rho12()) < 1e-6);

        const double dW = 1e-7;
        const auto up = advance(dW);
        const auto down = advance(-dW);
        CHECK((up.rho11() - down.rho11()) / (2.0 * dW) ==
              doctest::Approx(4.0 * std::sqrt(gamma) * s.rho11() * s.rho22()).epsilon(1e-6));
        const Complex n12 = (up.rho12() - down.rho12()) / (2.0 * dW);
        CHECK(std::abs(n12 + 2.0 * std::sqrt(gamma) * z * s.rho12()) < 1e-6);
    }
}
