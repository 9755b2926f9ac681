#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "weakval/quadrature.hpp"
#include "weakval/weak_value.hpp"

using namespace weakval;

namespace {

constexpr double kPi = std::numbers::pi;

struct Sampler {
    std::mt19937_64 gen;
    std::uniform_real_distribution<double> u{0.0, 1.0};

    explicit Sampler(std::uint64_t seed) : gen(seed) {}

    PureState pure()
    {
        const double a = std::acos(2.0 * u(gen) - 1.0);
        const double phi = 2.0 * kPi * u(gen);
        return PureState(std::cos(0.5 * a), std::polar(std::sin(0.5 * a), phi));
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * u(gen); }
};

}  // namespace

TEST_CASE("linear weak value")
{
    CHECK(wv_aav_linear(theta_selection(0.5 * kPi)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(wv_aav_linear(theta_selection(0.9 * kPi)) ==
          doctest::Approx(6.31375151467504309897946424476).epsilon(1e-14));
}

TEST_CASE("short-time weak value")
{
    const auto pps = theta_selection(0.7 * kPi);
    CHECK(wv_short_time(pps, 0.0) == wv_aav_linear(pps));
    CHECK(wv_short_time(theta_selection(0.9 * kPi), 0.1) ==
          doctest::Approx(1.29212130059358810980407174645).epsilon(1e-14));

    // |w| = 1: the denominator is one for any g
    const auto psi_i = PureState::normalized(1.0, Complex(0.0, 1.0));
    const auto psi_f = PureState::normalized(1.0, 1.0);
    for (double g : {0.0, 0.3, 2.0}) {
        CHECK(std::abs(wv_short_time({psi_i, psi_f}, g)) < 1e-15);
    }
    CHECK_THROWS_AS(wv_short_time(pps, -0.1), InvalidArgument);
}

TEST_CASE("finite-strength weak value")
{
    CHECK(wv_finite_strength(theta_selection(0.9 * kPi), 0.5) ==
          doctest::Approx(0.47531872405444009623240610491).epsilon(1e-14));

    // strong limit: G -> 1/2
    const auto pps = theta_selection(0.6 * kPi);
    const auto w = aav_weak_value(pps);
    CHECK(wv_finite_strength(pps, 40.0) == doctest::Approx(2.0 * w.re() / (1.0 + w.abs2())).epsilon(1e-14));

    // weak limit: agrees with the short-time form
    for (double g : {1e-4, 1e-3, 1e-2}) {
        CHECK(wv_finite_strength(pps, g) == doctest::Approx(wv_short_time(pps, g)).epsilon(1e-3));
    }
}

TEST_CASE("general Bayes weak value on the theta family")
{
    const MeasurementStrength ms{1.0, 0.01, 0.5};
    const auto lik = ms.likelihood();
    const double G = std::exp(-(2.0 * ms.epsilon()) * (2.0 * ms.epsilon()) / (8.0 * ms.variance()));
    for (double theta : {0.1, 0.4 * kPi, 0.9 * kPi}) {
        const double expect = std::sin(theta) / (1.0 + G * std::cos(theta)) * ms.epsilon();
        CHECK(wv_bayes_general(theta_selection(theta), lik) == doctest::Approx(expect).epsilon(1e-13));
    }
    CHECK(std::abs(wv_bayes_general(theta_selection(kPi), lik)) < 1e-15);
    CHECK(std::abs(wv_bayes_general({PureState::normalized(1.0, 1.0), PureState::normalized(1.0, 1.0)}, lik)) <
          1e-15);
}

TEST_CASE("degenerate post-selection")
{
    const PrePostSelection orth{PureState::basis1(), PureState::basis2()};
    CHECK_THROWS_AS(wv_bayes_general(orth, {1.0, -1.0, 1.0}), DegenerateDenominator);
    CHECK_THROWS_AS(wv_finite_strength(orth, 0.0), OrthogonalSelection);
    // at finite strength the M1/M2 form stays finite for orthogonal states
    const auto pps = theta_selection(kPi);
    CHECK(std::abs(wv_finite_strength(pps, 0.5)) < 1e-12);
    const auto near = theta_selection(kPi * (1.0 - 1e-9));
    CHECK(std::isfinite(wv_finite_strength(near, 0.5)));
    CHECK(std::abs(wv_finite_strength(near, 0.5)) < 1e-6);
}

TEST_CASE("closed form, moments and quadrature agree on random points")
{
    Sampler rs(101);
    const auto& rule = gauss_hermite_64();
    for (int i = 0; i < 100; ++i) {
        const PrePostSelection pps{rs.pure(), rs.pure()};
        const double gamma = rs.uniform(0.1, 2.0);
        const double g = rs.uniform(0.0, 3.0);
        const MeasurementStrength ms{gamma, g / gamma, g / gamma};
        if (std::norm(pps.overlap()) < 1e-6 || g == 0.0) {
            continue;
        }
        const double finite = wv_finite_strength(pps, g);
        const double bayes = wv_bayes_general(pps, ms.likelihood()) / ms.epsilon();
        CHECK(std::abs(bayes - finite) < 1e-10);
        const double quad = wv_quadrature(pps, ms.likelihood(), rule) / ms.epsilon();
        CHECK(quad == doctest::Approx(finite).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("denominator never vanishes")
{
    Sampler rs(102);
    for (int i = 0; i < 10000; ++i) {
        const PrePostSelection pps{rs.pure(), rs.pure()};
        if (pps.overlap() == Complex(0.0, 0.0)) {
            continue;
        }
        const double G = rs.uniform(0.0, 0.5 - 1e-9);
        const double w2 = aav_weak_value(pps).abs2();
        CHECK(1.0 + G * (w2 - 1.0) > 0.0);
    }
}

TEST_CASE("general form is invariant under a common rescaling")
{
    const auto pps = theta_selection(0.8 * kPi);
    const GaussianLikelihood lik{0.7, -0.3, 0.4};
    const double base = wv_bayes_general(pps, lik);
    for (double c : {0.1, 3.0, 250.0}) {
        const GaussianLikelihood scaled{c * lik.xbar1, c * lik.xbar2, c * c * lik.D};
        CHECK(wv_bayes_general(pps, scaled) / c == doctest::Approx(base).epsilon(1e-13));
    }
}

TEST_CASE("ratio estimator")
{
    const std::vector<RatioSums> b{{2.0, 1.0}, {4.0, 2.0}, {6.0, 3.0}};
    const auto est = ratio_estimate(b);
    CHECK(est.mean == doctest::Approx(2.0));
    CHECK(est.std_error == doctest::Approx(0.0));
    const std::vector<RatioSums> empty{{0.0, 0.0}};
    CHECK_THROWS_AS(ratio_estimate(empty), DegenerateDenominator);
}

TEST_CASE("Monte Carlo eigenstate selection")
{
    const PrePostSelection pps{PureState::basis1(), PureState::basis1()};
    const MeasurementStrength ms{1.0, 0.01, 1.0};
    const auto mc = mc_weak_value(pps, ms, Stepper::BayesExact, 100000, 3, 1);
    CHECK(mc.rejection.success_rate == 1.0);
    CHECK(std::abs(mc.rejection.mean / mc.epsilon - 1.0) < 3.0 * mc.rejection.std_error / mc.epsilon);
}

TEST_CASE("Monte Carlo agrees with the closed form and the two estimators agree")
{
    for (auto [theta, g] : {std::pair{0.6 * kPi, 0.2}, std::pair{0.85 * kPi, 1.0}}) {
        const auto pps = theta_selection(theta);
        const MeasurementStrength ms{1.0, g / 20.0, g};
        const auto mc = mc_weak_value(pps, ms, Stepper::BayesExact, 400000, 17, 2);
        const double closed = wv_finite_strength(pps, g);
        CHECK(std::abs(mc.rejection.mean / mc.epsilon - closed) < 3.0 * mc.rejection.std_error / mc.epsilon);
        CHECK(std::abs(mc.weighting.mean / mc.epsilon - closed) < 3.0 * mc.weighting.std_error / mc.epsilon);
        CHECK(std::abs(mc.rejection.mean - mc.weighting.mean) <
              3.0 * std::hypot(mc.rejection.std_error, mc.weighting.std_error));
        CHECK(mc.rejection.n_selected <= mc.rejection.n_total);
        CHECK(mc.rejection.std_error >= 0.0);
    }
}

TEST_CASE("too few selections")
{
    const auto pps = theta_selection(kPi * (1.0 - 1e-4));
    const MeasurementStrength ms{1e-3, 1e-3, 1e-3};
    try {
        mc_weak_value(pps, ms, Stepper::BayesExact, 1000, 1, 1);
        FAIL("expected NoSelections");
    } catch (const NoSelections& e) {
        CHECK(e.success_rate() < 0.1);
    }
}

TEST_CASE("fig1 curve")
{
    std::vector<double> grid;
    for (int k = 1; k < 1000; ++k) {
        grid.push_back(kPi * k / 1000.0);
    }
    const double g = 0.01;
    const auto curve = fig1_curve(g, grid);
    REQUIRE(curve.interior);
    for (std::size_t i = 1; i < curve.rows.size(); ++i) {
        CHECK(curve.rows[i].aav > curve.rows[i - 1].aav);
    }
    CHECK(curve.rows.back().nonpert < 0.2);

    // dense independent search for the maximum
    double best = 0.0;
    double arg = 0.0;
    for (int k = 1; k < 2000000; ++k) {
        const double theta = kPi * k / 2000000.0;
        const double v = wv_short_time(theta_selection(theta), g);
        if (v > best) {
            best = v;
            arg = theta;
        }
    }
    CHECK(curve.peak == doctest::Approx(best).epsilon(1e-12));
    CHECK(curve.theta_star == doctest::Approx(arg).epsilon(1e-5));
    CHECK(curve.peak == doctest::Approx(1.0 / (2.0 * std::sqrt(g * (1.0 - g)))).epsilon(1e-12));

    const std::vector<double> bad{0.0};
    CHECK_THROWS_AS(fig1_curve(g, bad), InvalidArgument);
}

TEST_CASE("Gauss-Hermite rule integrates polynomials exactly")
{
    const auto rule = gauss_hermite(20);
    double m0 = 0.0;
    double m2 = 0.0;
    double m4 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = rule.nodes[i];
        m0 += rule.weights[i];
        m2 += rule.weights[i] * t * t;
        m4 += rule.weights[i] * t * t * t * t;
    }
    CHECK(m0 == doctest::Approx(std::sqrt(kPi)).epsilon(1e-14));
    CHECK(m2 == doctest::Approx(std::sqrt(kPi) / 2.0).epsilon(1e-14));
    CHECK(m4 == doctest::Approx(3.0 * std::sqrt(kPi) / 4.0).epsilon(1e-13));
}
