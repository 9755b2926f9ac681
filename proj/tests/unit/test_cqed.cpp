#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "weakval/analysis.hpp"
#include "weakval/bayes.hpp"
#include "weakval/cqed.hpp"

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

CqedParams reference_params()
{
    CqedParams p;
    p.chi = 0.05;
    p.kappa = 2.0;
    p.eps_m = 1.0;
    return p;
}

}  // namespace

TEST_CASE("steady cavity fields")
{
    CqedParams zero = reference_params();
    zero.chi = 0.0;
    const auto f0 = steady_fields(zero);
    CHECK(std::abs(f0.alpha1 - Complex(0.0, -1.0)) < 1e-15);
    CHECK(f0.beta() == Complex(0.0, 0.0));

    const auto f = steady_fields(reference_params());
    CHECK(std::abs(f.alpha1 - Complex(0.04987531172069825, -0.9975062344139651)) < 1e-15);
    CHECK(std::abs(f.alpha2 - Complex(-0.04987531172069825, -0.9975062344139651)) < 1e-15);
    CHECK(std::abs(f.beta() - Complex(-0.0997506234413965, 0.0)) < 1e-15);
    CHECK(std::abs(f.theta_beta()) < 1e-12);
    CHECK(f.nbar() == doctest::Approx(std::norm(f.alpha1)));
}

TEST_CASE("steady-state rates")
{
    const auto p = reference_params();
    const auto r = rates(p);
    CHECK(r.Gamma_d == doctest::Approx(0.00995018687694728).epsilon(1e-13));
    CHECK(r.B == doctest::Approx(0.0992531140975491).epsilon(1e-13));
    CHECK(r.Gamma_d == doctest::Approx(r.Gamma_d_total()).epsilon(1e-12));
    CHECK(r.Gamma_ba == 0.0);
    CHECK(r.Omega_tilde == doctest::Approx(r.B));

    CqedParams dressed = p;
    dressed.omega = OmegaConvention::DressedPlusStark;
    CHECK(rates(dressed).Omega_tilde == doctest::Approx(r.B + p.chi));
}

TEST_CASE("quadrature energy split")
{
    auto p = reference_params();
    p.delta_r = 0.3;
    const double total = p.kappa * std::norm(steady_fields(p).beta());
    for (int k = 0; k < 37; ++k) {
        p.phi_lo = -kPi + 2.0 * kPi * k / 36.0;
        const auto r = rates(p);
        CHECK(r.Gamma_ci + r.Gamma_ba == doctest::Approx(total).epsilon(1e-14));
    }
    const auto q = quadrature_pair(p);
    CHECK(q.info.Gamma_ba == 0.0);
    CHECK(q.backaction.Gamma_ci == 0.0);
    p.phi_lo = steady_fields(p).theta_beta() + kPi / 2;
    CHECK(rates(p).Gamma_ci < 1e-15 * total + 1e-300);
}

TEST_CASE("parameter validation")
{
    auto p = reference_params();
    CHECK(p.bad_cavity_ok());
    p.chi = 1.0;
    CHECK_FALSE(p.bad_cavity_ok());
    p.kappa = 0.0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    p = reference_params();
    p.purity_factor = 1.5;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("trajectory equation limits")
{
    const CqedRates none{0.0, 0.0, 0.0, 0.0, 0.7};
    const auto s = step_cqed_qte(QubitState(0.5, 0.5), none, 0.3, 0.1);
    CHECK(s.rho11() == 0.5);
    CHECK(std::abs(s.rho12() - 0.5 * std::exp(Complex(0.0, -0.07))) < 1e-15);

    const auto r = rates(reference_params());
    for (double dW : {-0.2, 0.0, 0.2}) {
        CHECK(step_cqed_qte(QubitState(1.0, 0.0), r, dW, 0.01).rho11() == 1.0);
        CHECK(step_cqed_qte(QubitState(0.0, 0.0), r, dW, 0.01).rho11() == 0.0);
    }

    Sampler rs(4);
    std::normal_distribution<double> z;
    for (int i = 0; i < 10000; ++i) {
        const auto st = QubitState::from_pure(rs.pure());
        const auto out = step_cqed_qte(st, r, 0.1 * z(rs.gen), 0.01);
        CHECK(std::abs(out.matrix().trace() - 1.0) < 1e-15);
    }
}

TEST_CASE("output sign convention")
{
    const auto r = rates(reference_params());
    CHECK(cqed_output(QubitState(1.0, 0.0), r, 0.0, 0.1) == doctest::Approx(-std::sqrt(r.Gamma_ci) * 0.1));
    const auto lik = cqed_likelihood(r, 0.5);
    CHECK(lik.xbar1 < 0.0);
    CHECK(lik.xbar2 == -lik.xbar1);
}

TEST_CASE("Bayes rule without phase corrections reduces to the plain update")
{
    const CqedRates r{0.5, 1.0, 0.0, 0.0, 0.0};
    const CqedParams p;
    const QubitState s(0.3, Complex(0.2, 0.4));
    const double t = 0.4;
    const GaussianLikelihood lik{-std::sqrt(r.Gamma_ci) * t, std::sqrt(r.Gamma_ci) * t, t};
    for (double x : {-0.7, 0.0, 0.25}) {
        const auto a = bayes_cqed(s, x, r, p, t);
        const auto b = bayes_update(s, x, lik);
        CHECK(a.rho11() == doctest::Approx(b.rho11()).epsilon(1e-15));
        CHECK(std::abs(a.rho12() - b.rho12()) < 1e-15);
    }
}

TEST_CASE("Bayes rule phase and purity factors")
{
    CqedRates r{0.5, 1.0, 0.3, 0.0, kPi};
    CqedParams p;
    const QubitState s(0.5, 0.5);
    const auto flipped = bayes_cqed(s, 0.0, r, p, 1.0);
    CHECK(std::abs(flipped.rho12() + 0.5) < 1e-15);

    p.purity_factor = 0.5;
    CHECK(std::abs(bayes_cqed(s, 0.0, r, p, 1.0).rho12() + 0.25) < 1e-15);

    r.Omega_tilde = 0.0;
    p.purity_factor = 1.0;
    const double x = 0.4;
    const auto back = bayes_cqed(s, x, r, p, 1.0);
    p.record_phase = RecordPhase::InfoGain;
    const auto info = bayes_cqed(s, x, r, p, 1.0);
    CHECK(std::arg(back.rho12()) == doctest::Approx(std::sqrt(0.3) * x));
    CHECK(std::arg(info.rho12()) == doctest::Approx(std::sqrt(1.0) * x));
}

TEST_CASE("chained short Bayes steps equal one finite-time step")
{
    auto p = reference_params();
    p.phi_lo = 0.4;
    p.omega_q = 0.8;
    const auto r = rates(p);
    Sampler rs(6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto start = QubitState::from_pure(rs.pure());
        const int n = 50;
        const double t = 2.0;
        auto chained = start;
        double total = 0.0;
        for (int k = 0; k < n; ++k) {
            const double dx = rs.uniform(-0.1, 0.1);
            chained = bayes_cqed(chained, dx, r, p, t / n);
            total += dx;
        }
        const auto once = bayes_cqed(start, total, r, p, t);
        CHECK(std::abs(chained.rho11() - once.rho11()) < 1e-8);
        CHECK(std::abs(chained.rho12() - once.rho12()) < 1e-8);
    }
}

TEST_CASE("short-time weak value")
{
    const auto p = reference_params();
    const auto q = quadrature_pair(p);
    const auto pps = theta_selection(0.6 * kPi);
    const auto w = aav_weak_value(pps);
    const double dt = 0.01;

    CqedRates info = q.info;
    info.Omega_tilde = 0.0;
    const double expect =
        -std::sqrt(info.Gamma_ci) * dt * w.re() / (1.0 + 0.5 * info.Gamma_d * (w.abs2() - 1.0) * dt);
    CHECK(wv_cqed_short(pps, info, dt) == doctest::Approx(expect).epsilon(1e-14));

    const PrePostSelection complex_pps{PureState::normalized(1.0, Complex(0.3, 0.8)), PureState::normalized(1.0, 0.5)};
    const auto wc = aav_weak_value(complex_pps);
    const double back = wv_cqed_short(complex_pps, q.backaction, 1e-9);
    CHECK(back == doctest::Approx(-std::sqrt(q.backaction.Gamma_ba) * 1e-9 * wc.im()).epsilon(1e-8));
}

TEST_CASE("eigenstate selection gives the record mean of |1>")
{
    const auto q = quadrature_pair(reference_params());
    const PrePostSelection pps{PureState::basis1(), PureState::basis1()};
    const double t = 0.7;
    const auto v = wv_cqed_finite(pps, q.info, t);
    CHECK(v.ratio == doctest::Approx(-std::sqrt(q.info.Gamma_ci) * t).epsilon(1e-15));
    CHECK(v.compact == doctest::Approx(v.ratio).epsilon(1e-15));
}

TEST_CASE("finite-time ratio and compact forms agree")
{
    Sampler rs(7);
    for (int i = 0; i < 100; ++i) {
        CqedParams p;
        p.chi = rs.uniform(0.01, 0.2);
        p.kappa = rs.uniform(1.0, 5.0);
        p.eps_m = rs.uniform(0.5, 10.0);
        p.delta_r = rs.uniform(-0.5, 0.5);
        p.phi_lo = rs.uniform(-kPi, kPi);
        p.omega_q = rs.uniform(-2.0, 2.0);
        const PrePostSelection pps{rs.pure(), rs.pure()};
        const auto v = wv_cqed_finite(pps, rates(p), rs.uniform(0.05, 3.0));
        CHECK(std::abs(v.ratio - v.compact) < 1e-10);
    }
}

TEST_CASE("finite-time form reduces to the generic strength formula")
{
    auto p = reference_params();
    p.eps_m = 5.0;
    const auto q = quadrature_pair(p);
    CqedRates r = q.info;
    const double t = 0.8;
    r.Omega_tilde = 2.0 * kPi / t;
    const auto pps = theta_selection(0.7 * kPi);
    const double eps = std::sqrt(r.Gamma_ci) * t;
    const double g = r.Gamma_d_total() * t / 2.0;
    CHECK(wv_cqed_finite(pps, r, t).compact == doctest::Approx(-eps * wv_finite_strength(pps, g)).epsilon(1e-12));
}

TEST_CASE("finite-time form approaches the short-time form")
{
    auto p = reference_params();
    p.eps_m = 3.0;
    p.phi_lo = 0.5;
    p.omega_q = 0.4;
    const auto r = rates(p);
    const PrePostSelection pps{PureState::normalized(0.8, Complex(0.0, 0.6)), PureState::normalized(1.0, 1.0)};
    // Both forms are odd in t at leading order; compare per unit time.
    const double t = 1e-3 / r.Gamma_d_total();
    const double finite = wv_cqed_finite(pps, r, t).compact / t;
    const double half = wv_cqed_finite(pps, r, t / 2).compact / (t / 2);
    const double short_rate = wv_cqed_short(pps, r, t) / t;
    const double short_half = wv_cqed_short(pps, r, t / 2) / (t / 2);
    const double richardson_finite = 2.0 * half - finite;
    const double richardson_short = 2.0 * short_half - short_rate;
    CHECK(std::abs(richardson_finite / richardson_short - 1.0) < 1e-3);
}

TEST_CASE("Monte Carlo agrees with the finite-time form")
{
    auto p = reference_params();
    p.eps_m = 4.0;
    p.omega_q = 0.5;
    const auto q = quadrature_pair(p);
    const double t = 0.3 / q.info.Gamma_ci;
    const PrePostSelection pps{PureState::normalized(0.8, Complex(0.0, 0.6)), PureState::normalized(1.0, 1.0)};
    for (const auto& r : {q.info, q.backaction}) {
        const double closed = wv_cqed_finite(pps, r, t).compact;
        const auto bayes = mc_cqed_weak_value(pps, r, p, t, 10, CqedStepper::Bayes, 100000, 3, 2);
        CHECK(std::abs(bayes.rejection.mean - closed) < 3.0 * bayes.rejection.std_error);
        const auto qte = mc_cqed_weak_value(pps, r, p, t, 200, CqedStepper::Qte, 100000, 4, 2);
        CHECK(std::abs(qte.rejection.mean - closed) < 3.0 * qte.rejection.std_error);
    }
}

TEST_CASE("ensemble coherence decays at the total dephasing rate")
{
    auto p = reference_params();
    p.eps_m = 5.0;
    p.phi_lo = 0.3;
    p.omega_q = 1.0;
    const auto r = rates(p);
    const double dt = 2e-3;
    const auto decay = coherence_decay(QubitState(0.5, 0.5), 500, dt, 100000, 9,
                                       [&](const QubitState& s, double dW) { return step_cqed_qte(s, r, dW, dt); });
    CHECK(decay.rate == doctest::Approx(r.Gamma_d_total()).epsilon(0.02));
}

TEST_CASE("tomography round trip")
{
    const auto p = reference_params();
    const auto q = quadrature_pair(p);
    const double t = 0.5;
    const auto psi_i = PureState::normalized(1.0, 1.0);
    const auto psi_f = theta_selection(0.3 * kPi).psi_f;
    const PrePostSelection pps{psi_i, psi_f};
    const double xi = wv_cqed_finite(pps, q.info, t).compact;
    const double xb = wv_cqed_finite(pps, q.backaction, t).compact;
    for (auto scheme : {TomographyScheme::Newton, TomographyScheme::DampedFixedPoint}) {
        const auto res = tomography(psi_f, xi, xb, p, t, 50, scheme);
        CHECK(1.0 - fidelity(res.psi_i, psi_i) < 1e-8);
        CHECK_FALSE(res.singular);
        if (scheme == TomographyScheme::Newton) {
            CHECK(res.iterations <= 5);
        }
    }
}

TEST_CASE("tomography pole and failure modes")
{
    const auto p = reference_params();
    const auto q = quadrature_pair(p);
    const double t = 0.5;
    const auto psi_f = theta_selection(0.3 * kPi).psi_f;
    const PrePostSelection pps{PureState::basis1(), psi_f};
    const double xi = wv_cqed_finite(pps, q.info, t).compact;
    const double xb = wv_cqed_finite(pps, q.backaction, t).compact;
    const auto res = tomography(psi_f, xi, xb, p, t);
    CHECK(res.singular);
    CHECK(fidelity(res.psi_i, PureState::basis1()) == doctest::Approx(1.0));

    CHECK_THROWS_AS(tomography(PureState::basis1(), xi, xb, p, t), InvalidArgument);
    // a record far past the turnover has no consistent denominator
    CHECK_THROWS_AS(tomography(psi_f, -1e3, 0.0, p, t), NoConvergence);
    CHECK_THROWS_AS(tomography(psi_f, xi, xb, p, t, 0), InvalidArgument);
}
