#include "weakval/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "weakval/bayes.hpp"
#include "weakval/csv.hpp"
#include "weakval/rng.hpp"

namespace weakval {

std::string_view to_string(Stepper s)
{
    switch (s) {
    case Stepper::ItoEuler: return "ito-euler";
    case Stepper::ItoMilstein: return "ito-milstein";
    case Stepper::Stratonovich: return "stratonovich";
    case Stepper::BayesExact: return "bayes-exact";
    }
    return "unknown";
}

Stepper parse_stepper(std::string_view name)
{
    for (Stepper s : {Stepper::ItoEuler, Stepper::ItoMilstein, Stepper::Stratonovich,
                      Stepper::BayesExact}) {
        if (name == to_string(s)) {
            return s;
        }
    }
    throw InvalidArgument("unknown stepper '" + std::string(name) +
                          "' (expected ito-euler, ito-milstein, stratonovich or bayes-exact)");
}

double sample_output(const QubitState& state, const MeasurementStrength& ms, double dW)
{
    return 2.0 * std::sqrt(ms.gamma) * state.sz() * ms.dt_step + dW;
}

QubitState step_ito_euler(const QubitState& state, const MeasurementStrength& ms, double dW)
{
    const double sg = std::sqrt(ms.gamma);
    const double z = state.sz();
    const double rho11 = state.rho11() + 2.0 * sg * (1.0 - z) * state.rho11() * dW;
    const Complex rho12 = state.rho12() - 2.0 * state.rho12() * (ms.gamma * ms.dt_step + sg * z * dW);
    return QubitState::from_integrator(rho11, rho12);
}

QubitState step_ito_milstein(const QubitState& state, const MeasurementStrength& ms, double dW)
{
    const double sg = std::sqrt(ms.gamma);
    const double z = state.sz();
    const double p = state.rho11() * state.rho22();
    const double ito_correction = dW * dW - ms.dt_step;
    const double rho11 = state.rho11() + 4.0 * sg * p * dW - 8.0 * ms.gamma * p * z * ito_correction;
    const Complex rho12 = state.rho12() - 2.0 * state.rho12() * (ms.gamma * ms.dt_step + sg * z * dW) +
                          2.0 * ms.gamma * (2.0 * z * z - 1.0) * state.rho12() * ito_correction;
    return QubitState::from_integrator(rho11, rho12);
}

QteCoefficients qte_coefficients(const QubitState& state, double gamma)
{
    const double sg = std::sqrt(gamma);
    const double z = state.sz();
    const double p = state.rho11() * state.rho22();
    const Complex r12 = state.rho12();
    return {
        0.0,
        -2.0 * gamma * r12,
        8.0 * gamma * z * p,
        -4.0 * gamma * z * z * r12,
        4.0 * sg * p,
        -2.0 * sg * z * r12,
    };
}

QubitState step_stratonovich(const QubitState& state, const MeasurementStrength& ms, double dW)
{
    const double dt = ms.dt_step;
    const double sg = std::sqrt(ms.gamma);
    // Raw (rho11, rho12) arithmetic: the predictor is not required to be physical.
    auto drift_diffusion = [&](double r11, Complex r12) {
        const double z = 2.0 * r11 - 1.0;
        const double p = r11 * (1.0 - r11);
        struct {
            double a11;
            Complex a12;
            double b11;
            Complex b12;
        } c{8.0 * ms.gamma * z * p, -4.0 * ms.gamma * z * z * r12, 4.0 * sg * p, -2.0 * sg * z * r12};
        return c;
    };

    const auto c0 = drift_diffusion(state.rho11(), state.rho12());
    const double p11 = state.rho11() + c0.a11 * dt + c0.b11 * dW;
    const Complex p12 = state.rho12() + c0.a12 * dt + c0.b12 * dW;
    const auto c1 = drift_diffusion(p11, p12);

    const double rho11 = state.rho11() + 0.5 * (c0.a11 + c1.a11) * dt + 0.5 * (c0.b11 + c1.b11) * dW;
    const Complex rho12 = state.rho12() + 0.5 * (c0.a12 + c1.a12) * dt + 0.5 * (c0.b12 + c1.b12) * dW;
    return QubitState::from_integrator(rho11, rho12);
}

QubitState step_bayes_exact(const QubitState& state, const MeasurementStrength& ms, double dW)
{
    return bayes_update(state, sample_output(state, ms, dW), ms.step_likelihood());
}

QubitState step(Stepper stepper, const QubitState& state, const MeasurementStrength& ms, double dW)
{
    switch (stepper) {
    case Stepper::ItoEuler: return step_ito_euler(state, ms, dW);
    case Stepper::ItoMilstein: return step_ito_milstein(state, ms, dW);
    case Stepper::Stratonovich: return step_stratonovich(state, ms, dW);
    case Stepper::BayesExact: return step_bayes_exact(state, ms, dW);
    }
    throw InvalidArgument("unknown stepper");
}

double ItoConversion::residual() const
{
    return std::max(std::abs(strat_drift11 + correction11 - ito_drift11),
                    std::abs(strat_drift12 + correction12 - ito_drift12));
}

ItoConversion ito_conversion_check(const QubitState& state, const MeasurementStrength& ms)
{
    const double gamma = ms.gamma;
    const double sg = std::sqrt(gamma);
    const auto c = qte_coefficients(state, gamma);
    const double z = state.sz();

    // F11 = 4 sqrt(gamma) rho11 (1 - rho11):  dF11/drho11 = 4 sqrt(gamma)(1 - 2 rho11) = -4 sqrt(gamma) z.
    const double dF11_d11 = -4.0 * sg * z;
    // F12 = -2 sqrt(gamma) (2 rho11 - 1) rho12.
    const Complex dF12_d11 = -4.0 * sg * state.rho12();
    const double dF12_d12 = -2.0 * sg * z;

    const double corr11 = 0.5 * c.diffusion11 * dF11_d11;
    const Complex corr12 = 0.5 * (c.diffusion11 * dF12_d11 + c.diffusion12 * dF12_d12);

    return {c.strat_drift11, corr11, c.ito_drift11, c.strat_drift12, corr12, c.ito_drift12};
}

TrajectoryRecord simulate_trajectory(const QubitState& initial, const MeasurementStrength& ms,
                                     Stepper stepper, std::uint64_t seed, std::uint64_t index)
{
    ms.validate();
    const CounterRng rng(seed, index);
    const double sdt = std::sqrt(ms.dt_step);
    const std::size_t n = ms.n_steps();

    TrajectoryRecord rec{{}, seed, index, stepper};
    rec.steps.reserve(n);
    QubitState state = initial;
    for (std::size_t k = 0; k < n; ++k) {
        const double dW = sdt * rng.normal(k, 0);
        const double x = sample_output(state, ms, dW);
        state = step(stepper, state, ms, dW);
        rec.steps.push_back({x, state});
    }
    return rec;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRecord>& records)
{
    CsvWriter csv(out, {"trajectory", "step", "x", "rho11", "re_rho12", "im_rho12"});
    for (const auto& rec : records) {
        for (std::size_t k = 0; k < rec.steps.size(); ++k) {
            const auto& s = rec.steps[k];
            csv.row({static_cast<long long>(rec.index), static_cast<long long>(k), s.x,
                     s.state_after.rho11(), s.state_after.rho12().real(), s.state_after.rho12().imag()});
        }
    }
}

}  // namespace weakval
