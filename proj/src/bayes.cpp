#include "weakval/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace weakval {

namespace {

double safe_log(double p)
{
    return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
}

// Weights e^{offset + r} and e^{offset - r} on the diagonal, e^{offset + s12} on rho12.
// Only r and s12 enter the state, so a large common offset costs no precision.
QubitState update_centered(const QubitState& state, double r, Complex factor12, double s12, double offset)
{
    const double a = safe_log(state.rho11()) + r;
    const double b = safe_log(state.rho22()) - r;
    const double peak = std::max(a, b);
    const double log_norm = peak + std::log(std::exp(a - peak) + std::exp(b - peak));
    if (!(log_norm + offset >= kLogLikelihoodFloor)) {
        std::ostringstream msg;
        msg << "record likelihood underflow: log N = " << log_norm + offset;
        throw ZeroLikelihood(msg.str());
    }
    const double rho11 = std::exp(a - log_norm);
    const Complex rho12 = state.rho12() == Complex(0.0, 0.0)
                              ? Complex(0.0, 0.0)
                              : state.rho12() * factor12 * std::exp(s12 - log_norm);
    return QubitState::from_integrator(rho11, rho12);
}

}  // namespace

QubitState weighted_update(const QubitState& state, double log_w1, double log_w2, Complex factor12,
                           double log_w12)
{
    const double c = 0.5 * (log_w1 + log_w2);
    return update_centered(state, 0.5 * (log_w1 - log_w2), factor12, log_w12 - c, c);
}

QubitState bayes_update(const QubitState& state, double x, const GaussianLikelihood& lik)
{
    lik.validate();
    // log P1 - log P2 = 2 eps (x - xbar) / D, formed without the large common part
    const double r = lik.half_separation() * (x - lik.midpoint()) / lik.D;
    return update_centered(state, r, 1.0, 0.0, 0.5 * (lik.log_kernel1(x) + lik.log_kernel2(x)));
}

QubitState bayes_expand_small(const QubitState& state, double x, const GaussianLikelihood& lik,
                              int order)
{
    lik.validate();
    if (order != 1 && order != 2) {
        throw InvalidArgument("expansion order must be 1 or 2");
    }
    const double eps = lik.half_separation();
    const double u = eps * (x - lik.midpoint()) / lik.D;
    const double z = state.sz();
    if (std::abs(u * z) >= 1.0) {
        throw ExpansionDiverged("small-signal expansion diverges: |eps x <sz> / D| >= 1");
    }

    if (order == 1) {
        const double denom = 1.0 + z * u;
        return QubitState::from_integrator(state.rho11() * (1.0 + u) / denom,
                                           state.rho12() / denom);
    }

    const double u2 = eps * eps / lik.D;
    const double rho11 = state.rho11() * (1.0 + (1.0 - z) * (u - z * u2));
    const Complex rho12 = state.rho12() * (1.0 - z * u - 0.5 * u2 + z * z * u2);
    return QubitState::from_integrator(rho11, rho12);
}

QubitState bayes_finite_time(const QubitState& state, double x_integrated,
                             const MeasurementStrength& ms)
{
    ms.validate();
    return bayes_update(state, x_integrated, ms.likelihood());
}

}  // namespace weakval
