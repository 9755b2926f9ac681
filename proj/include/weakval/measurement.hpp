#pragma once

#include <cmath>
#include <cstddef>

namespace weakval {

/// Gaussian outcome statistics P_j(x) = N(x; xbar_j, D) of the integrated
/// output x for qubit basis state |j>.
struct GaussianLikelihood {
    double xbar1;
    double xbar2;
    double D;

    /// xbar_{1,2} = +-eps.
    static GaussianLikelihood symmetric(double eps, double variance) { return {eps, -eps, variance}; }

    /// Throws InvalidArgument unless D > 0 and the means are finite.
    void validate() const;

    double midpoint() const { return 0.5 * (xbar1 + xbar2); }
    double half_separation() const { return 0.5 * (xbar1 - xbar2); }

    /// exp[-(xbar1 - xbar2)^2 / (8D)], the Bhattacharyya overlap of P_1 and P_2.
    double overlap_factor() const { return std::exp(-(xbar1 - xbar2) * (xbar1 - xbar2) / (8.0 * D)); }

    /// Exponent of P_j(x) without the common normalization: -(x - xbar_j)^2 / (2D).
    double log_kernel1(double x) const { return -(x - xbar1) * (x - xbar1) / (2.0 * D); }
    double log_kernel2(double x) const { return -(x - xbar2) * (x - xbar2) / (2.0 * D); }

    /// Normalized density P_j(x), j in {1, 2}.
    double density(int j, double x) const;
};

/// Rate gamma, integration step and total duration of a continuous measurement.
/// Quantities labelled "duration" use t_total; the step_* variants use dt_step.
struct MeasurementStrength {
    double gamma;
    double dt_step;
    double t_total;

    /// Throws InvalidArgument unless gamma > 0, dt_step > 0 and t_total >= dt_step.
    void validate() const;

    std::size_t n_steps() const;

    /// eps = 2 sqrt(gamma) t: output shift produced by a basis state.
    double epsilon() const { return 2.0 * std::sqrt(gamma) * t_total; }
    double variance() const { return t_total; }
    /// g = gamma t.
    double g() const { return gamma * t_total; }
    /// exp(-(xbar1 - xbar2)^2 / 8D) = exp(-2g).
    double G_bayes() const { return std::exp(-2.0 * g()); }
    /// (1 - exp(-2g)) / 2.
    double script_G() const { return 0.5 * (1.0 - std::exp(-2.0 * g())); }

    double step_epsilon() const { return 2.0 * std::sqrt(gamma) * dt_step; }

    GaussianLikelihood likelihood() const { return GaussianLikelihood::symmetric(epsilon(), variance()); }
    GaussianLikelihood step_likelihood() const { return GaussianLikelihood::symmetric(step_epsilon(), dt_step); }

    /// 4 sqrt(gamma dt) <= 0.2 keeps every per-step state kick small.
    bool step_guard_ok() const { return 4.0 * std::sqrt(gamma * dt_step) <= 0.2 + 1e-15; }
};

/// (I0, deltaI, S0) of the physical detector current.
struct DetectorCalibration {
    double I0;
    double deltaI;
    double S0;

    void validate() const;
    /// gamma = deltaI^2 / (8 S0).
    double gamma() const { return deltaI * deltaI / (8.0 * S0); }
};

/// J = (I - I0) / sqrt(S0/2).
double normalize_current(double raw, const DetectorCalibration& cal);

}  // namespace weakval
