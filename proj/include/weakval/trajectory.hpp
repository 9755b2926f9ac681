#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "weakval/core.hpp"
#include "weakval/measurement.hpp"

namespace weakval {

/// Integrators for the Ito quantum trajectory equation
///   d rho = gamma D[sz] rho dt + sqrt(gamma) H[sz] rho dW
/// of a qubit under continuous sigma^z measurement with output
///   x = J dt = 2 sqrt(gamma) <sz> dt + dW.
///
/// All steppers keep rho22 = 1 - rho11, so the trace is exact. None of them
/// projects back onto the Bloch ball: a single Ito step moves a pure state off
/// the sphere by 4 gamma rho11 rho22 (dt - dW^2) + O(dt^2), which averages to
/// zero, and clipping it would bias ensemble averages. Only the rho11 range is
/// clamped (violations above 1e-10 throw StateInvariantViolation).
///
/// Milstein off-diagonal correction. Expanding the exact Bayes update to
/// (dW)^2 with u = 2 sqrt(gamma) x gives
///   d rho12 = rho12 [-2 sqrt(gamma) <sz> dW - 4 gamma <sz>^2 dt - 2 gamma dW^2 + 4 gamma <sz>^2 dW^2]
///           = -2 gamma rho12 dt - 2 sqrt(gamma) <sz> rho12 dW
///             + 2 gamma (2 <sz>^2 - 1) rho12 [(dW)^2 - dt],
/// which is also (1/2) L^1 b_12 of the standard Milstein scheme with
/// b_11 = 4 sqrt(gamma) rho11 rho22, b_12 = -2 sqrt(gamma) <sz> rho12.
enum class Stepper { ItoEuler, ItoMilstein, Stratonovich, BayesExact };

std::string_view to_string(Stepper s);
/// Accepts "ito-euler", "ito-milstein", "stratonovich", "bayes-exact".
Stepper parse_stepper(std::string_view name);

/// x = 2 sqrt(gamma) <sz> dt_step + dW.
double sample_output(const QubitState& state, const MeasurementStrength& ms, double dW);

QubitState step_ito_euler(const QubitState& state, const MeasurementStrength& ms, double dW);
QubitState step_ito_milstein(const QubitState& state, const MeasurementStrength& ms, double dW);
/// Heun (predictor-corrector) step of the Stratonovich form
///   rho11' = 8 gamma <sz> rho11 rho22 + 4 sqrt(gamma) rho11 rho22 xi,
///   rho12' = -4 gamma <sz>^2 rho12 - 2 sqrt(gamma) <sz> rho12 xi.
QubitState step_stratonovich(const QubitState& state, const MeasurementStrength& ms, double dW);
/// Exact Bayes update with the record x = sample_output(state, ms, dW).
QubitState step_bayes_exact(const QubitState& state, const MeasurementStrength& ms, double dW);

QubitState step(Stepper stepper, const QubitState& state, const MeasurementStrength& ms, double dW);

/// Drift and diffusion of rho11 and rho12 in both calculi.
struct QteCoefficients {
    double ito_drift11;
    Complex ito_drift12;
    double strat_drift11;
    Complex strat_drift12;
    double diffusion11;
    Complex diffusion12;
};
QteCoefficients qte_coefficients(const QubitState& state, double gamma);

/// Stratonovich-to-Ito drift correction (1/2) sum_k F_k dF/d rho_k per element,
/// with the chain rule through <sz> = 2 rho11 - 1 included.
struct ItoConversion {
    double strat_drift11;
    double correction11;
    double ito_drift11;
    Complex strat_drift12;
    Complex correction12;
    Complex ito_drift12;

    /// max |strat + correction - ito| over both elements.
    double residual() const;
};
ItoConversion ito_conversion_check(const QubitState& state, const MeasurementStrength& ms);

struct TrajectoryStep {
    double x;
    QubitState state_after;
};

struct TrajectoryRecord {
    std::vector<TrajectoryStep> steps;
    std::uint64_t seed;
    std::uint64_t index;
    Stepper stepper;
};

/// Generates one trajectory with Wiener increments dW ~ N(0, dt_step) drawn
/// from the stream (seed, index); reproducible in isolation.
TrajectoryRecord simulate_trajectory(const QubitState& initial, const MeasurementStrength& ms,
                                     Stepper stepper, std::uint64_t seed, std::uint64_t index);

/// CSV dump: trajectory,step,x,rho11,re_rho12,im_rho12.
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRecord>& records);

}  // namespace weakval
