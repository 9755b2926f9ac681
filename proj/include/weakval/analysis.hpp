#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "weakval/core.hpp"
#include "weakval/parallel.hpp"
#include "weakval/trajectory.hpp"

namespace weakval {

/// Least-squares slope of y against x.
double fit_line_slope(std::span<const double> x, std::span<const double> y);
/// Least-squares slope of log y against log x.
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

/// Frobenius distance between two qubit states.
double state_distance(const QubitState& a, const QubitState& b);

/// Strong error E|rho_s(T) - rho_ref(T)| at a fixed horizon T.
///
/// Every path draws Wiener increments on a fine grid dt_fine = min(dt)/refine;
/// coarser grids sum the same increments (common random numbers), and the
/// reference is the exact Bayes stepper on the fine grid. The Bayes update is
/// a function of the integrated record only, whose drift enters additively,
/// so that reference converges with strong order one.
struct StrongConvergence {
    std::vector<double> dt;
    std::vector<Stepper> steppers;
    std::vector<std::vector<double>> error;  ///< [stepper][dt]
    std::vector<double> slope;               ///< fitted log-log order per stepper
};
StrongConvergence strong_convergence(double gamma, double horizon, std::span<const double> dt, int refine,
                                     std::span<const Stepper> steppers, std::int64_t n_paths,
                                     std::uint64_t seed, const QubitState& initial,
                                     unsigned workers = worker_count());

/// Mean one-step discrepancy E|step_s(rho, dW) - bayes_update(rho, x(dW))| over
/// random pure states and dW ~ N(0, dt).
std::vector<double> local_discrepancy(double gamma, std::span<const double> dt, Stepper stepper,
                                      std::int64_t n_samples, std::uint64_t seed);

/// Largest |bayes_expand_small(order 2) - step_ito_euler| over random pure
/// states and increments.
double expansion_euler_gap(double gamma, double dt, std::int64_t n_samples, std::uint64_t seed);

/// |E rho12(t_k)| along an ensemble and the fitted exponential rate.
struct CoherenceDecay {
    std::vector<double> t;
    std::vector<double> magnitude;
    double rate;
};
using IncrementStep = std::function<QubitState(const QubitState&, double dW)>;
/// dW ~ N(0, dt) at every step; the rate is minus the least-squares slope of
/// log |E rho12| against t over all recorded times.
CoherenceDecay coherence_decay(const QubitState& initial, std::size_t n_steps, double dt,
                               std::int64_t n_traj, std::uint64_t seed, const IncrementStep& step,
                               unsigned workers = worker_count());

}  // namespace weakval
