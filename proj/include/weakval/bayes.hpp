#pragma once

#include "weakval/core.hpp"
#include "weakval/measurement.hpp"

namespace weakval {

/// Log-normalization floor: a record whose likelihood N(x) falls below e^-700
/// (relative to the Gaussian peak) is rejected with ZeroLikelihood.
inline constexpr double kLogLikelihoodFloor = -700.0;

/// Generic Bayes-type update from log-weights:
/// rho11 -> rho11 e^{l1} / N, rho22 -> rho22 e^{l2} / N, rho12 -> rho12 e^{l12} / N,
/// N = rho11 e^{l1} + rho22 e^{l2}. Evaluated entirely in log space.
QubitState weighted_update(const QubitState& state, double log_w1, double log_w2, Complex factor12,
                           double log_w12);

/// Exact quantum Bayesian rule for Gaussian likelihoods:
/// rho11 P1/N, rho22 P2/N, rho12 sqrt(P1 P2)/N. Valid at any measurement strength.
QubitState bayes_update(const QubitState& state, double x, const GaussianLikelihood& lik);

/// Small-signal expansion of bayes_update with u = eps (x - xbar0) / D.
///
/// order 1: rational first-order forms
///   rho11 (1+u)/(1+<sz>u), rho22 (1-u)/(1+<sz>u), rho12 /(1+<sz>u).
/// The printed off-diagonal form carries a stray (eps x / 2D)^4 factor and a
/// (1 + eps x / D)^-1 denominator; it is not reproduced here. The expression
/// above is what sqrt(P1 P2)/N reduces to at first order.
///
/// order 2: expansion kept to u^2 with the Ito rule (dW)^2 -> dt applied,
/// i.e. u^2 -> eps^2 / D. For eps = 2 sqrt(gamma) dt, D = dt this coincides
/// term by term with the Ito-Euler update.
///
/// Used only to demonstrate the Bayes/QTE correspondence, never for stepping.
/// Throws ExpansionDiverged when |u <sz>| >= 1.
QubitState bayes_expand_small(const QubitState& state, double x, const GaussianLikelihood& lik,
                              int order);

/// bayes_update with xbar_{1,2} = +-2 sqrt(gamma) t_total and D = t_total.
QubitState bayes_finite_time(const QubitState& state, double x_integrated,
                             const MeasurementStrength& ms);

}  // namespace weakval
