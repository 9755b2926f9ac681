#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "weakval/core.hpp"
#include "weakval/measurement.hpp"
#include "weakval/parallel.hpp"
#include "weakval/quadrature.hpp"
#include "weakval/trajectory.hpp"

namespace weakval {

/// Leading-order weak value Re(sigma^z_w).
double wv_aav_linear(const PrePostSelection& pps);

/// Short-time weak value  Re(w) / (1 + g(|w|^2 - 1)),  g = gamma dt.
double wv_short_time(const PrePostSelection& pps, double g);

/// Numerator and denominator of the post-selected average
///   M1 = rf11 r11 xbar1 + rf22 r22 xbar2 + (xbar1 + xbar2) Re(rf12* r12) G
///   M2 = rf11 r11 + rf22 r22 + 2 Re(rf12* r12) G,     G = exp[-(xbar1-xbar2)^2 / 8D]
/// with r = |psi_i><psi_i| and rf = |psi_f><psi_f|.
struct SelectionMoments {
    double M1;
    double M2;
};
SelectionMoments bayes_moments(const PrePostSelection& pps, const GaussianLikelihood& lik);

/// Raw post-selected mean f<x>_i = M1/M2 at arbitrary strength.
/// Throws DegenerateDenominator when M2 vanishes to rounding.
double wv_bayes_general(const PrePostSelection& pps, const GaussianLikelihood& lik);

/// f<x>_i / eps = Re(w) / (1 + G(|w|^2 - 1)),  G = (1 - e^{-2g})/2.
/// For |<f|i>|^2 < 1e-12 the same quantity is evaluated in the amplitude form
/// Re(n o*) / ((1-G)|o|^2 + G|n|^2), o = <f|i>, n = <f|sz|i>, which is M1/(eps M2)
/// without the overflowing ratio; it yields the finite (vanishing) limit.
double wv_finite_strength(const PrePostSelection& pps, double g);

/// Raw f<x>_i from the defining integrals int x P_i(x) P_x(f) dx / int P_i(x) P_x(f) dx,
/// evaluated by Gauss-Hermite quadrature centred at the likelihood midpoint.
double wv_quadrature(const PrePostSelection& pps, const GaussianLikelihood& lik,
                     const GaussHermiteRule& rule = gauss_hermite_64());

struct WeakValueEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_total = 0;
    std::int64_t n_selected = 0;
    double success_rate = 0.0;
};

/// Number of batches used for the batch-means standard error.
inline constexpr std::size_t kEstimatorBatches = 32;
/// Minimum accepted records for a rejection-sampling estimate.
inline constexpr std::int64_t kMinSelections = 100;

/// Both estimators from one set of simulated records (raw x, not divided by eps).
struct McWeakValue {
    WeakValueEstimate rejection;  ///< mode A: accept x with probability P_x(f)
    WeakValueEstimate weighting;  ///< mode B: sum x P_x(f) / sum P_x(f)
    double epsilon;               ///< 2 sqrt(gamma) t_total
};

/// Monte Carlo evaluation of the post-selected average.
///
/// Each trajectory starts in |psi_i><psi_i| and runs ms.n_steps() increments.
/// Every increment x_k is drawn from the exact one-step output distribution of
/// the current state (the Gaussian mixture rho11 P1 + rho22 P2 with
/// xbar = +-2 sqrt(gamma) dt, D = dt); the state is then advanced either by the
/// Bayes rule or by the chosen SDE stepper with dW = x_k - 2 sqrt(gamma) <sz> dt.
/// Trajectories are split into 32 index-ordered batches whose partial sums are
/// merged in order, so results do not depend on the worker count.
///
/// Throws NoSelections when fewer than 100 records are accepted in mode A.
McWeakValue mc_weak_value(const PrePostSelection& pps, const MeasurementStrength& ms, Stepper stepper,
                          std::int64_t n_traj, std::uint64_t seed, unsigned workers = worker_count());

/// Partial sums of one estimator batch.
struct RatioSums {
    double sum_xw = 0.0;
    double sum_w = 0.0;
};

/// Ratio estimate sum_xw/sum_w with a batch-means standard error
/// (linearized ratio: se^2 = B/(B-1) sum_b (S_xw,b - R S_w,b)^2 / S_w^2).
/// Throws DegenerateDenominator when the total weight is zero.
WeakValueEstimate ratio_estimate(std::span<const RatioSums> batches);

struct Fig1Row {
    double theta;
    double aav;      ///< tan(theta/2)
    double nonpert;  ///< Re(w)/(1 + g(|w|^2-1))
};

struct Fig1Curve {
    std::vector<Fig1Row> rows;
    double theta_star;  ///< maximizer of the non-perturbative curve
    double peak;        ///< its value
    bool interior;      ///< maximizer strictly inside the grid
};

/// Both curves on the supplied grid (each theta in (0, pi)) and the turnover,
/// refined by golden-section search around the best grid point.
Fig1Curve fig1_curve(double g, std::span<const double> theta_grid);

}  // namespace weakval
