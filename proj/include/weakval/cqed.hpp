#pragma once

#include <cstdint>

#include "weakval/core.hpp"
#include "weakval/measurement.hpp"
#include "weakval/parallel.hpp"
#include "weakval/weak_value.hpp"

namespace weakval {

/// Which qubit frequency enters the rotating phase: omega_q + B, or the
/// dispersively renormalized omega_q + chi + B.
enum class OmegaConvention { BarePlusStark, DressedPlusStark };

/// Prefactor of the measurement-record phase Phi2 = -k x of the Bayesian rule.
/// BackAction (k = sqrt(Gamma_ba)) is the integral of the back-action term and
/// is what reproduces the finite-time M1/M2; InfoGain (k = sqrt(Gamma_ci)) is
/// kept for comparison.
enum class RecordPhase { BackAction, InfoGain };

/// Dispersive readout parameters (frequencies in rad/time).
struct CqedParams {
    double chi = 0.1;
    double kappa = 2.0;
    double eps_m = 1.0;
    double delta_r = 0.0;
    double phi_lo = 0.0;
    double omega_q = 0.0;
    /// |<alpha2|alpha1>|, multiplies the updated coherence.
    double purity_factor = 1.0;
    OmegaConvention omega = OmegaConvention::BarePlusStark;
    RecordPhase record_phase = RecordPhase::BackAction;

    /// Throws InvalidArgument on kappa <= 0, non-finite fields or purity outside (0, 1].
    void validate() const;

    /// |chi|/kappa < 0.1: the steady-state (bad-cavity) description applies.
    bool bad_cavity_ok() const { return std::abs(chi) / kappa < 0.1; }
};

struct CavityFields {
    Complex alpha1;
    Complex alpha2;

    Complex beta() const { return alpha2 - alpha1; }
    /// arg(beta) reduced to (-pi/2, pi/2]; the rates only depend on it modulo pi.
    double theta_beta() const;
    /// Mean photon number (|alpha1|^2 + |alpha2|^2)/2.
    double nbar() const { return 0.5 * (std::norm(alpha1) + std::norm(alpha2)); }
};

/// alpha_{1,2} = -i eps_m / [-i(delta_r +- chi) + kappa/2].
CavityFields steady_fields(const CqedParams& p);

struct CqedRates {
    double Gamma_d;   ///< 2 chi Im(alpha1 alpha2*)
    double Gamma_ci;  ///< kappa |beta|^2 cos^2(phi - theta_beta)
    double Gamma_ba;  ///< kappa |beta|^2 sin^2(phi - theta_beta)
    double B;         ///< 2 chi Re(alpha1 alpha2*)
    double Omega_tilde;

    double Gamma_d_total() const { return 0.5 * (Gamma_ci + Gamma_ba); }
};

CqedRates rates(const CavityFields& f, const CqedParams& p);
inline CqedRates rates(const CqedParams& p) { return rates(steady_fields(p), p); }

/// xbar_{1,2} = -+sqrt(Gamma_ci) t, D = t.
GaussianLikelihood cqed_likelihood(const CqedRates& r, double t);

/// x = -sqrt(Gamma_ci) <sz> dt + dW.
double cqed_output(const QubitState& state, const CqedRates& r, double dW, double dt);

/// Euler step of the polaron-frame trajectory equation
///   d rho11 = -2 sqrt(Gamma_ci) rho11 rho22 dW
///   d rho12 = -Gamma_d rho12 dt + sqrt(Gamma_ci) <sz> rho12 dW + i sqrt(Gamma_ba) rho12 dW
/// followed by the exact rotation rho12 -> rho12 exp(-i Omega_tilde dt).
QubitState step_cqed_qte(const QubitState& state, const CqedRates& r, double dW, double dt);

/// Finite-time Bayesian rule: diagonals as bayes_update with cqed_likelihood,
/// rho12 additionally multiplied by purity_factor exp(-i Omega_tilde t_m) exp(-i Phi2),
/// Phi2 = -k x with k chosen by CqedParams::record_phase.
QubitState bayes_cqed(const QubitState& state, double x, const CqedRates& r, const CqedParams& p,
                      double t_m);

/// Short-time post-selected mean of x:
///   -(eps1 Re w + eps2 Im w) / (1 + [Omega_tilde Im w + (Gamma_d/2)(|w|^2 - 1)] dt),
///   eps1 = sqrt(Gamma_ci) dt, eps2 = sqrt(Gamma_ba) dt.
double wv_cqed_short(const PrePostSelection& pps, const CqedRates& r, double dt);

/// The bracket of the short-time denominator times dt; values beyond 0.5 in
/// magnitude mean dt is too long for the short-time form.
double cqed_short_correction(const PrePostSelection& pps, const CqedRates& r, double dt);

/// Finite-time post-selected mean of x, evaluated two ways:
///   ratio:   M1/M2 with
///            M1 = -sqrt(Gamma_ci) t (rf11 r11 - rf22 r22) + 2 sqrt(Gamma_ba) t e^{-Gd t} Im(rf12 r12* e^{i W t})
///            M2 = rf11 r11 + rf22 r22 + 2 e^{-Gd t} Re(rf12 r12* e^{i W t})
///   compact: -(eps1 Re w~ + eps2 Im w~) / (1 + G (|w~|^2 - 1)),
///            eps1 = sqrt(Gamma_ci) t, eps2 = sqrt(Gamma_ba) t e^{-Gd t}, G = (1 - e^{-Gd t})/2,
///            w~ the weak value of psi_i with c1 -> c1 e^{-i W t}.
/// Gd = (Gamma_ci + Gamma_ba)/2, W = Omega_tilde.
struct CqedFiniteWv {
    double ratio;
    double compact;
};
CqedFiniteWv wv_cqed_finite(const PrePostSelection& pps, const CqedRates& r, double t_m);

/// Rates at the two tomography quadratures phi = theta_beta and theta_beta + pi/2.
struct QuadraturePair {
    CqedRates info;       ///< Gamma_ba = 0
    CqedRates backaction; ///< Gamma_ci = 0
};
QuadraturePair quadrature_pair(const CqedParams& p);

enum class TomographyScheme { Newton, DampedFixedPoint };

struct TomographyResult {
    PureState psi_i;
    Complex w_tilde;
    int iterations;
    /// w~ = 1 to 1e-12: the ratio c1/c2 diverges and psi_i is the limiting |1>.
    bool singular;
};

/// Reconstructs psi_i from the post-selected means measured at the two
/// quadratures. The measured values fix u = w~/s with s = 1 + G(|w~|^2 - 1),
/// so s solves G|u|^2 s^2 - s + 1 - G = 0; starting from s = 1 (the
/// uncorrected estimate) the denominator is refined until successive w~
/// differ by less than 1e-9. The root connected to s = 1 at G -> 0 is taken,
/// i.e. w~ is assumed to lie below the turnover |w~|^2 = (1 - G)/G.
/// Then c1~/c2~ = (f2*/f1*)(1 + w~)/(1 - w~) and c1 = c1~ e^{i Omega_tilde t_m}.
/// Throws NoConvergence when no real root exists or max_iter is exhausted,
/// InvalidArgument when psi_f has a vanishing component.
TomographyResult tomography(const PureState& psi_f, double x_info, double x_backaction,
                            const CqedParams& p, double t_m, int max_iter = 50,
                            TomographyScheme scheme = TomographyScheme::Newton);

enum class CqedStepper { Bayes, Qte };

/// Monte Carlo post-selected mean of x = sum of n_steps increments over t_m.
/// Increments are drawn from the one-step output mixture of the current state;
/// the state is advanced by bayes_cqed or by step_cqed_qte with
/// dW = x + sqrt(Gamma_ci) <sz> dt. Batching as in mc_weak_value; epsilon is
/// sqrt(Gamma_ci) t_m.
McWeakValue mc_cqed_weak_value(const PrePostSelection& pps, const CqedRates& r, const CqedParams& p,
                               double t_m, std::size_t n_steps, CqedStepper stepper,
                               std::int64_t n_traj, std::uint64_t seed,
                               unsigned workers = worker_count());

}  // namespace weakval
