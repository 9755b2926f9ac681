#pragma once

#include <cstdint>

#include "weakval/core.hpp"
#include "weakval/measurement.hpp"
#include "weakval/parallel.hpp"
#include "weakval/weak_value.hpp"

namespace weakval {

/// Second-tier linear amplifier: v_tilde = v0 + R x + noise, noise ~ N(0, sigma_tilde^2).
struct AmplifierModel {
    double R = 1.0;
    double v0 = 0.0;
    double sigma_tilde = 0.0;

    /// Throws InvalidArgument unless R > 0 and sigma_tilde >= 0.
    void validate() const;

    /// Noise referred back to the x scale: sigma_tilde / R.
    double sigma() const { return sigma_tilde / R; }
};

struct AmplifiedOutput {
    double v_tilde;
    double v;  ///< (v_tilde - v0) / R
};

AmplifiedOutput amplify(double x, const AmplifierModel& amp, double noise_draw);

/// State conditioned on the amplified record v:
///   rho11 B1/N, rho22 B2/N, rho12 B3/N,
///   B_j = exp[-(v - xbar_j)^2 / 2(D + sigma^2)],
///   B3  = exp[-(xbar1 - xbar2)^2 / 8D] exp[-(v - xbar0)^2 / 2(D + sigma^2)].
/// sigma = 0 is routed to bayes_update unchanged.
QubitState state_given_v(const QubitState& state, double v, const GaussianLikelihood& lik,
                         const AmplifierModel& amp);

/// Post-selected mean of v from the Gaussian integrals over v. Every
/// component of P_i(v) P_v(f) is a Gaussian of variance D + sigma^2 whose mean
/// does not depend on sigma, so the result is the noiseless M1/M2.
double wv_with_amplifier(const PrePostSelection& pps, const GaussianLikelihood& lik,
                         const AmplifierModel& amp);

/// Sampled chain: x from P_i(x), v from the amplifier, state_given_v, then
/// acceptance with probability <psi_f|rho_v|psi_f>. Estimates the raw mean of v
/// over accepted records with the same batching as mc_weak_value.
WeakValueEstimate mc_amplifier_chain(const PrePostSelection& pps, const GaussianLikelihood& lik,
                                     const AmplifierModel& amp, std::int64_t n_records,
                                     std::uint64_t seed, unsigned workers = worker_count());

}  // namespace weakval
