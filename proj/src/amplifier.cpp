#include "weakval/amplifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "weakval/bayes.hpp"
#include "weakval/rng.hpp"

namespace weakval {

void AmplifierModel::validate() const
{
    if (!(R > 0.0) || !std::isfinite(R)) {
        std::ostringstream msg;
        msg << "amplifier gain R must be > 0 (got " << R << ")";
        throw InvalidArgument(msg.str());
    }
    if (!(sigma_tilde >= 0.0) || !std::isfinite(sigma_tilde)) {
        std::ostringstream msg;
        msg << "amplifier noise sigma_tilde must be >= 0 (got " << sigma_tilde << ")";
        throw InvalidArgument(msg.str());
    }
    if (!std::isfinite(v0)) {
        throw InvalidArgument("amplifier offset v0 must be finite");
    }
}

AmplifiedOutput amplify(double x, const AmplifierModel& amp, double noise_draw)
{
    amp.validate();
    const double v_tilde = amp.v0 + x * amp.R + noise_draw;
    return {v_tilde, (v_tilde - amp.v0) / amp.R};
}

QubitState state_given_v(const QubitState& state, double v, const GaussianLikelihood& lik,
                         const AmplifierModel& amp)
{
    amp.validate();
    lik.validate();
    const double s = amp.sigma();
    if (s == 0.0) {
        return bayes_update(state, v, lik);
    }
    const double width = 2.0 * (lik.D + s * s);
    const double d1 = v - lik.xbar1;
    const double d2 = v - lik.xbar2;
    const double d0 = v - lik.midpoint();
    const double sep = lik.xbar1 - lik.xbar2;
    return weighted_update(state, -d1 * d1 / width, -d2 * d2 / width, 1.0,
                           -sep * sep / (8.0 * lik.D) - d0 * d0 / width);
}

double wv_with_amplifier(const PrePostSelection& pps, const GaussianLikelihood& lik,
                         const AmplifierModel& amp)
{
    amp.validate();
    lik.validate();
    if (amp.sigma() == 0.0) {
        return wv_bayes_general(pps, lik);
    }
    const Complex i1 = pps.psi_i.c1();
    const Complex i2 = pps.psi_i.c2();
    const Complex f1 = pps.psi_f.c1();
    const Complex f2 = pps.psi_f.c2();
    const double coherence = std::real(std::conj(f1 * std::conj(f2)) * (i1 * std::conj(i2)));

    // (weight, mean) of each unit-mass Gaussian term of P_i(v) P_v(f).
    const std::array<std::array<double, 2>, 3> terms{{
        {std::norm(f1) * std::norm(i1), lik.xbar1},
        {std::norm(f2) * std::norm(i2), lik.xbar2},
        {2.0 * coherence * lik.overlap_factor(), lik.midpoint()},
    }};
    double m1 = 0.0;
    double m2 = 0.0;
    for (const auto& [weight, mean] : terms) {
        m1 += weight * mean;
        m2 += weight;
    }
    const double scale = std::abs(terms[0][0]) + std::abs(terms[1][0]) + std::abs(terms[2][0]);
    if (!(m2 > 64.0 * std::numeric_limits<double>::epsilon() * scale)) {
        std::ostringstream msg;
        msg << "post-selection probability vanishes (M2 = " << m2 << ")";
        throw DegenerateDenominator(msg.str());
    }
    return m1 / m2;
}

WeakValueEstimate mc_amplifier_chain(const PrePostSelection& pps, const GaussianLikelihood& lik,
                                     const AmplifierModel& amp, std::int64_t n_records,
                                     std::uint64_t seed, unsigned workers)
{
    amp.validate();
    lik.validate();
    if (n_records < 1) {
        throw InvalidArgument("mc_amplifier_chain needs n_records >= 1");
    }
    const QubitState initial = QubitState::from_pure(pps.psi_i);
    const double sd = std::sqrt(lik.D);

    struct BatchSums {
        RatioSums sums;
        std::int64_t accepted = 0;
    };
    const auto n = static_cast<std::size_t>(n_records);
    const auto batches = map_batches<BatchSums>(
        kEstimatorBatches,
        [&](std::size_t b) {
            BatchSums out;
            const auto range = batch_range(n, kEstimatorBatches, b);
            for (std::size_t i = range.begin; i < range.end; ++i) {
                const CounterRng rng(seed, i);
                const double branch = rng.uniforms(0, 0)[0];
                const double x = (branch < initial.rho11() ? lik.xbar1 : lik.xbar2) + sd * rng.normal(0, 1);
                const double noise = amp.sigma_tilde * rng.normal(0, 2);
                const double v = amplify(x, amp, noise).v;
                const double p = state_given_v(initial, v, lik, amp).expectation(pps.psi_f);
                if (rng.uniforms(0, 3)[0] < std::clamp(p, 0.0, 1.0)) {
                    out.sums.sum_xw += v;
                    out.sums.sum_w += 1.0;
                    ++out.accepted;
                }
            }
            return out;
        },
        workers);

    std::vector<RatioSums> sums;
    std::int64_t accepted = 0;
    for (const auto& b : batches) {
        sums.push_back(b.sums);
        accepted += b.accepted;
    }
    const double rate = static_cast<double>(accepted) / static_cast<double>(n_records);
    if (accepted < kMinSelections) {
        std::ostringstream msg;
        msg << "only " << accepted << " of " << n_records << " amplified records were post-selected";
        throw NoSelections(msg.str(), rate);
    }
    auto est = ratio_estimate(sums);
    est.n_total = n_records;
    est.n_selected = accepted;
    est.success_rate = rate;
    return est;
}

}  // namespace weakval
