#include "weakval/weak_value.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "weakval/bayes.hpp"
#include "weakval/rng.hpp"

namespace weakval {

namespace {

constexpr double kNearOrthogonal = 1e-12;

struct DensityElements {
    double r11, r22;
    Complex r12;
};

DensityElements elements(const PureState& psi)
{
    return {std::norm(psi.c1()), std::norm(psi.c2()), psi.c1() * std::conj(psi.c2())};
}

void require_nonnegative_g(double g)
{
    if (!(g >= 0.0) || !std::isfinite(g)) {
        throw InvalidArgument("measurement strength g must be finite and >= 0");
    }
}

}  // namespace

double wv_aav_linear(const PrePostSelection& pps) { return aav_weak_value(pps).re(); }

double wv_short_time(const PrePostSelection& pps, double g)
{
    require_nonnegative_g(g);
    const auto w = aav_weak_value(pps);
    return w.re() / (1.0 + g * (w.abs2() - 1.0));
}

SelectionMoments bayes_moments(const PrePostSelection& pps, const GaussianLikelihood& lik)
{
    lik.validate();
    const auto r = elements(pps.psi_i);
    const auto f = elements(pps.psi_f);
    const double coherence = std::real(std::conj(f.r12) * r.r12);
    const double G = lik.overlap_factor();
    return {
        f.r11 * r.r11 * lik.xbar1 + f.r22 * r.r22 * lik.xbar2 + (lik.xbar1 + lik.xbar2) * coherence * G,
        f.r11 * r.r11 + f.r22 * r.r22 + 2.0 * coherence * G,
    };
}

double wv_bayes_general(const PrePostSelection& pps, const GaussianLikelihood& lik)
{
    const auto m = bayes_moments(pps, lik);
    const auto r = elements(pps.psi_i);
    const auto f = elements(pps.psi_f);
    const double scale = f.r11 * r.r11 + f.r22 * r.r22 + 2.0 * std::abs(f.r12 * r.r12) * lik.overlap_factor();
    if (!(m.M2 > 64.0 * std::numeric_limits<double>::epsilon() * scale)) {
        std::ostringstream msg;
        msg << "post-selection probability vanishes (M2 = " << m.M2 << ")";
        throw DegenerateDenominator(msg.str());
    }
    return m.M1 / m.M2;
}

double wv_finite_strength(const PrePostSelection& pps, double g)
{
    require_nonnegative_g(g);
    const double G = 0.5 * (1.0 - std::exp(-2.0 * g));
    const Complex o = pps.overlap();
    if (std::norm(o) >= kNearOrthogonal) {
        const auto w = aav_weak_value(pps);
        return w.re() / (1.0 + G * (w.abs2() - 1.0));
    }
    const Complex n = pps.sz_element();
    const double den = (1.0 - G) * std::norm(o) + G * std::norm(n);
    if (den == 0.0) {
        throw OrthogonalSelection("orthogonal selection at zero measurement strength");
    }
    return std::real(n * std::conj(o)) / den;
}

double wv_quadrature(const PrePostSelection& pps, const GaussianLikelihood& lik,
                     const GaussHermiteRule& rule)
{
    lik.validate();
    const auto r = elements(pps.psi_i);
    const auto f = elements(pps.psi_f);
    const double coherence = std::real(std::conj(f.r12) * r.r12);
    const double m = lik.midpoint();
    const double scale = std::sqrt(2.0 * lik.D);
    const double s1 = (lik.xbar1 - m) / scale;
    const double s2 = (lik.xbar2 - m) / scale;

    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = rule.nodes[i];
        const double x = m + scale * t;
        // P_j(x) e^{t^2} sqrt(2D) = e^{t^2 - (t - s_j)^2} / sqrt(pi)
        const double p1 = std::exp(t * t - (t - s1) * (t - s1));
        const double p2 = std::exp(t * t - (t - s2) * (t - s2));
        const double p12 = std::exp(t * t - 0.5 * ((t - s1) * (t - s1) + (t - s2) * (t - s2)));
        const double weight = rule.weights[i] *
                              (f.r11 * r.r11 * p1 + f.r22 * r.r22 * p2 + 2.0 * coherence * p12);
        num += x * weight;
        den += weight;
    }
    if (!(std::abs(den) > 0.0)) {
        throw DegenerateDenominator("quadrature post-selection probability vanishes");
    }
    return num / den;
}

WeakValueEstimate ratio_estimate(std::span<const RatioSums> batches)
{
    double sxw = 0.0;
    double sw = 0.0;
    for (const auto& b : batches) {
        sxw += b.sum_xw;
        sw += b.sum_w;
    }
    if (sw == 0.0) {
        throw DegenerateDenominator("estimator weight sum is zero");
    }
    const double ratio = sxw / sw;
    double acc = 0.0;
    for (const auto& b : batches) {
        const double dev = b.sum_xw - ratio * b.sum_w;
        acc += dev * dev;
    }
    const double nb = static_cast<double>(batches.size());
    WeakValueEstimate est;
    est.mean = ratio;
    est.std_error = nb > 1.0 ? std::sqrt(nb / (nb - 1.0) * acc) / std::abs(sw) : 0.0;
    return est;
}

McWeakValue mc_weak_value(const PrePostSelection& pps, const MeasurementStrength& ms, Stepper stepper,
                          std::int64_t n_traj, std::uint64_t seed, unsigned workers)
{
    ms.validate();
    if (n_traj < 1) {
        throw InvalidArgument("mc_weak_value needs n_traj >= 1");
    }
    const std::size_t n_steps = ms.n_steps();
    const double dt = ms.dt_step;
    const double sdt = std::sqrt(dt);
    const double drive = 2.0 * std::sqrt(ms.gamma);
    const GaussianLikelihood step_lik = ms.step_likelihood();
    const QubitState initial = QubitState::from_pure(pps.psi_i);

    struct BatchSums {
        RatioSums rejection;
        RatioSums weighting;
        std::int64_t accepted = 0;
        std::int64_t total = 0;
    };

    const auto n = static_cast<std::size_t>(n_traj);
    const auto batches = map_batches<BatchSums>(
        kEstimatorBatches,
        [&](std::size_t b) {
            BatchSums sums;
            const auto range = batch_range(n, kEstimatorBatches, b);
            for (std::size_t i = range.begin; i < range.end; ++i) {
                const CounterRng rng(seed, i);
                QubitState state = initial;
                double record = 0.0;
                for (std::size_t k = 0; k < n_steps; ++k) {
                    const double branch = rng.uniforms(k, 0)[0];
                    const double mean = branch < state.rho11() ? step_lik.xbar1 : step_lik.xbar2;
                    const double x = mean + sdt * rng.normal(k, 1);
                    if (stepper == Stepper::BayesExact) {
                        state = bayes_update(state, x, step_lik);
                    } else {
                        const double dW = x - drive * state.sz() * dt;
                        state = step(stepper, state, ms, dW);
                    }
                    record += x;
                }
                const double p_select = state.expectation(pps.psi_f);
                const bool accept = rng.uniforms(n_steps, 2)[0] < std::clamp(p_select, 0.0, 1.0);

                sums.weighting.sum_xw += record * p_select;
                sums.weighting.sum_w += p_select;
                if (accept) {
                    sums.rejection.sum_xw += record;
                    sums.rejection.sum_w += 1.0;
                    ++sums.accepted;
                }
                ++sums.total;
            }
            return sums;
        },
        workers);

    std::vector<RatioSums> rej;
    std::vector<RatioSums> wgt;
    std::int64_t accepted = 0;
    double total_weight = 0.0;
    for (const auto& b : batches) {
        rej.push_back(b.rejection);
        wgt.push_back(b.weighting);
        accepted += b.accepted;
        total_weight += b.weighting.sum_w;
    }
    const double rate = static_cast<double>(accepted) / static_cast<double>(n_traj);
    if (accepted < kMinSelections) {
        std::ostringstream msg;
        msg << "only " << accepted << " of " << n_traj
            << " records survived post-selection (need >= " << kMinSelections << ")";
        throw NoSelections(msg.str(), rate);
    }

    McWeakValue out{ratio_estimate(rej), ratio_estimate(wgt), ms.epsilon()};
    out.rejection.n_total = n_traj;
    out.rejection.n_selected = accepted;
    out.rejection.success_rate = rate;
    out.weighting.n_total = n_traj;
    out.weighting.n_selected = n_traj;
    out.weighting.success_rate = total_weight / static_cast<double>(n_traj);
    return out;
}

Fig1Curve fig1_curve(double g, std::span<const double> theta_grid)
{
    require_nonnegative_g(g);
    if (theta_grid.empty()) {
        throw InvalidArgument("fig1_curve needs a non-empty theta grid");
    }
    auto nonpert = [g](double theta) { return wv_short_time(theta_selection(theta), g); };

    Fig1Curve curve;
    curve.rows.reserve(theta_grid.size());
    for (double theta : theta_grid) {
        if (!(theta > 0.0 && theta < std::numbers::pi)) {
            throw InvalidArgument("theta grid must lie inside (0, pi)");
        }
        curve.rows.push_back({theta, wv_aav_linear(theta_selection(theta)), nonpert(theta)});
    }

    const auto best = std::max_element(curve.rows.begin(), curve.rows.end(),
                                       [](const Fig1Row& a, const Fig1Row& b) { return a.nonpert < b.nonpert; });
    const auto k = static_cast<std::size_t>(best - curve.rows.begin());
    curve.interior = k > 0 && k + 1 < curve.rows.size();
    curve.theta_star = best->theta;
    curve.peak = best->nonpert;
    if (!curve.interior) {
        return curve;
    }

    // Golden-section refinement on the bracketing grid interval.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = curve.rows[k - 1].theta;
    double hi = curve.rows[k + 1].theta;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = nonpert(c);
    double fd = nonpert(d);
    while (hi - lo > 1e-13) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = nonpert(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = nonpert(d);
        }
    }
    curve.theta_star = 0.5 * (lo + hi);
    curve.peak = std::max(nonpert(curve.theta_star), best->nonpert);
    return curve;
}

}  // namespace weakval
