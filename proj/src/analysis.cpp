#include "weakval/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "weakval/bayes.hpp"
#include "weakval/rng.hpp"
#include "weakval/weak_value.hpp"

namespace weakval {

double fit_line_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw InvalidArgument("slope fit needs at least two paired points");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y)
{
    std::vector<double> lx(x.size());
    std::vector<double> ly(y.size());
    std::transform(x.begin(), x.end(), lx.begin(), [](double v) { return std::log(v); });
    std::transform(y.begin(), y.end(), ly.begin(), [](double v) { return std::log(v); });
    return fit_line_slope(lx, ly);
}

double state_distance(const QubitState& a, const QubitState& b)
{
    const double d11 = a.rho11() - b.rho11();
    return std::sqrt(2.0 * d11 * d11 + 2.0 * std::norm(a.rho12() - b.rho12()));
}

StrongConvergence strong_convergence(double gamma, double horizon, std::span<const double> dt, int refine,
                                     std::span<const Stepper> steppers, std::int64_t n_paths,
                                     std::uint64_t seed, const QubitState& initial, unsigned workers)
{
    if (dt.size() < 2 || steppers.empty() || refine < 1 || n_paths < 1 || !(horizon > 0.0)) {
        throw InvalidArgument("strong_convergence: need >= 2 step sizes, a stepper, refine >= 1, paths >= 1");
    }
    const double fine = *std::min_element(dt.begin(), dt.end()) / refine;
    const auto n_fine = static_cast<std::size_t>(std::llround(horizon / fine));
    std::vector<std::size_t> mult;
    std::vector<MeasurementStrength> level;
    for (double d : dt) {
        mult.push_back(static_cast<std::size_t>(std::llround(d / fine)));
        level.push_back({gamma, d, horizon});
        if (std::abs(static_cast<double>(mult.back()) * fine - d) > 1e-9 * d || n_fine % mult.back() != 0) {
            throw InvalidArgument("strong_convergence: every dt must divide the horizon on the fine grid");
        }
    }
    const MeasurementStrength fine_ms{gamma, fine, horizon};
    const double sdt = std::sqrt(fine);
    const std::size_t ns = steppers.size();
    const std::size_t nl = dt.size();

    const auto n = static_cast<std::size_t>(n_paths);
    const auto batches = map_batches<std::vector<double>>(
        kEstimatorBatches,
        [&](std::size_t b) {
            std::vector<double> sums(ns * nl, 0.0);
            const auto range = batch_range(n, kEstimatorBatches, b);
            std::vector<QubitState> states;
            std::vector<double> acc(nl);
            for (std::size_t p = range.begin; p < range.end; ++p) {
                const CounterRng rng(seed, p);
                QubitState ref = initial;
                states.assign(ns * nl, initial);
                std::fill(acc.begin(), acc.end(), 0.0);
                for (std::size_t k = 0; k < n_fine; ++k) {
                    const double dW = sdt * rng.normal(k, 0);
                    ref = step_bayes_exact(ref, fine_ms, dW);
                    for (std::size_t l = 0; l < nl; ++l) {
                        acc[l] += dW;
                        if ((k + 1) % mult[l] == 0) {
                            for (std::size_t s = 0; s < ns; ++s) {
                                auto& st = states[s * nl + l];
                                st = step(steppers[s], st, level[l], acc[l]);
                            }
                            acc[l] = 0.0;
                        }
                    }
                }
                for (std::size_t i = 0; i < ns * nl; ++i) {
                    sums[i] += state_distance(states[i], ref);
                }
            }
            return sums;
        },
        workers);

    StrongConvergence out;
    out.dt.assign(dt.begin(), dt.end());
    out.steppers.assign(steppers.begin(), steppers.end());
    out.error.assign(ns, std::vector<double>(nl, 0.0));
    for (const auto& sums : batches) {
        for (std::size_t s = 0; s < ns; ++s) {
            for (std::size_t l = 0; l < nl; ++l) {
                out.error[s][l] += sums[s * nl + l];
            }
        }
    }
    for (std::size_t s = 0; s < ns; ++s) {
        for (auto& e : out.error[s]) {
            e /= static_cast<double>(n_paths);
        }
        out.slope.push_back(fit_loglog_slope(out.dt, out.error[s]));
    }
    return out;
}

namespace {

QubitState random_pure(const CounterRng& rng, std::uint64_t k)
{
    const auto u = rng.uniforms(k, 0);
    const double rho11 = u[0];
    const double phase = 2.0 * std::numbers::pi * u[1];
    return QubitState::from_integrator(rho11, std::polar(std::sqrt(rho11 * (1.0 - rho11)), phase));
}

}  // namespace

std::vector<double> local_discrepancy(double gamma, std::span<const double> dt, Stepper stepper,
                                      std::int64_t n_samples, std::uint64_t seed)
{
    std::vector<double> out;
    const CounterRng rng(seed, 0);
    for (double d : dt) {
        const MeasurementStrength ms{gamma, d, d};
        double sum = 0.0;
        for (std::int64_t k = 0; k < n_samples; ++k) {
            const auto idx = static_cast<std::uint64_t>(k);
            const QubitState rho = random_pure(rng, idx);
            const double dW = std::sqrt(d) * rng.normal(idx, 1);
            sum += state_distance(step(stepper, rho, ms, dW), step_bayes_exact(rho, ms, dW));
        }
        out.push_back(sum / static_cast<double>(n_samples));
    }
    return out;
}

double expansion_euler_gap(double gamma, double dt, std::int64_t n_samples, std::uint64_t seed)
{
    const MeasurementStrength ms{gamma, dt, dt};
    const CounterRng rng(seed, 1);
    double worst = 0.0;
    for (std::int64_t k = 0; k < n_samples; ++k) {
        const auto idx = static_cast<std::uint64_t>(k);
        const QubitState rho = random_pure(rng, idx);
        const double dW = std::sqrt(dt) * rng.normal(idx, 1);
        const double x = sample_output(rho, ms, dW);
        const auto expanded = bayes_expand_small(rho, x, ms.step_likelihood(), 2);
        worst = std::max(worst, state_distance(expanded, step_ito_euler(rho, ms, dW)));
    }
    return worst;
}

CoherenceDecay coherence_decay(const QubitState& initial, std::size_t n_steps, double dt,
                               std::int64_t n_traj, std::uint64_t seed, const IncrementStep& step_fn,
                               unsigned workers)
{
    if (n_steps < 2 || n_traj < 1 || !(dt > 0.0)) {
        throw InvalidArgument("coherence_decay needs n_steps >= 2, n_traj >= 1, dt > 0");
    }
    const double sdt = std::sqrt(dt);
    const auto n = static_cast<std::size_t>(n_traj);
    const auto batches = map_batches<std::vector<Complex>>(
        kEstimatorBatches,
        [&](std::size_t b) {
            std::vector<Complex> sums(n_steps, 0.0);
            const auto range = batch_range(n, kEstimatorBatches, b);
            for (std::size_t i = range.begin; i < range.end; ++i) {
                const CounterRng rng(seed, i);
                QubitState state = initial;
                for (std::size_t k = 0; k < n_steps; ++k) {
                    state = step_fn(state, sdt * rng.normal(k, 0));
                    sums[k] += state.rho12();
                }
            }
            return sums;
        },
        workers);

    CoherenceDecay out;
    std::vector<Complex> total(n_steps, 0.0);
    for (const auto& sums : batches) {
        for (std::size_t k = 0; k < n_steps; ++k) {
            total[k] += sums[k];
        }
    }
    std::vector<double> log_mag;
    for (std::size_t k = 0; k < n_steps; ++k) {
        out.t.push_back(dt * static_cast<double>(k + 1));
        out.magnitude.push_back(std::abs(total[k]) / static_cast<double>(n_traj));
        log_mag.push_back(std::log(out.magnitude.back()));
    }
    out.rate = -fit_line_slope(out.t, log_mag);
    return out;
}

}  // namespace weakval
