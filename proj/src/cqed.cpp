#include "weakval/cqed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "weakval/bayes.hpp"
#include "weakval/rng.hpp"

namespace weakval {

namespace {

constexpr Complex kI{0.0, 1.0};

bool finite_all(std::initializer_list<double> values)
{
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void require_time(double t, const char* name)
{
    if (!(t > 0.0) || !std::isfinite(t)) {
        std::ostringstream msg;
        msg << name << " must be > 0 (got " << t << ")";
        throw InvalidArgument(msg.str());
    }
}

}  // namespace

void CqedParams::validate() const
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        std::ostringstream msg;
        msg << "kappa must be > 0 (got " << kappa << ")";
        throw InvalidArgument(msg.str());
    }
    if (!finite_all({chi, eps_m, delta_r, phi_lo, omega_q})) {
        throw InvalidArgument("cQED parameters must be finite");
    }
    if (!(purity_factor > 0.0 && purity_factor <= 1.0)) {
        std::ostringstream msg;
        msg << "purity_factor must lie in (0, 1] (got " << purity_factor << ")";
        throw InvalidArgument(msg.str());
    }
}

double CavityFields::theta_beta() const
{
    const Complex b = beta();
    if (b == Complex(0.0, 0.0)) {
        return 0.0;
    }
    double theta = std::arg(b);
    if (theta > std::numbers::pi / 2) {
        theta -= std::numbers::pi;
    } else if (theta <= -std::numbers::pi / 2) {
        theta += std::numbers::pi;
    }
    return theta;
}

CavityFields steady_fields(const CqedParams& p)
{
    p.validate();
    const Complex drive = -kI * p.eps_m;
    return {
        drive / (-kI * (p.delta_r + p.chi) + 0.5 * p.kappa),
        drive / (-kI * (p.delta_r - p.chi) + 0.5 * p.kappa),
    };
}

CqedRates rates(const CavityFields& f, const CqedParams& p)
{
    p.validate();
    const Complex a12 = f.alpha1 * std::conj(f.alpha2);
    const double strength = p.kappa * std::norm(f.beta());
    const double angle = p.phi_lo - f.theta_beta();
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double B = 2.0 * p.chi * a12.real();
    const double omega =
        p.omega == OmegaConvention::BarePlusStark ? p.omega_q + B : p.omega_q + p.chi + B;
    return {2.0 * p.chi * a12.imag(), strength * c * c, strength * s * s, B, omega};
}

GaussianLikelihood cqed_likelihood(const CqedRates& r, double t)
{
    const double shift = std::sqrt(r.Gamma_ci) * t;
    return {-shift, shift, t};
}

double cqed_output(const QubitState& state, const CqedRates& r, double dW, double dt)
{
    return -std::sqrt(r.Gamma_ci) * state.sz() * dt + dW;
}

QubitState step_cqed_qte(const QubitState& state, const CqedRates& r, double dW, double dt)
{
    require_time(dt, "dt");
    const double sci = std::sqrt(r.Gamma_ci);
    const double sba = std::sqrt(r.Gamma_ba);
    const double z = state.sz();
    const double rho11 = state.rho11() - 2.0 * sci * state.rho11() * state.rho22() * dW;
    const Complex rho12 = state.rho12() * (1.0 - r.Gamma_d * dt + sci * z * dW + kI * sba * dW) *
                          std::exp(-kI * r.Omega_tilde * dt);
    return QubitState::from_integrator(rho11, rho12);
}

QubitState bayes_cqed(const QubitState& state, double x, const CqedRates& r, const CqedParams& p,
                      double t_m)
{
    require_time(t_m, "t_m");
    p.validate();
    const auto lik = cqed_likelihood(r, t_m);
    const double l1 = lik.log_kernel1(x);
    const double l2 = lik.log_kernel2(x);
    const double k = p.record_phase == RecordPhase::BackAction ? std::sqrt(r.Gamma_ba) : std::sqrt(r.Gamma_ci);
    const double phi2 = -k * x;
    const Complex factor = p.purity_factor * std::exp(-kI * (r.Omega_tilde * t_m + phi2));
    return weighted_update(state, l1, l2, factor, 0.5 * (l1 + l2));
}

double cqed_short_correction(const PrePostSelection& pps, const CqedRates& r, double dt)
{
    const auto w = aav_weak_value(pps);
    return (r.Omega_tilde * w.im() + 0.5 * r.Gamma_d * (w.abs2() - 1.0)) * dt;
}

double wv_cqed_short(const PrePostSelection& pps, const CqedRates& r, double dt)
{
    require_time(dt, "dt");
    const auto w = aav_weak_value(pps);
    const double num = std::sqrt(r.Gamma_ci) * dt * w.re() + std::sqrt(r.Gamma_ba) * dt * w.im();
    return -num / (1.0 + cqed_short_correction(pps, r, dt));
}

CqedFiniteWv wv_cqed_finite(const PrePostSelection& pps, const CqedRates& r, double t_m)
{
    require_time(t_m, "t_m");
    const double gd = r.Gamma_d_total();
    const double decay = std::exp(-gd * t_m);
    const double sci_t = std::sqrt(r.Gamma_ci) * t_m;
    const double sba_t = std::sqrt(r.Gamma_ba) * t_m;

    const Complex i1 = pps.psi_i.c1();
    const Complex i2 = pps.psi_i.c2();
    const Complex f1 = pps.psi_f.c1();
    const Complex f2 = pps.psi_f.c2();
    const double d11 = std::norm(f1) * std::norm(i1);
    const double d22 = std::norm(f2) * std::norm(i2);
    const Complex cross = f1 * std::conj(f2) * std::conj(i1 * std::conj(i2)) *
                          std::exp(kI * r.Omega_tilde * t_m);

    const double m1 = -sci_t * (d11 - d22) + 2.0 * sba_t * decay * cross.imag();
    const double m2 = d11 + d22 + 2.0 * decay * cross.real();
    const double scale = d11 + d22 + 2.0 * decay * std::abs(cross);
    if (!(m2 > 64.0 * std::numeric_limits<double>::epsilon() * scale)) {
        std::ostringstream msg;
        msg << "post-selection probability vanishes (M2 = " << m2 << ")";
        throw DegenerateDenominator(msg.str());
    }

    // Amplitude form of the compact expression: Re w~ = Re(n o*)/|o|^2 etc.
    const Complex rotated1 = i1 * std::exp(-kI * r.Omega_tilde * t_m);
    const Complex o = std::conj(f1) * rotated1 + std::conj(f2) * i2;
    const Complex n = std::conj(f1) * rotated1 - std::conj(f2) * i2;
    const double G = 0.5 * (1.0 - decay);
    const Complex no = n * std::conj(o);
    const double den = (1.0 - G) * std::norm(o) + G * std::norm(n);
    const double compact = -(sci_t * no.real() + sba_t * decay * no.imag()) / den;
    return {m1 / m2, compact};
}

QuadraturePair quadrature_pair(const CqedParams& p)
{
    const auto fields = steady_fields(p);
    CqedParams info = p;
    info.phi_lo = fields.theta_beta();
    CqedParams back = p;
    back.phi_lo = fields.theta_beta() + std::numbers::pi / 2;
    auto a = rates(fields, info);
    auto b = rates(fields, back);
    // Remove the rounding residue of cos^2 / sin^2 at the nominal angles.
    const double total = a.Gamma_ci + a.Gamma_ba;
    a.Gamma_ci = total;
    a.Gamma_ba = 0.0;
    b.Gamma_ci = 0.0;
    b.Gamma_ba = total;
    return {a, b};
}

TomographyResult tomography(const PureState& psi_f, double x_info, double x_backaction,
                            const CqedParams& p, double t_m, int max_iter, TomographyScheme scheme)
{
    require_time(t_m, "t_m");
    if (max_iter < 1) {
        throw InvalidArgument("max_iter must be >= 1");
    }
    const Complex f1 = psi_f.c1();
    const Complex f2 = psi_f.c2();
    if (std::abs(f1) < 1e-12 || std::abs(f2) < 1e-12) {
        throw InvalidArgument("post-selected state must have both components nonzero for tomography");
    }
    const auto q = quadrature_pair(p);
    const double total = q.info.Gamma_ci;
    if (!(total > 0.0)) {
        throw InvalidArgument("tomography needs a nonzero measurement rate kappa |beta|^2");
    }
    const double decay = std::exp(-0.5 * total * t_m);
    const double eps1 = std::sqrt(total) * t_m;
    const double eps2 = std::sqrt(total) * t_m * decay;
    const double G = 0.5 * (1.0 - decay);

    const Complex u{-x_info / eps1, -x_backaction / eps2};
    const double A = G * std::norm(u);
    if (1.0 - 4.0 * A * (1.0 - G) < 0.0) {
        throw NoConvergence("measured values admit no consistent denominator", 1.0, 1.0);
    }

    auto residual = [&](double s) { return A * s * s - s + 1.0 - G; };
    double s = 1.0;
    double s_prev = 1.0;
    int iterations = 0;
    bool converged = false;
    double previous_step = 0.0;
    double damping = 1.0;
    while (iterations < max_iter) {
        double next;
        if (scheme == TomographyScheme::Newton) {
            const double slope = 2.0 * A * s - 1.0;
            if (slope == 0.0) {
                throw NoConvergence("denominator iteration hit a stationary point", s, s);
            }
            next = s - residual(s) / slope;
        } else {
            const double target = 1.0 + G * (std::norm(u) * s * s - 1.0);
            const double step = target - s;
            if (previous_step != 0.0 && step * previous_step < 0.0) {
                damping = 0.5;
            }
            previous_step = step;
            next = s + damping * step;
        }
        ++iterations;
        const double change = std::abs(u) * std::abs(next - s);
        s_prev = s;
        s = next;
        if (change < 1e-9) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "denominator iteration did not settle in " << max_iter << " iterations";
        throw NoConvergence(msg.str(), std::abs(u) * s_prev, std::abs(u) * s);
    }

    const Complex w = u * s;
    const bool singular = std::abs(1.0 - w) < 1e-12;
    const Complex c1 = std::conj(f2) * (1.0 + w) * std::exp(kI * q.info.Omega_tilde * t_m);
    const Complex c2 = singular ? Complex(0.0, 0.0) : std::conj(f1) * (1.0 - w);
    return {PureState::normalized(c1, c2), w, iterations, singular};
}

McWeakValue mc_cqed_weak_value(const PrePostSelection& pps, const CqedRates& r, const CqedParams& p,
                               double t_m, std::size_t n_steps, CqedStepper stepper,
                               std::int64_t n_traj, std::uint64_t seed, unsigned workers)
{
    require_time(t_m, "t_m");
    p.validate();
    if (n_steps < 1 || n_traj < 1) {
        throw InvalidArgument("mc_cqed_weak_value needs n_steps >= 1 and n_traj >= 1");
    }
    const double dt = t_m / static_cast<double>(n_steps);
    const double sdt = std::sqrt(dt);
    const double sci = std::sqrt(r.Gamma_ci);
    const auto step_lik = cqed_likelihood(r, dt);
    const QubitState initial = QubitState::from_pure(pps.psi_i);

    struct BatchSums {
        RatioSums rejection;
        RatioSums weighting;
        std::int64_t accepted = 0;
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
                    if (stepper == CqedStepper::Bayes) {
                        state = bayes_cqed(state, x, r, p, dt);
                    } else {
                        state = step_cqed_qte(state, r, x + sci * state.sz() * dt, dt);
                    }
                    record += x;
                }
                const double p_select = state.expectation(pps.psi_f);
                sums.weighting.sum_xw += record * p_select;
                sums.weighting.sum_w += p_select;
                if (rng.uniforms(n_steps, 2)[0] < std::clamp(p_select, 0.0, 1.0)) {
                    sums.rejection.sum_xw += record;
                    sums.rejection.sum_w += 1.0;
                    ++sums.accepted;
                }
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
        msg << "only " << accepted << " of " << n_traj << " cQED records survived post-selection";
        throw NoSelections(msg.str(), rate);
    }
    McWeakValue out{ratio_estimate(rej), ratio_estimate(wgt), sci * t_m};
    out.rejection.n_total = n_traj;
    out.rejection.n_selected = accepted;
    out.rejection.success_rate = rate;
    out.weighting.n_total = n_traj;
    out.weighting.n_selected = n_traj;
    out.weighting.success_rate = total_weight / static_cast<double>(n_traj);
    return out;
}

}  // namespace weakval
