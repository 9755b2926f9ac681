#include "weakval/core.hpp"

#include <cmath>
#include <sstream>

namespace weakval {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

double clamp_rho11(double rho11)
{
    if (!std::isfinite(rho11)) {
        throw StateInvariantViolation("rho11 is not finite");
    }
    if (rho11 < 0.0) {
        if (rho11 < -kClampTolerance) {
            std::ostringstream msg;
            msg << "rho11 = " << rho11 << " below 0 beyond clamp tolerance (step too large?)";
            throw StateInvariantViolation(msg.str());
        }
        return 0.0;
    }
    if (rho11 > 1.0) {
        if (rho11 > 1.0 + kClampTolerance) {
            std::ostringstream msg;
            msg << "rho11 = " << rho11 << " above 1 beyond clamp tolerance (step too large?)";
            throw StateInvariantViolation(msg.str());
        }
        return 1.0;
    }
    return rho11;
}

}  // namespace

PureState::PureState(Complex c1, Complex c2)
{
    if (!finite(c1) || !finite(c2)) {
        throw InvalidArgument("pure state amplitudes must be finite");
    }
    const double norm2 = std::norm(c1) + std::norm(c2);
    if (std::abs(norm2 - 1.0) > kNormTolerance) {
        std::ostringstream msg;
        msg << "pure state not normalized: |c1|^2 + |c2|^2 = " << norm2;
        throw InvalidArgument(msg.str());
    }
    amp_ << c1, c2;
}

PureState PureState::normalized(Complex c1, Complex c2)
{
    const double norm = std::sqrt(std::norm(c1) + std::norm(c2));
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw InvalidArgument("cannot normalize a zero or non-finite amplitude vector");
    }
    return {c1 / norm, c2 / norm};
}

double fidelity(const PureState& a, const PureState& b)
{
    return std::norm(a.amplitudes().dot(b.amplitudes()));
}

QubitState::QubitState(double rho11, Complex rho12)
{
    if (!finite(rho12)) {
        throw StateInvariantViolation("rho12 is not finite");
    }
    rho11_ = clamp_rho11(rho11);
    rho12_ = rho12;
    const double excess = positivity_excess();
    if (excess > kPositivityTolerance) {
        if (excess > kClampTolerance) {
            std::ostringstream msg;
            msg << "state violates positivity: |rho12|^2 - rho11 rho22 = " << excess;
            throw StateInvariantViolation(msg.str());
        }
        rho12_ *= std::sqrt(rho11_ * rho22()) / std::abs(rho12_);
    }
}

QubitState QubitState::from_pure(const PureState& psi)
{
    return {Unchecked{}, std::norm(psi.c1()), psi.c1() * std::conj(psi.c2())};
}

QubitState QubitState::from_matrix(const Matrix2c& rho)
{
    if (std::abs(rho.trace() - 1.0) > kNormTolerance) {
        throw StateInvariantViolation("density matrix trace differs from 1");
    }
    if (std::abs(rho(0, 1) - std::conj(rho(1, 0))) > kNormTolerance ||
        std::abs(rho(0, 0).imag()) > kNormTolerance) {
        throw StateInvariantViolation("density matrix is not Hermitian");
    }
    return {rho(0, 0).real(), rho(0, 1)};
}

QubitState QubitState::from_integrator(double rho11, Complex rho12)
{
    if (!finite(rho12)) {
        throw StateInvariantViolation("rho12 is not finite");
    }
    return {Unchecked{}, clamp_rho11(rho11), rho12};
}

Matrix2c QubitState::matrix() const
{
    Matrix2c m;
    m << rho11_, rho12_, std::conj(rho12_), rho22();
    return m;
}

double QubitState::expectation(const PureState& psi) const
{
    const Complex c1 = psi.c1();
    const Complex c2 = psi.c2();
    return std::norm(c1) * rho11_ + std::norm(c2) * rho22() +
           2.0 * std::real(std::conj(c1) * rho12_ * c2);
}

PrePostSelection theta_selection(double theta)
{
    const double r = 1.0 / std::sqrt(2.0);
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    return {PureState::normalized(r, r), PureState::normalized(r * (c + s), r * (c - s))};
}

AavWeakValue aav_weak_value(const PrePostSelection& pps)
{
    const Complex overlap = pps.overlap();
    if (overlap == Complex(0.0, 0.0)) {
        throw OrthogonalSelection("pre- and post-selected states are orthogonal");
    }
    return {pps.sz_element() / overlap};
}

}  // namespace weakval
