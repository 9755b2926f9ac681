#pragma once

#include <complex>

#include <Eigen/Dense>

#include "weakval/errors.hpp"

namespace weakval {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Vector2c = Eigen::Vector2cd;

/// Increment of a density matrix produced by a superoperator (traceless for D and H).
using QubitStateDelta = Matrix2c;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kPositivityTolerance = 1e-12;
/// Violations smaller than this are treated as rounding and clamped; larger ones throw.
inline constexpr double kClampTolerance = 1e-10;

/// sigma^z = |1><1| - |2><2|.
inline Matrix2c sigma_z()
{
    Matrix2c s;
    s << 1.0, 0.0, 0.0, -1.0;
    return s;
}

/// Normalized pure qubit state c1|1> + c2|2>.
class PureState {
public:
    /// Throws InvalidArgument unless |c1|^2 + |c2|^2 = 1 within 1e-12.
    PureState(Complex c1, Complex c2);

    /// Rescales (c1, c2) to unit norm; throws on a zero or non-finite vector.
    static PureState normalized(Complex c1, Complex c2);
    static PureState basis1() { return {1.0, 0.0}; }
    static PureState basis2() { return {0.0, 1.0}; }

    Complex c1() const { return amp_(0); }
    Complex c2() const { return amp_(1); }
    const Vector2c& amplitudes() const { return amp_; }

    /// |psi><psi| as a 2x2 matrix.
    Matrix2c projector() const { return amp_ * amp_.adjoint(); }

private:
    Vector2c amp_;
};

/// Fidelity |<a|b>|^2 between pure states.
double fidelity(const PureState& a, const PureState& b);

/// Qubit density matrix stored as (rho11, rho12); rho22 = 1 - rho11 so the
/// trace is one by construction.
class QubitState {
public:
    /// Validated construction. rho11 slightly outside [0,1] (below 1e-10) is
    /// clamped, likewise a positivity excess below 1e-10 is projected back onto
    /// the Bloch sphere; anything larger throws StateInvariantViolation.
    QubitState(double rho11, Complex rho12);

    static QubitState from_pure(const PureState& psi);
    static QubitState maximally_mixed() { return {0.5, 0.0}; }
    static QubitState from_matrix(const Matrix2c& rho);

    /// Construction used by the stochastic integrators: applies the rho11
    /// clamp policy but admits the O(gamma dt) positivity excursion that a
    /// finite Ito step produces (see trajectory.hpp).
    static QubitState from_integrator(double rho11, Complex rho12);

    double rho11() const { return rho11_; }
    double rho22() const { return 1.0 - rho11_; }
    Complex rho12() const { return rho12_; }
    Complex rho21() const { return std::conj(rho12_); }

    /// <sigma^z> = rho11 - rho22.
    double sz() const { return 2.0 * rho11_ - 1.0; }

    /// |rho12|^2 - rho11 rho22; positive values mean the state is outside the Bloch ball.
    double positivity_excess() const { return std::norm(rho12_) - rho11_ * rho22(); }

    Matrix2c matrix() const;

    /// <psi|rho|psi>.
    double expectation(const PureState& psi) const;

private:
    struct Unchecked {};
    QubitState(Unchecked, double rho11, Complex rho12) : rho11_(rho11), rho12_(rho12) {}

    double rho11_;
    Complex rho12_;
};

/// Pre-selected state psi_i and post-selected state psi_f.
struct PrePostSelection {
    PureState psi_i;
    PureState psi_f;

    /// <psi_f|psi_i>.
    Complex overlap() const { return psi_f.amplitudes().dot(psi_i.amplitudes()); }
    /// <psi_f|sigma^z|psi_i>.
    Complex sz_element() const
    {
        return std::conj(psi_f.c1()) * psi_i.c1() - std::conj(psi_f.c2()) * psi_i.c2();
    }
};

/// The selection used by the fig1 sweep:
/// psi_i = (|1> + |2>)/sqrt2, psi_f = [(cos t/2 + sin t/2)|1> + (cos t/2 - sin t/2)|2>]/sqrt2,
/// for which the AAV weak value is tan(theta/2).
PrePostSelection theta_selection(double theta);

struct AavWeakValue {
    Complex w;

    double re() const { return w.real(); }
    double im() const { return w.imag(); }
    double abs2() const { return std::norm(w); }
};

/// <psi_f|sigma^z|psi_i> / <psi_f|psi_i>; throws OrthogonalSelection when the
/// overlap is exactly zero.
AavWeakValue aav_weak_value(const PrePostSelection& pps);

// Superoperators for A = sigma^z, written for any 2x2 complex expression.

/// D[sigma^z] rho = sigma^z rho sigma^z - rho.
template <typename Derived>
QubitStateDelta superop_D(const Eigen::MatrixBase<Derived>& rho)
{
    const Matrix2c sz = sigma_z();
    return sz * rho * sz - rho;
}

/// H[sigma^z] rho = sigma^z rho + rho sigma^z - 2 <sigma^z> rho.
template <typename Derived>
QubitStateDelta superop_H(const Eigen::MatrixBase<Derived>& rho)
{
    const Matrix2c sz = sigma_z();
    const Complex mean = (sz * rho).trace();
    return sz * rho + rho * sz - 2.0 * mean.real() * rho;
}

/// M[sigma^z] rho = (sigma^z rho + rho sigma^z)/2 - <sigma^z> rho.
template <typename Derived>
QubitStateDelta superop_M(const Eigen::MatrixBase<Derived>& rho)
{
    return 0.5 * superop_H(rho);
}

inline QubitStateDelta superop_D(const QubitState& s) { return superop_D(s.matrix()); }
inline QubitStateDelta superop_H(const QubitState& s) { return superop_H(s.matrix()); }
inline QubitStateDelta superop_M(const QubitState& s) { return superop_M(s.matrix()); }

}  // namespace weakval
