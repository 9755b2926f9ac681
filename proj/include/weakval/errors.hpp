#pragma once

#include <stdexcept>
#include <string>

namespace weakval {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// <psi_f|psi_i> is exactly zero, so the AAV weak value is undefined.
class OrthogonalSelection : public Error {
public:
    using Error::Error;
};

/// A state left the physical region by more than the clamp tolerance.
class StateInvariantViolation : public Error {
public:
    using Error::Error;
};

/// The record likelihood N(x) underflowed; the record cannot come from the model.
class ZeroLikelihood : public Error {
public:
    using Error::Error;
};

class ExpansionDiverged : public Error {
public:
    using Error::Error;
};

/// Post-selection probability (the M2 denominator) vanished.
class DegenerateDenominator : public Error {
public:
    using Error::Error;
};

class NoSelections : public Error {
public:
    NoSelections(const std::string& what, double success_rate)
        : Error(what), success_rate_(success_rate) {}
    double success_rate() const noexcept { return success_rate_; }

private:
    double success_rate_;
};

/// An iterative inversion failed to settle; carries its last two iterates.
class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, double previous, double last)
        : Error(what), previous_(previous), last_(last) {}
    double previous() const noexcept { return previous_; }
    double last() const noexcept { return last_; }

private:
    double previous_;
    double last_;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace weakval
