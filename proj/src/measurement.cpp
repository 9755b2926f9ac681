#include "weakval/measurement.hpp"

#include <numbers>
#include <sstream>

#include "weakval/errors.hpp"

namespace weakval {

void GaussianLikelihood::validate() const
{
    if (!(D > 0.0) || !std::isfinite(D)) {
        throw InvalidArgument("likelihood variance D must be positive and finite");
    }
    if (!std::isfinite(xbar1) || !std::isfinite(xbar2)) {
        throw InvalidArgument("likelihood means must be finite");
    }
}

double GaussianLikelihood::density(int j, double x) const
{
    const double exponent = j == 1 ? log_kernel1(x) : log_kernel2(x);
    return std::exp(exponent) / std::sqrt(2.0 * std::numbers::pi * D);
}

void MeasurementStrength::validate() const
{
    std::ostringstream msg;
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        msg << "gamma must be > 0 (got " << gamma << ")";
    } else if (!(dt_step > 0.0) || !std::isfinite(dt_step)) {
        msg << "dt_step must be > 0 (got " << dt_step << ")";
    } else if (!(t_total >= dt_step * (1.0 - 1e-12)) || !std::isfinite(t_total)) {
        msg << "t_total must be >= dt_step (got " << t_total << " < " << dt_step << ")";
    } else {
        return;
    }
    throw InvalidArgument(msg.str());
}

std::size_t MeasurementStrength::n_steps() const
{
    const double n = std::round(t_total / dt_step);
    return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

void DetectorCalibration::validate() const
{
    if (!(deltaI > 0.0) || !(S0 > 0.0)) {
        throw InvalidArgument("detector calibration requires deltaI > 0 and S0 > 0");
    }
}

double normalize_current(double raw, const DetectorCalibration& cal)
{
    return (raw - cal.I0) / std::sqrt(cal.S0 / 2.0);
}

}  // namespace weakval
