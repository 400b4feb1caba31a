#include <cmath>
#include <numbers>

#include "qfcsim/error.hpp"
#include "qfcsim/models.hpp"

namespace qfcsim::models {
namespace {

bool positive(double x)
{
    return std::isfinite(x) && x > 0.0;
}

}  // namespace

void ConversionStage::validate() const
{
    require(positive(lambda_signal) && positive(lambda_pump) && positive(qpm_peak_signal),
            "wavelengths must be positive");
    require(positive(qpm_fwhm), "QPM bandwidth must be positive");
    require(std::isfinite(eta_max) && eta_max >= 0.0 && eta_max <= 1.0, "eta_max must lie in [0, 1]");
    require(positive(p_max), "p_max must be positive");
    require(std::isfinite(background_rate_coeff) && background_rate_coeff >= 0.0,
            "background rate coefficient must be non-negative");
    require(std::isfinite(qpm_temp_slope), "QPM temperature slope must be finite");
}

double output_wavelength(double lambda_signal, double lambda_pump)
{
    require(positive(lambda_signal), "signal wavelength must be positive");
    require(lambda_pump > 0.0 && !std::isnan(lambda_pump), "pump wavelength must be positive");
    if (std::isinf(lambda_pump)) return lambda_signal;
    return lambda_signal * lambda_pump / (lambda_signal + lambda_pump);
}

double solve_pump_for_target(double lambda_signal, double lambda_target)
{
    require(positive(lambda_signal) && positive(lambda_target), "wavelengths must be positive");
    if (!(lambda_target < lambda_signal))
        throw InvalidArgument("target wavelength must be shorter than the signal wavelength");
    return lambda_signal * lambda_target / (lambda_signal - lambda_target);
}

double qpm_response(double lambda_signal, const ConversionStage& stage)
{
    const double x = kSincHalfPower * (lambda_signal - stage.qpm_peak_signal) / (0.5 * stage.qpm_fwhm);
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 3.0;
    const double sinc = std::sin(x) / x;
    return sinc * sinc;
}

double conversion_efficiency(double pump_power, const ConversionStage& stage)
{
    require(std::isfinite(pump_power) && pump_power >= 0.0, "pump power must be non-negative");
    const double s = std::sin(0.5 * std::numbers::pi * std::sqrt(pump_power / stage.p_max));
    return stage.eta_max * s * s;
}

double signal_to_background(double counts_signal_on, double counts_signal_off, double dark)
{
    if (!(counts_signal_off > dark))
        throw InvalidArgument("background rate does not exceed the dark rate; signal-to-background is undefined");
    return (counts_signal_on - counts_signal_off) / (counts_signal_off - dark);
}

double internal_efficiency(double external_efficiency, double input_coupling, double output_transmission)
{
    require(positive(input_coupling) && positive(output_transmission), "coupling and transmission must be positive");
    return external_efficiency / (input_coupling * output_transmission);
}

double default_qpm_temp_slope(const ConversionStage& stage)
{
    const double out = output_wavelength(stage.qpm_peak_signal, stage.lambda_pump);
    const double ratio = stage.qpm_peak_signal / out;
    return (2e-9 / (90.0 - 25.0)) * ratio * ratio;
}

double qpm_peak_at_temperature(double temperature_c, const ConversionStage& stage)
{
    require(std::isfinite(temperature_c), "temperature must be finite");
    const double slope = stage.qpm_temp_slope != 0.0 ? stage.qpm_temp_slope : default_qpm_temp_slope(stage);
    return stage.qpm_peak_signal + slope * (temperature_c - stage.qpm_reference_temp_c);
}

}  // namespace qfcsim::models
