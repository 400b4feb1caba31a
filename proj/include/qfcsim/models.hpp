#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace qfcsim::models {

/// Parameters of the cw antibunching curve g2(tau) = 1 - alpha exp(-|tau| / tau_r).
struct EmitterCorrelationParams {
    double alpha = 1.0;     // dip depth, g2(0) = 1 - alpha
    double tau_r = 1.5e-9;  // recovery time, s
    double tau_c = 100e-12; // coherence time, s

    void validate() const;
};

enum class Polarization { parallel, orthogonal };

/// Mach-Zehnder interferometer used for two-photon interference.
/// r1/t1 and r2/t2 are intensity coefficients of the first and second
/// beamsplitter; the long arm (delay delta_tau) leaves the first splitter in
/// reflection.
struct HomInterferometer {
    double r1 = 0.5, t1 = 0.5;
    double r2 = 0.5, t2 = 0.5;
    double delta_tau = 12.5e-9;
    double v = 1.0;
    Polarization config = Polarization::parallel;

    void validate() const;

    friend bool operator==(const HomInterferometer&, const HomInterferometer&) = default;
};

/// Two-detector timing response plus the analysis bin width.
struct InstrumentResponse {
    enum class Shape { gaussian, tabulated };

    Shape shape = Shape::gaussian;
    double fwhm = 0.0;                                 // gaussian only; 0 = delta response
    std::vector<std::pair<double, double>> samples;    // tabulated (time s, weight)
    double bin_width = 0.0;

    static InstrumentResponse delta(double bin_width);
    static InstrumentResponse gaussian(double fwhm, double bin_width);
    /// Response of the delay axis for two detectors with Gaussian jitter:
    /// the FWHMs add in quadrature.
    static InstrumentResponse pairwise(double fwhm_a, double fwhm_b, double bin_width);
    static InstrumentResponse tabulated(std::vector<std::pair<double, double>> samples, double bin_width);

    void validate() const;
};

inline constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

// Correlation models --------------------------------------------------------

double g2_cw(double tau, const EmitterCorrelationParams& p);

/// Mach-Zehnder output cross-correlation for either polarization setting.
double g2_hom(double tau, const EmitterCorrelationParams& p, const HomInterferometer& h);

/// (g2_perp(0) - g2_par(0)) / g2_perp(0).
double visibility(double g2_perp_0, double g2_par_0);

using DelayFunction = std::function<double(double)>;

/// Model convolved with the instrument response and averaged over one bin.
///
/// The combined kernel (detector response times the bin box) is tabulated
/// once on a uniform grid whose step divides the bin width; evaluation is a
/// dot product of the kernel with model samples.
class ConvolvedModel {
public:
    ConvolvedModel(DelayFunction model, const InstrumentResponse& irf);

    /// Binned, convolved value for the bin centred at `center`.
    double operator()(double center) const;

    /// Values for bins centred at (first_index + i) * bin_width, i < count.
    /// Samples the model once on the shared fine grid.
    std::vector<double> on_bins(long long first_index, std::size_t count) const;

    /// Swaps the model while keeping the tabulated kernel.
    void set_model(DelayFunction model) { model_ = std::move(model); }

    double grid_step() const noexcept { return step_; }
    std::size_t taps() const noexcept { return weights_.size(); }

private:
    DelayFunction model_;
    double bin_width_;
    double step_;
    long long half_taps_;           // kernel offsets run from -half_taps_ to +half_taps_
    long long steps_per_bin_;
    std::vector<double> weights_;   // weights_[j] multiplies model(center - (j - half_taps_) * step_)
};

ConvolvedModel convolve_and_bin(DelayFunction model, const InstrumentResponse& irf);

// Frequency conversion ------------------------------------------------------

struct ConversionStage {
    double lambda_signal = 983.8e-9;
    double lambda_pump = 1550e-9;
    double qpm_peak_signal = 983.8e-9;
    double qpm_fwhm = 0.20e-9;
    double eta_max = 0.40;
    double p_max = 1.0;                      // W
    double background_rate_coeff = 300.0;    // counts/s per W of pump
    double qpm_reference_temp_c = 58.8;
    double qpm_temp_slope = 0.0;             // m per degree C; 0 selects default_qpm_temp_slope()

    void validate() const;

    friend bool operator==(const ConversionStage&, const ConversionStage&) = default;
};

/// Energy conservation: 1/lambda_out = 1/lambda_signal + 1/lambda_pump.
double output_wavelength(double lambda_signal, double lambda_pump);

/// Pump wavelength that converts lambda_signal to lambda_target.
double solve_pump_for_target(double lambda_signal, double lambda_target);

/// x at which sinc^2(x) = 1/2, sinc(x) = sin(x)/x.
inline constexpr double kSincHalfPower = 1.3915573782515103;

/// Normalized sinc^2 phase-matching response, peak 1 at stage.qpm_peak_signal.
double qpm_response(double lambda_signal, const ConversionStage& stage);

/// eta_max sin^2((pi/2) sqrt(P / p_max)).
double conversion_efficiency(double pump_power, const ConversionStage& stage);

/// (on - off) / (off - dark); dark counts cancel out.
double signal_to_background(double counts_signal_on, double counts_signal_off, double dark);

/// External efficiency divided by input coupling and output transmission.
double internal_efficiency(double external_efficiency, double input_coupling, double output_transmission);

/// Slope of the QPM peak (signal wavelength, m/degC) giving 2 nm of converted
/// wavelength tuning between 25 and 90 degC at fixed pump.
double default_qpm_temp_slope(const ConversionStage& stage);

/// QPM peak signal wavelength at a waveguide temperature (affine model).
double qpm_peak_at_temperature(double temperature_c, const ConversionStage& stage);

}  // namespace qfcsim::models
