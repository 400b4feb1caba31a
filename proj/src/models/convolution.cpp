#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qfcsim/error.hpp"
#include "qfcsim/models.hpp"
#include "qfcsim/simd.hpp"

namespace qfcsim::models {
namespace {

constexpr double kTargetStep = 1e-12;
constexpr double kGaussianReach = 8.0;  // kernel truncated at this many sigma

// Antiderivative of the unit step smoothed by a Gaussian of width sigma:
// integral of Phi(x / sigma) dx. Reduces to max(x, 0) for sigma = 0.
double smoothed_ramp(double x, double sigma)
{
    if (sigma <= 0.0) return std::max(x, 0.0);
    const double z = x / sigma;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return sigma * (z * cdf + pdf);
}

// Integral over [a, b] of a unit-area box of width w centred on `shift`,
// smoothed by a Gaussian of width sigma.
double box_cell_weight(double a, double b, double shift, double w, double sigma)
{
    const double lo = shift - 0.5 * w;
    const double hi = shift + 0.5 * w;
    return (smoothed_ramp(b - lo, sigma) - smoothed_ramp(a - lo, sigma) - smoothed_ramp(b - hi, sigma) +
            smoothed_ramp(a - hi, sigma)) /
           w;
}

}  // namespace

InstrumentResponse InstrumentResponse::delta(double bin_width)
{
    return gaussian(0.0, bin_width);
}

InstrumentResponse InstrumentResponse::gaussian(double fwhm, double bin_width)
{
    InstrumentResponse irf;
    irf.shape = Shape::gaussian;
    irf.fwhm = fwhm;
    irf.bin_width = bin_width;
    return irf;
}

InstrumentResponse InstrumentResponse::pairwise(double fwhm_a, double fwhm_b, double bin_width)
{
    return gaussian(std::hypot(fwhm_a, fwhm_b), bin_width);
}

InstrumentResponse InstrumentResponse::tabulated(std::vector<std::pair<double, double>> samples, double bin_width)
{
    InstrumentResponse irf;
    irf.shape = Shape::tabulated;
    irf.samples = std::move(samples);
    irf.bin_width = bin_width;
    irf.validate();
    const double total = std::accumulate(irf.samples.begin(), irf.samples.end(), 0.0,
                                         [](double s, const auto& p) { return s + p.second; });
    for (auto& [t, weight] : irf.samples) weight /= total;
    return irf;
}

void InstrumentResponse::validate() const
{
    require(std::isfinite(bin_width) && bin_width > 0.0, "bin width must be positive");
    if (shape == Shape::gaussian) {
        require(std::isfinite(fwhm) && fwhm >= 0.0, "IRF FWHM must be non-negative");
    } else {
        require(!samples.empty(), "tabulated IRF needs at least one sample");
        double total = 0.0;
        for (const auto& [t, weight] : samples) {
            require(std::isfinite(t) && std::isfinite(weight) && weight >= 0.0,
                    "tabulated IRF weights must be finite and non-negative");
            total += weight;
        }
        require(total > 0.0, "tabulated IRF has zero area");
    }
}

ConvolvedModel::ConvolvedModel(DelayFunction model, const InstrumentResponse& irf)
    : model_(std::move(model)), bin_width_(irf.bin_width)
{
    irf.validate();
    const double w = irf.bin_width;
    steps_per_bin_ = std::max<long long>(2, static_cast<long long>(std::ceil(w / kTargetStep)));
    if (steps_per_bin_ % 2 != 0) ++steps_per_bin_;
    step_ = w / static_cast<double>(steps_per_bin_);

    // Kernel components: (shift, mass, sigma). Gaussian = one centred component.
    struct Component {
        double shift, mass, sigma;
    };
    std::vector<Component> parts;
    double reach = 0.5 * w;
    if (irf.shape == InstrumentResponse::Shape::gaussian) {
        const double sigma = irf.fwhm / kFwhmPerSigma;
        parts.push_back({0.0, 1.0, sigma});
        reach += kGaussianReach * sigma;
    } else {
        double total = 0.0;
        for (const auto& [t, weight] : irf.samples) total += weight;
        double far = 0.0;
        for (const auto& [t, weight] : irf.samples) {
            parts.push_back({t, weight / total, 0.0});
            far = std::max(far, std::abs(t));
        }
        reach += far;
    }
    half_taps_ = static_cast<long long>(std::ceil(reach / step_)) + 1;

    // weights_[j] multiplies model(center + (j - H) h). The model at
    // center + u is weighted by the kernel at -u, hence the mirrored cell.
    const std::size_t n = static_cast<std::size_t>(2 * half_taps_ + 1);
    weights_.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double u = -static_cast<double>(static_cast<long long>(j) - half_taps_) * step_;
        for (const auto& part : parts)
            weights_[j] += part.mass * box_cell_weight(u - 0.5 * step_, u + 0.5 * step_, part.shift, w, part.sigma);
    }
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    for (auto& weight : weights_) weight /= total;
}

double ConvolvedModel::operator()(double center) const
{
    std::vector<double> samples(weights_.size());
    for (std::size_t j = 0; j < samples.size(); ++j)
        samples[j] = model_(center + static_cast<double>(static_cast<long long>(j) - half_taps_) * step_);
    return simd::active_kernels().dot(weights_.data(), samples.data(), samples.size());
}

std::vector<double> ConvolvedModel::on_bins(long long first_index, std::size_t count) const
{
    std::vector<double> out(count);
    if (count == 0) return out;
    const long long n0 = first_index * steps_per_bin_ - half_taps_;
    const long long n1 = (first_index + static_cast<long long>(count) - 1) * steps_per_bin_ + half_taps_;
    std::vector<double> grid(static_cast<std::size_t>(n1 - n0 + 1));
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = model_(static_cast<double>(n0 + static_cast<long long>(i)) * step_);
    const auto dot = simd::active_kernels().dot;
    for (std::size_t i = 0; i < count; ++i) {
        const auto offset = static_cast<std::size_t>(static_cast<long long>(i) * steps_per_bin_);
        out[i] = dot(weights_.data(), grid.data() + offset, weights_.size());
    }
    return out;
}

ConvolvedModel convolve_and_bin(DelayFunction model, const InstrumentResponse& irf)
{
    return ConvolvedModel(std::move(model), irf);
}

}  // namespace qfcsim::models
