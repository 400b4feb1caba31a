#include <doctest.h>

#include <cmath>

#include "qfcsim/error.hpp"
#include "qfcsim/models.hpp"

using namespace qfcsim;
using namespace qfcsim::models;

namespace {

EmitterCorrelationParams params(double alpha, double tau_r, double tau_c = 100e-12)
{
    return {alpha, tau_r, tau_c};
}

HomInterferometer mzi(double delta, Polarization config, double v = 1.0)
{
    HomInterferometer h;
    h.delta_tau = delta;
    h.config = config;
    h.v = v;
    return h;
}

// Dense midpoint rule for the bin average of the Gaussian-smeared model.
double midpoint_oracle(const DelayFunction& f, double center, double fwhm, double w)
{
    const double s = fwhm / kFwhmPerSigma;
    const int nu = 400, ns = 2000;
    double total = 0.0, norm = 0.0;
    for (int i = 0; i < nu; ++i) {
        const double u = center - w / 2 + (i + 0.5) * w / nu;
        for (int j = 0; j < ns; ++j) {
            const double x = -8 * s + (j + 0.5) * 16 * s / ns;
            const double weight = std::exp(-0.5 * x * x / (s * s));
            total += weight * f(u - x);
            norm += weight;
        }
    }
    return total / norm;
}

}  // namespace

TEST_CASE("g2_cw closed form")
{
    CHECK(g2_cw(0.0, params(1.0, 1.5e-9)) == 0.0);
    CHECK(g2_cw(1.5e-9, params(0.9, 1.5e-9)) == doctest::Approx(0.668908502945702).epsilon(1e-13));
    CHECK(g2_cw(-1.5e-9, params(0.9, 1.5e-9)) == g2_cw(1.5e-9, params(0.9, 1.5e-9)));
    CHECK(g2_cw(1.0, params(0.7, 1e-9)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(g2_cw(0.0, params(1.2, 1e-9)), InvalidArgument);
    CHECK_THROWS_AS(g2_cw(0.0, params(0.5, 0.0)), InvalidArgument);
}

TEST_CASE("g2_hom reference values")
{
    // Two-state floor with infinite timing resolution.
    CHECK(g2_hom(0.0, params(1.0, 1.7e-9), mzi(2.2e-9, Polarization::orthogonal)) ==
          doctest::Approx(0.362930177214936).epsilon(1e-12));
    CHECK(g2_hom(0.0, params(1.0, 1.5e-9), mzi(12.5e-9, Polarization::orthogonal)) ==
          doctest::Approx(0.5).epsilon(1e-3));
    for (double delta : {0.5e-9, 2.2e-9, 12.5e-9})
        CHECK(g2_hom(0.0, params(1.0, 1.5e-9), mzi(delta, Polarization::parallel)) == doctest::Approx(0.0));
}

TEST_CASE("g2_hom symmetry")
{
    const auto p = params(0.8, 1.5e-9);
    for (double tau : {0.1e-9, 1e-9, 5e-9, 12.5e-9}) {
        CHECK(g2_hom(tau, p, mzi(12.5e-9, Polarization::orthogonal)) ==
              doctest::Approx(g2_hom(-tau, p, mzi(12.5e-9, Polarization::orthogonal))));
        CHECK(g2_hom(tau, p, mzi(12.5e-9, Polarization::parallel, 0.7)) ==
              doctest::Approx(g2_hom(-tau, p, mzi(12.5e-9, Polarization::parallel, 0.7))));
    }
    // Plateau far from every dip.
    CHECK(g2_hom(100e-9, p, mzi(12.5e-9, Polarization::parallel)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("visibility")
{
    CHECK(visibility(0.5, 0.0) == doctest::Approx(1.0));
    CHECK(visibility(0.52, 0.35) == doctest::Approx(0.17 / 0.52));
    CHECK_THROWS_AS(visibility(0.0, 0.1), InvalidArgument);
}

TEST_CASE("convolved model matches independent numerical convolution")
{
    const auto p = params(1.0, 1.7e-9);
    const DelayFunction f = [p](double t) { return g2_cw(t, p); };
    const ConvolvedModel m(f, InstrumentResponse::gaussian(150e-12, 250e-12));
    // scipy.integrate.quad of the bin-averaged Gaussian-smeared curve.
    CHECK(m(0.0) == doctest::Approx(0.044630469329).epsilon(1e-4 / 0.0446));
    CHECK(std::abs(m(500e-12) - 0.253615734537) < 1e-4);
    CHECK(std::abs(m(0.0) - midpoint_oracle(f, 0.0, 150e-12, 250e-12)) < 1e-4);
    CHECK(std::abs(m(750e-12) - midpoint_oracle(f, 750e-12, 150e-12, 250e-12)) < 1e-4);
    CHECK(m.grid_step() <= 1e-12);
}

TEST_CASE("pairwise response adds the jitters in quadrature")
{
    const auto irf = InstrumentResponse::pairwise(100e-12, 100e-12, 125e-12);
    CHECK(irf.fwhm == doctest::Approx(std::sqrt(2.0) * 100e-12));
}

TEST_CASE("convolution conserves constants and on_bins agrees with single bins")
{
    const ConvolvedModel flat([](double) { return 1.0; }, InstrumentResponse::gaussian(300e-12, 256e-12));
    CHECK(flat(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    const auto p = params(0.85, 1.4e-9);
    const ConvolvedModel m([p](double t) { return g2_cw(t, p); }, InstrumentResponse::gaussian(141e-12, 256e-12));
    const auto bins = m.on_bins(-20, 41);
    for (int i = 0; i < 41; ++i) CHECK(bins[i] == doctest::Approx(m((i - 20) * 256e-12)).epsilon(1e-12));
    // Delta response reduces to the plain bin average.
    const ConvolvedModel box([](double t) { return t; }, InstrumentResponse::delta(1e-9));
    CHECK(box(3e-9) == doctest::Approx(3e-9).epsilon(1e-9));
}

TEST_CASE("tabulated response normalizes its weights")
{
    const auto irf = InstrumentResponse::tabulated({{-10e-12, 2.0}, {0.0, 4.0}, {10e-12, 2.0}}, 100e-12);
    const ConvolvedModel flat([](double) { return 2.0; }, irf);
    CHECK(flat(0.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS(InstrumentResponse::tabulated({}, 100e-12));
}

TEST_CASE("energy conservation and its inverse")
{
    CHECK(std::abs(output_wavelength(980e-9, 1550e-9) * 1e9 - 600.4) < 0.1);
    const double pump = solve_pump_for_target(983.8e-9, 601.8e-9);
    CHECK(pump * 1e9 == doctest::Approx(1550.0).epsilon(1e-3));
    CHECK(std::abs(output_wavelength(983.8e-9, pump) / 601.8e-9 - 1.0) <= 1e-15);
    CHECK_THROWS_AS(solve_pump_for_target(600e-9, 601.8e-9), InvalidArgument);
    CHECK(output_wavelength(980e-9, INFINITY) == 980e-9);
}

TEST_CASE("QPM response has the configured FWHM")
{
    ConversionStage s;
    CHECK(qpm_response(s.qpm_peak_signal, s) == 1.0);
    auto half = [&](double dir) {
        double lo = 0.0, hi = 1e-9;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (qpm_response(s.qpm_peak_signal + dir * mid, s) > 0.5 ? lo : hi) = mid;
        }
        return lo;
    };
    CHECK(std::abs((half(1.0) + half(-1.0)) * 1e9 - 0.20) < 1e-3);
    CHECK(std::sin(kSincHalfPower) / kSincHalfPower == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
}

TEST_CASE("conversion efficiency and background accounting")
{
    ConversionStage s;
    CHECK(conversion_efficiency(0.0, s) == 0.0);
    CHECK(conversion_efficiency(s.p_max, s) == doctest::Approx(s.eta_max));
    CHECK(conversion_efficiency(0.5, s) < conversion_efficiency(0.8, s));
    CHECK(signal_to_background(10050.0, 150.0, 50.0) == doctest::Approx(99.0));
    CHECK_THROWS_AS(signal_to_background(100.0, 50.0, 50.0), InvalidArgument);
    CHECK(internal_efficiency(0.2, 0.5, 0.8) == doctest::Approx(0.5));
}

TEST_CASE("temperature tuning spans 2 nm of output between 25 and 90 C")
{
    ConversionStage s;
    const double lo = output_wavelength(qpm_peak_at_temperature(25.0, s), s.lambda_pump);
    const double hi = output_wavelength(qpm_peak_at_temperature(90.0, s), s.lambda_pump);
    CHECK(std::abs(hi - lo) * 1e9 == doctest::Approx(2.0).epsilon(0.01));
    CHECK(qpm_peak_at_temperature(s.qpm_reference_temp_c, s) == s.qpm_peak_signal);
}
