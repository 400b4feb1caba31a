#include <algorithm>
#include <cmath>
#include <limits>

#include "qfcsim/error.hpp"
#include "qfcsim/simulate.hpp"

namespace qfcsim::sim {
namespace {

bool finite_positive(double x)
{
    return std::isfinite(x) && x > 0.0;
}

// Probability that a capture from the empty state leads to the charged exciton.
double charged_capture_fraction(const ChargeModel& c)
{
    return c.branching / (1.0 - c.branching);
}

std::vector<Photon> emit_single_line_cw(const EmitterSpec& spec, double duration, RandomSource& rng)
{
    std::vector<Photon> out;
    const double excite_mean = std::isinf(spec.pump_rate) ? 0.0 : 1.0 / spec.pump_rate;
    double t = 0.0;
    for (;;) {
        t += rng.exponential(excite_mean);
        t += rng.exponential(spec.lifetime);
        if (t >= duration) break;
        out.push_back({t, Line::x1, Origin::emitter});
    }
    return out;
}

std::vector<Photon> emit_two_line_cw(const EmitterSpec& spec, double duration, RandomSource& rng)
{
    const ChargeModel& c = *spec.charge_model;
    const double q = charged_capture_fraction(c);
    std::vector<Photon> out;
    double t = 0.0;
    for (;;) {
        t += rng.exponential(1.0 / c.rate_multi_capture);
        if (rng.bernoulli(q)) {
            t += rng.exponential(spec.lifetime);
            if (t >= duration) break;
            out.push_back({t, Line::x2, Origin::emitter});
            t += rng.exponential(1.0 / c.rate_single_capture);
        }
        t += rng.exponential(spec.lifetime);
        if (t >= duration) break;
        out.push_back({t, Line::x1, Origin::emitter});
    }
    return out;
}

std::vector<Photon> emit_pulsed(const EmitterSpec& spec, double duration, RandomSource& rng)
{
    std::vector<Photon> out;
    const double period = 1.0 / spec.pulsed.rep_rate;
    const double pulse_sigma = spec.pulsed.pulse_width / models::kFwhmPerSigma;
    double last = -std::numeric_limits<double>::infinity();
    for (std::uint64_t k = 0;; ++k) {
        const double pulse = static_cast<double>(k) * period;
        if (pulse >= duration) break;
        // The dot is still excited from an earlier pulse: no re-excitation.
        if (last >= pulse) continue;
        if (!rng.bernoulli(spec.pulsed.excitation_probability)) continue;
        const double t = std::max(pulse + rng.normal(0.0, pulse_sigma), 0.0) + rng.exponential(spec.lifetime);
        if (t >= duration) continue;
        out.push_back({t, Line::x1, Origin::emitter});
        last = t;
    }
    return out;
}

}  // namespace

void EmitterSpec::validate() const
{
    require(finite_positive(lifetime), "emitter lifetime must be positive");
    require(finite_positive(tau_c), "emitter coherence time must be positive");
    require(pump_rate > 0.0 && !std::isnan(pump_rate), "pump rate must be positive");
    require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0, "emitter alpha must lie in (0, 1]");
    if (background_rate)
        require(std::isfinite(*background_rate) && *background_rate >= 0.0, "background rate must be non-negative");
    if (mode == Excitation::pulsed || source == SourceKind::coherent) {
        require(finite_positive(pulsed.rep_rate), "repetition rate must be positive");
        require(std::isfinite(pulsed.pulse_width) && pulsed.pulse_width >= 0.0, "pulse width must be non-negative");
        require(pulsed.excitation_probability >= 0.0 && pulsed.excitation_probability <= 1.0,
                "excitation probability must lie in [0, 1]");
    }
    if (mode == Excitation::pulsed && source == SourceKind::quantum_dot)
        require(pulsed.rep_rate * lifetime < 0.5, "pulsed drive needs rep_rate * lifetime < 0.5");
    if (source == SourceKind::coherent) {
        require(mode == Excitation::pulsed, "coherent source requires pulsed mode");
        require(std::isfinite(mean_photons_per_pulse) && mean_photons_per_pulse >= 0.0,
                "mean photons per pulse must be non-negative");
        require(!charge_model, "coherent source has no charge model");
    }
    if (charge_model) {
        require(mode == Excitation::cw, "the two-line charge model is only defined for cw drive");
        require(finite_positive(charge_model->rate_single_capture) && finite_positive(charge_model->rate_multi_capture),
                "capture rates must be positive");
        require(charge_model->branching >= 0.0 && charge_model->branching <= 0.5,
                "branching (fraction of X2 emissions) must lie in [0, 0.5]: every X2 photon is followed by an X1 photon");
    }
}

double EmitterSpec::recovery_time() const
{
    return 1.0 / (pump_rate + 1.0 / lifetime);
}

double EmitterSpec::signal_rate() const
{
    if (source == SourceKind::coherent) return mean_photons_per_pulse * pulsed.rep_rate;
    if (mode == Excitation::pulsed) return pulsed.excitation_probability * pulsed.rep_rate;
    if (charge_model) {
        const double q = charged_capture_fraction(*charge_model);
        const double cycle = 1.0 / charge_model->rate_multi_capture + lifetime +
                             q * (1.0 / charge_model->rate_single_capture + lifetime);
        return (1.0 + q) / cycle;
    }
    if (std::isinf(pump_rate)) return 1.0 / lifetime;
    return 1.0 / (1.0 / pump_rate + lifetime);
}

double EmitterSpec::effective_background_rate() const
{
    if (background_rate) return *background_rate;
    if (source == SourceKind::coherent) return 0.0;
    return signal_rate() * (1.0 / std::sqrt(alpha) - 1.0);
}

std::vector<Photon> simulate_emission(const EmitterSpec& spec, double duration, RandomSource rng)
{
    spec.validate();
    require(std::isfinite(duration) && duration >= 0.0, "duration must be non-negative");
    if (duration == 0.0) return {};
    if (spec.source == SourceKind::coherent)
        return simulate_coherent_pulses(spec.pulsed.rep_rate, spec.pulsed.pulse_width, spec.mean_photons_per_pulse,
                                        duration, rng);
    if (spec.mode == Excitation::pulsed) return emit_pulsed(spec, duration, rng);
    if (spec.charge_model) return emit_two_line_cw(spec, duration, rng);
    return emit_single_line_cw(spec, duration, rng);
}

std::vector<Photon> poisson_photons(double rate, double duration, Origin origin, RandomSource& rng, Line line)
{
    std::vector<Photon> out;
    if (rate <= 0.0 || duration <= 0.0) return out;
    out.reserve(static_cast<std::size_t>(rate * duration * 1.05) + 16);
    for (double t = rng.exponential(1.0 / rate); t < duration; t += rng.exponential(1.0 / rate))
        out.push_back({t, line, origin});
    return out;
}

std::vector<Photon> simulate_source(const EmitterSpec& spec, double duration, RandomSource rng)
{
    auto photons = simulate_emission(spec, duration, rng.substream(1));
    auto bg_rng = rng.substream(2);
    auto background = poisson_photons(spec.effective_background_rate(), duration, Origin::emitter_background, bg_rng);
    if (spec.charge_model) {
        // Background photons land on the X2 filter with the emission branching ratio.
        for (auto& p : background)
            if (bg_rng.bernoulli(spec.charge_model->branching)) p.line = Line::x2;
    }
    std::vector<Photon> out;
    out.reserve(photons.size() + background.size());
    std::merge(photons.begin(), photons.end(), background.begin(), background.end(), std::back_inserter(out),
               [](const Photon& a, const Photon& b) { return a.time < b.time; });
    return out;
}

std::vector<Photon> simulate_coherent_pulses(double rep_rate, double pulse_width, double mean_photons, double duration,
                                             RandomSource rng)
{
    require(rep_rate > 0.0 && mean_photons >= 0.0 && pulse_width >= 0.0, "invalid coherent pulse parameters");
    std::vector<Photon> out;
    const double period = 1.0 / rep_rate;
    const double sigma = pulse_width / models::kFwhmPerSigma;
    for (std::uint64_t k = 0;; ++k) {
        const double pulse = static_cast<double>(k) * period;
        if (pulse >= duration) break;
        const auto n = rng.poisson(mean_photons);
        for (std::uint64_t i = 0; i < n; ++i) {
            const double t = pulse + rng.normal(0.0, sigma);
            if (t >= 0.0 && t < duration) out.push_back({t, Line::x1, Origin::emitter});
        }
    }
    std::sort(out.begin(), out.end(), [](const Photon& a, const Photon& b) { return a.time < b.time; });
    return out;
}

}  // namespace qfcsim::sim
