#include <algorithm>
#include <cmath>

#include "qfcsim/error.hpp"
#include "qfcsim/simulate.hpp"

namespace qfcsim::sim {
namespace {

struct Sink {
    unsigned detector;
    std::vector<Photon> photons;
};

// Stream ids of the independent random sub-sources.
enum : std::uint64_t {
    kSourceStream = 10,
    kQfcStream = 20,
    kRoutingStream = 30,
    kDetectorStream = 100,
};

}  // namespace

std::string to_string(Scenario s)
{
    switch (s) {
    case Scenario::hbt_cw: return "hbt_cw";
    case Scenario::hbt_pulsed: return "hbt_pulsed";
    case Scenario::hom_single: return "hom_single";
    case Scenario::two_state_hbt: return "two_state_hbt";
    case Scenario::two_state_hom: return "two_state_hom";
    }
    return "unknown";
}

Scenario scenario_from_string(const std::string& text)
{
    for (Scenario s : {Scenario::hbt_cw, Scenario::hbt_pulsed, Scenario::hom_single, Scenario::two_state_hbt,
                       Scenario::two_state_hom})
        if (to_string(s) == text) return s;
    throw InvalidArgument("unknown scenario \"" + text + "\"");
}

unsigned detector_count(Scenario s)
{
    return s == Scenario::two_state_hbt ? 4 : 2;
}

void ExperimentConfig::validate() const
{
    emitter.validate();
    if (qfc.enabled) qfc.validate();
    require(std::isfinite(pump_power) && pump_power >= 0.0, "pump power must be non-negative");
    require(splitter_transmission >= 0.0 && splitter_transmission <= 1.0, "splitter transmission must lie in [0, 1]");
    require(std::isfinite(resolution) && resolution > 0.0, "resolution must be positive");
    const unsigned needed = detector_count(scenario);
    if (detectors.size() != needed)
        throw InvalidArgument("scenario " + to_string(scenario) + " needs " + std::to_string(needed) +
                              " detectors, got " + std::to_string(detectors.size()));
    for (const auto& d : detectors) d.validate();

    const bool two_line = emitter.charge_model.has_value();
    switch (scenario) {
    case Scenario::hbt_cw:
        require(emitter.mode == Excitation::cw, "hbt_cw needs cw excitation");
        break;
    case Scenario::hbt_pulsed:
        require(emitter.mode == Excitation::pulsed, "hbt_pulsed needs pulsed excitation");
        break;
    case Scenario::hom_single:
        require(emitter.mode == Excitation::cw, "hom_single needs cw excitation");
        interferometer.validate();
        break;
    case Scenario::two_state_hbt:
        require(two_line, "two_state_hbt needs an emitter charge model");
        break;
    case Scenario::two_state_hom:
        require(two_line, "two_state_hom needs an emitter charge model");
        require(qfc.enabled, "two_state_hom converts both lines to one wavelength: enable the qfc section");
        interferometer.validate();
        break;
    }
}

bool StageCounts::conserved() const noexcept
{
    for (const auto& path : paths) {
        if (!path.balanced()) return false;
        std::uint64_t into_detectors = 0;
        for (unsigned d : path.detectors) {
            if (d >= detectors.size()) return false;
            into_detectors += detectors[d].input;
        }
        if (into_detectors != path.delivered) return false;
    }
    for (const auto& d : detectors)
        if (!d.balanced()) return false;
    return true;
}

TimeTagStream ExperimentResult::combined() const
{
    require(!detectors.empty(), "experiment produced no detector streams");
    TimeTagStream out = detectors.front();
    for (std::size_t i = 1; i < detectors.size(); ++i) out = merge_streams(out, detectors[i]);
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, double duration, RandomSource rng)
{
    cfg.validate();
    require(std::isfinite(duration) && duration >= 0.0, "duration must be non-negative");

    ExperimentResult result;
    auto& counts = result.counts;
    const auto source = simulate_source(cfg.emitter, duration, rng.substream(kSourceStream));
    for (const auto& p : source) (p.origin == Origin::emitter ? counts.emitted : counts.emitter_background) += 1;

    std::vector<Sink> sinks;
    auto convert = [&](std::span<const Photon> photons, PathCounts& path, std::uint64_t salt) {
        path.input = photons.size();
        auto q = apply_qfc(photons, cfg.qfc, cfg.pump_power, duration, rng.substream(kQfcStream + salt));
        path.qfc_lost = q.lost;
        path.qfc_background = q.background_added;
        path.delivered = q.photons.size();
        return std::move(q.photons);
    };
    auto to_ports = [&](PortOutput ports, PathCounts& path, unsigned det_a, unsigned det_b) {
        path.detectors = {det_a, det_b};
        sinks.push_back({det_a, std::move(ports.port_a)});
        sinks.push_back({det_b, std::move(ports.port_b)});
    };
    const double tau_c = cfg.emitter.tau_c;

    switch (cfg.scenario) {
    case Scenario::hbt_cw:
    case Scenario::hbt_pulsed: {
        PathCounts path{"hbt"};
        auto photons = convert(source, path, 0);
        to_ports(split(photons, cfg.splitter_transmission, rng.substream(kRoutingStream)), path, 0, 1);
        counts.paths.push_back(std::move(path));
        break;
    }
    case Scenario::hom_single:
    case Scenario::two_state_hom: {
        PathCounts path{"hom"};
        auto photons = convert(source, path, 0);
        to_ports(route_hom(photons, cfg.interferometer, tau_c, rng.substream(kRoutingStream)), path, 0, 1);
        counts.paths.push_back(std::move(path));
        break;
    }
    case Scenario::two_state_hbt: {
        // Both analyses read the same emission record: lines separated by
        // filters before conversion, and both lines converted to one
        // wavelength and split onto an HBT pair.
        PathCounts filtered{"line_filters"};
        filtered.input = source.size();
        filtered.delivered = source.size();
        filtered.detectors = {0, 1};
        std::vector<Photon> x1, x2;
        for (const auto& p : source) (p.line == Line::x1 ? x1 : x2).push_back(p);
        sinks.push_back({0, std::move(x1)});
        sinks.push_back({1, std::move(x2)});
        counts.paths.push_back(std::move(filtered));

        PathCounts combined{"converted_hbt"};
        auto photons = convert(source, combined, 1);
        to_ports(split(photons, cfg.splitter_transmission, rng.substream(kRoutingStream + 1)), combined, 2, 3);
        counts.paths.push_back(std::move(combined));
        break;
    }
    }

    const unsigned n = detector_count(cfg.scenario);
    counts.detectors.resize(n);
    result.detectors.resize(n);
    for (auto& sink : sinks) {
        auto det = detect(sink.photons, cfg.detectors[sink.detector], sink.detector, duration,
                          rng.substream(kDetectorStream + sink.detector), cfg.resolution);
        counts.detectors[sink.detector] = det.counts;
        // Every detector stream declares the full channel map so streams merge cleanly.
        result.detectors[sink.detector] =
            TimeTagStream(cfg.resolution, n, {det.stream.tags().begin(), det.stream.tags().end()}, duration);
    }
    return result;
}

}  // namespace qfcsim::sim
