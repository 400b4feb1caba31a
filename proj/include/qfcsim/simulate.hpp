#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfcsim/models.hpp"
#include "qfcsim/random.hpp"
#include "qfcsim/time_tag.hpp"

namespace qfcsim::sim {

enum class Line : std::uint8_t { x1, x2 };
enum class Origin : std::uint8_t { emitter, emitter_background, qfc_background };

struct Photon {
    double time = 0.0;
    Line line = Line::x1;
    Origin origin = Origin::emitter;
};

/// Four-state charge cycle for two-line emission:
/// empty -> charged exciton (multi capture) -> X2 photon -> single charge
/// -> neutral exciton (single capture) -> X1 photon -> empty.
/// With branching f < 1/2 a fraction of captures from empty go straight to
/// the neutral exciton, so that f of all emissions are on X2.
struct ChargeModel {
    double rate_single_capture = 2e9;
    double rate_multi_capture = 2e8;
    double branching = 0.5;

    friend bool operator==(const ChargeModel&, const ChargeModel&) = default;
};

enum class Excitation { cw, pulsed };
enum class SourceKind { quantum_dot, coherent };

struct PulsedDrive {
    double rep_rate = 50e6;
    double pulse_width = 50e-12;
    double excitation_probability = 0.9;

    friend bool operator==(const PulsedDrive&, const PulsedDrive&) = default;
};

struct EmitterSpec {
    double lifetime = 1.5e-9;
    double tau_c = 100e-12;
    double pump_rate = 1e8;  // cw re-excitation rate, 1/s
    Excitation mode = Excitation::cw;
    PulsedDrive pulsed;
    std::optional<ChargeModel> charge_model;
    SourceKind source = SourceKind::quantum_dot;
    double mean_photons_per_pulse = 0.1;   // coherent source only
    /// Target antibunching depth; realized with uncorrelated background photons
    /// at rate S (1/sqrt(alpha) - 1), S the mean emission rate.
    double alpha = 1.0;
    std::optional<double> background_rate;  // overrides alpha when set

    void validate() const;
    /// Mean rate of emitter (non-background) photons.
    double signal_rate() const;
    double effective_background_rate() const;
    /// 1 / (pump_rate + 1 / lifetime): recovery time of the single-line cw chain.
    double recovery_time() const;

    friend bool operator==(const EmitterSpec&, const EmitterSpec&) = default;
};

struct DetectorSpec {
    double efficiency = 1.0;
    double jitter_fwhm = 0.0;
    double dark_rate = 0.0;
    double dead_time = 50e-9;

    void validate() const;

    friend bool operator==(const DetectorSpec&, const DetectorSpec&) = default;
};

struct QfcSpec {
    models::ConversionStage stage;
    bool enabled = false;

    void validate() const { stage.validate(); }

    friend bool operator==(const QfcSpec&, const QfcSpec&) = default;
};

/// Continuous-time Markov chain emission (no background).
std::vector<Photon> simulate_emission(const EmitterSpec& spec, double duration, RandomSource rng);

/// Emission plus the uncorrelated background that realizes spec.alpha.
std::vector<Photon> simulate_source(const EmitterSpec& spec, double duration, RandomSource rng);

/// Homogeneous Poisson photons on [0, duration), sorted.
std::vector<Photon> poisson_photons(double rate, double duration, Origin origin, RandomSource& rng,
                                    Line line = Line::x1);

struct QfcOutput {
    std::vector<Photon> photons;
    std::uint64_t lost = 0;
    std::uint64_t background_added = 0;
};

/// Bernoulli thinning at conversion_efficiency(pump_power) plus Poisson
/// background at background_rate_coeff * pump_power. Disabled stages pass through.
QfcOutput apply_qfc(std::span<const Photon> photons, const QfcSpec& q, double pump_power, double duration,
                    RandomSource rng);

/// Photon at the second beamsplitter of the interferometer.
struct ArmPhoton {
    Photon photon;
    double arrival = 0.0;
    int input = 1;  // 1 = short arm, 2 = delayed arm
};

struct PortOutput {
    std::vector<Photon> port_a;
    std::vector<Photon> port_b;
    std::uint64_t pairs = 0;  // pairs that met within the coalescence window
};

/// Second beamsplitter. Photons from different inputs arriving within 5 tau_c
/// are paired earliest-first; a pair leaves through different ports with the
/// distinguishable probability t2^2 + r2^2 scaled by
/// F = 1 - v exp(-2 |dt| / tau_c) (parallel) or F = 1 (orthogonal).
/// Unpaired photons route independently. Port A is transmission from input 1.
PortOutput combine_at_beamsplitter(std::vector<ArmPhoton> arrivals, const models::HomInterferometer& h, double tau_c,
                                   RandomSource& rng);

/// Full Mach-Zehnder: first splitter (delay on reflection) then combine_at_beamsplitter.
PortOutput route_hom(std::span<const Photon> photons, const models::HomInterferometer& h, double tau_c,
                     RandomSource rng);

/// Plain splitter for HBT: each photon goes to port A with probability `transmission`.
PortOutput split(std::span<const Photon> photons, double transmission, RandomSource rng);

struct DetectorCounts {
    std::uint64_t input = 0;
    std::uint64_t efficiency_dropped = 0;
    std::uint64_t out_of_window = 0;
    std::uint64_t dark_added = 0;
    std::uint64_t dead_time_dropped = 0;
    std::uint64_t detected = 0;

    bool balanced() const noexcept
    {
        return detected + efficiency_dropped + out_of_window + dead_time_dropped == input + dark_added;
    }
};

struct DetectionResult {
    TimeTagStream stream;
    DetectorCounts counts;
};

/// Efficiency thinning, Gaussian jitter, Poisson dark counts, dead time, then
/// quantization to `resolution`. Events outside [0, duration] are dropped.
DetectionResult detect(std::span<const Photon> photons, const DetectorSpec& d, unsigned channel, double duration,
                       RandomSource rng, double resolution = kDefaultResolution);

enum class Scenario { hbt_cw, hbt_pulsed, hom_single, two_state_hbt, two_state_hom };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& text);
/// Number of detectors each scenario drives.
unsigned detector_count(Scenario s);

struct ExperimentConfig {
    Scenario scenario = Scenario::hbt_cw;
    EmitterSpec emitter;
    QfcSpec qfc;
    double pump_power = 0.8;
    models::HomInterferometer interferometer;
    double splitter_transmission = 0.5;
    std::vector<DetectorSpec> detectors;
    double resolution = kDefaultResolution;

    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Photons entering and leaving one optical path.
struct PathCounts {
    std::string name;
    std::uint64_t input = 0;
    std::uint64_t qfc_lost = 0;
    std::uint64_t qfc_background = 0;
    std::uint64_t delivered = 0;
    std::vector<unsigned> detectors;

    bool balanced() const noexcept { return delivered == input - qfc_lost + qfc_background; }
};

struct StageCounts {
    std::uint64_t emitted = 0;
    std::uint64_t emitter_background = 0;
    std::vector<PathCounts> paths;
    std::vector<DetectorCounts> detectors;

    /// Every photon is detected or dropped by a named stage, along every path.
    bool conserved() const noexcept;
};

struct ExperimentResult {
    std::vector<TimeTagStream> detectors;  // one per detector; tags carry the detector index
    StageCounts counts;

    /// All detector streams merged into one sorted stream.
    TimeTagStream combined() const;
};

/// emitter -> (QFC) -> (interferometer | splitter | line filters) -> detectors.
/// Detector d writes channel d. Deterministic in (config, duration, rng).
ExperimentResult run_experiment(const ExperimentConfig& cfg, double duration, RandomSource rng);

/// Attenuated-laser reference: Poisson(mean) photons per pulse.
std::vector<Photon> simulate_coherent_pulses(double rep_rate, double pulse_width, double mean_photons, double duration,
                                             RandomSource rng);

}  // namespace qfcsim::sim
