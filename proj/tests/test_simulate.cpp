#include <doctest.h>

#include <cmath>
#include <map>

#include "qfcsim/correlate.hpp"
#include "qfcsim/error.hpp"
#include "qfcsim/fit.hpp"
#include "qfcsim/simulate.hpp"

using namespace qfcsim;
using namespace qfcsim::sim;

namespace {

DetectorSpec ideal_detector()
{
    DetectorSpec d;
    d.dead_time = 0.0;
    return d;
}

// Fraction of well-separated pairs whose photons leave through different ports.
double split_fraction(double dt, models::Polarization config, double v, int pairs, std::uint64_t seed)
{
    models::HomInterferometer h;
    h.config = config;
    h.v = v;
    const double spacing = 1e-6, tau_c = 100e-12;
    std::vector<ArmPhoton> arrivals;
    for (int k = 0; k < pairs; ++k) {
        const double t = k * spacing;
        arrivals.push_back({{t}, t, 1});
        arrivals.push_back({{t + dt}, t + dt, 2});
    }
    RandomSource rng(seed, 0);
    const auto out = combine_at_beamsplitter(arrivals, h, tau_c, rng);
    CHECK(out.pairs == static_cast<std::uint64_t>(pairs));
    CHECK(out.port_a.size() + out.port_b.size() == 2 * static_cast<std::size_t>(pairs));
    std::map<long, int> in_a;
    for (const auto& p : out.port_a) ++in_a[std::lround(p.time / spacing)];
    int split = 0;
    for (const auto& [k, n] : in_a) split += n == 1;
    return static_cast<double>(split) / pairs;
}

TimeTagStream as_stream(const std::vector<Photon>& photons, double duration, double res = 1e-12)
{
    std::vector<TimeTag> tags;
    for (const auto& p : photons) tags.push_back({to_ticks(p.time, res), 0});
    return TimeTagStream(res, 1, std::move(tags), duration);
}

}  // namespace

TEST_CASE("emission: zero duration and strictly increasing times")
{
    EmitterSpec e;
    CHECK(simulate_emission(e, 0.0, RandomSource(1, 0)).empty());
    const auto photons = simulate_emission(e, 1e-4, RandomSource(1, 0));
    REQUIRE(photons.size() > 100);
    for (std::size_t i = 1; i < photons.size(); ++i) REQUIRE(photons[i].time > photons[i - 1].time);
}

TEST_CASE("emission: infinite pump gives exponential gaps with mean lifetime")
{
    EmitterSpec e;
    e.pump_rate = INFINITY;
    const double T1 = 1.5e-9;
    const auto photons = simulate_emission(e, 1.0e6 * T1, RandomSource(2, 0));
    const std::size_t n = photons.size() - 1;
    REQUIRE(n > 900000);
    const double mean = (photons.back().time - photons.front().time) / static_cast<double>(n);
    CHECK(std::abs(mean - T1) < 3.0 * T1 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("emission: pump rate 1/lifetime halves the recovery time")
{
    EmitterSpec e;
    e.pump_rate = 1.0 / e.lifetime;
    const double duration = 3e-3;
    const auto photons = simulate_emission(e, duration, RandomSource(3, 0));
    corr::CorrelationRequest req{0, 0, corr::CorrelationMode::full, 100e-12, 1e-6};
    auto h = corr::normalize_cw(corr::correlate(as_stream(photons, duration), req), 500e-9);
    fit::FitOptions opts;
    opts.window = 15e-9;
    const auto r = fit::fit_g2(h, models::InstrumentResponse::delta(100e-12), fit::ModelId::g2_cw, {}, {}, opts);
    CHECK(r.converged);
    CHECK(r.params.at("tau_r") == doctest::Approx(e.lifetime / 2).epsilon(0.05));
    CHECK(r.params.at("alpha") == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("emitter validation")
{
    EmitterSpec e;
    e.mode = Excitation::pulsed;
    e.pulsed.rep_rate = 400e6;
    CHECK_THROWS_AS(e.validate(), InvalidArgument);  // rep_rate * lifetime >= 0.5
    EmitterSpec c;
    c.charge_model = ChargeModel{};
    c.charge_model->branching = 0.7;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c.charge_model->branching = 0.3;
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("background realizes the requested alpha")
{
    EmitterSpec e;
    e.alpha = 0.81;
    CHECK(e.effective_background_rate() == doctest::Approx(e.signal_rate() * (1.0 / 0.9 - 1.0)));
    const double rho = e.signal_rate() / (e.signal_rate() + e.effective_background_rate());
    CHECK(rho * rho == doctest::Approx(0.81));
    e.background_rate = 5.0;
    CHECK(e.effective_background_rate() == 5.0);
}

TEST_CASE("two-line emission follows the charge cycle")
{
    EmitterSpec e;
    e.charge_model = ChargeModel{};
    e.charge_model->branching = 0.3;
    const auto photons = simulate_emission(e, 2e-3, RandomSource(4, 0));
    std::size_t x2 = 0;
    for (std::size_t i = 0; i < photons.size(); ++i) {
        if (photons[i].line != Line::x2) continue;
        ++x2;
        // Every X2 photon is followed by X1.
        if (i + 1 < photons.size()) REQUIRE(photons[i + 1].line == Line::x1);
    }
    const double f = static_cast<double>(x2) / static_cast<double>(photons.size());
    const double n = static_cast<double>(photons.size());
    CHECK(std::abs(f - 0.3) < 4 * std::sqrt(0.3 * 0.7 / n));
    CHECK(n / 2e-3 == doctest::Approx(e.signal_rate()).epsilon(0.01));
}

TEST_CASE("pulsed emission: at most one photon per pulse, mean excitation probability")
{
    EmitterSpec e;
    e.mode = Excitation::pulsed;
    e.lifetime = 1e-9;
    const double duration = 2e-3;
    const auto photons = simulate_emission(e, duration, RandomSource(5, 0));
    const double pulses = duration * e.pulsed.rep_rate;
    CHECK(static_cast<double>(photons.size()) / pulses == doctest::Approx(0.9).epsilon(0.01));
}

TEST_CASE("coherent pulses are Poissonian per pulse")
{
    const auto photons = simulate_coherent_pulses(50e6, 50e-12, 0.2, 1e-3, RandomSource(6, 0));
    const double n = static_cast<double>(photons.size());
    CHECK(std::abs(n - 0.2 * 50e3) < 4 * std::sqrt(0.2 * 50e3));
}

TEST_CASE("QFC stage: pass-through, thinning and background")
{
    std::vector<Photon> in;
    for (int i = 0; i < 1000000; ++i) in.push_back({i * 1e-9});
    QfcSpec q;
    CHECK(apply_qfc(in, q, 0.8, 1e-3, RandomSource(7, 0)).photons.size() == in.size());  // disabled

    q.enabled = true;
    q.stage.eta_max = 1.0;
    q.stage.background_rate_coeff = 0.0;
    const auto ideal = apply_qfc(in, q, q.stage.p_max, 1e-3, RandomSource(7, 0));
    REQUIRE(ideal.photons.size() == in.size());
    CHECK(ideal.photons.back().time == in.back().time);

    q.stage.eta_max = 0.4;
    const auto thinned = apply_qfc(in, q, q.stage.p_max, 1e-3, RandomSource(7, 1));
    const double sd = std::sqrt(1e6 * 0.4 * 0.6);
    CHECK(std::abs(static_cast<double>(thinned.photons.size()) - 4e5) < 3 * sd);
    CHECK(thinned.lost + thinned.photons.size() == in.size());

    q.stage.background_rate_coeff = 1e6;
    const auto dark = apply_qfc(in, q, 0.0, 1e-3, RandomSource(7, 2));
    CHECK(dark.photons.empty());  // no pump, no conversion, no background
    const auto noisy = apply_qfc({}, q, 0.5, 1.0, RandomSource(7, 3));
    CHECK(std::abs(static_cast<double>(noisy.background_added) - 5e5) < 4 * std::sqrt(5e5));
    for (const auto& p : noisy.photons) REQUIRE(p.origin == Origin::qfc_background);
}

TEST_CASE("beamsplitter coalescence rule")
{
    const int pairs = 100000;
    const double sd = std::sqrt(0.25 / pairs);
    // Distinguishable photons split half the time.
    CHECK(std::abs(split_fraction(0.0, models::Polarization::orthogonal, 1.0, pairs, 1) - 0.5) < 3 * sd);
    CHECK(std::abs(split_fraction(0.0, models::Polarization::parallel, 0.0, pairs, 2) - 0.5) < 3 * sd);
    // Perfect overlap never splits.
    CHECK(split_fraction(0.0, models::Polarization::parallel, 1.0, pairs, 3) == 0.0);
    const double expected = 0.5 * (1.0 - std::exp(-2.0));
    CHECK(std::abs(split_fraction(100e-12, models::Polarization::parallel, 1.0, pairs, 4) - expected) <
          3 * std::sqrt(expected * (1 - expected) / pairs));
}

TEST_CASE("route_hom: every photon leaves exactly one port")
{
    EmitterSpec e;
    const auto photons = simulate_emission(e, 1e-4, RandomSource(8, 0));
    const auto out = route_hom(photons, models::HomInterferometer{}, e.tau_c, RandomSource(8, 1));
    CHECK(out.port_a.size() + out.port_b.size() == photons.size());
    const auto s = split(photons, 0.3, RandomSource(8, 2));
    CHECK(s.port_a.size() + s.port_b.size() == photons.size());
}

TEST_CASE("ideal detector quantizes arrival times")
{
    const std::vector<Photon> in = {{1e-9}, {2.0000000001e-9}, {5e-9}};
    const auto r = detect(in, ideal_detector(), 1, 1e-8, RandomSource(9, 0), 4e-12);
    REQUIRE(r.stream.size() == 3);
    CHECK(r.stream.tags()[0].ticks == 250);
    CHECK(r.stream.tags()[1].ticks == 500);
    CHECK(r.stream.tags()[2].ticks == 1250);
    CHECK(r.stream.tags()[0].channel == 1);
    CHECK(r.counts.balanced());
}

TEST_CASE("dark counts are Poissonian")
{
    DetectorSpec d = ideal_detector();
    d.dark_rate = 50.0;
    const auto r = detect({}, d, 0, 100.0, RandomSource(10, 0));
    CHECK(std::abs(static_cast<double>(r.stream.size()) - 5000.0) < 3 * std::sqrt(5000.0));
}

TEST_CASE("jitter has the configured FWHM")
{
    std::vector<Photon> in;
    for (int i = 0; i < 100000; ++i) in.push_back({1e-6 + i * 1e-7});
    DetectorSpec d = ideal_detector();
    d.jitter_fwhm = 100e-12;
    const auto r = detect(in, d, 0, 1.0, RandomSource(11, 0), 1e-15);
    REQUIRE(r.stream.size() == in.size());
    double s2 = 0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const double e = static_cast<double>(r.stream.tags()[i].ticks) * 1e-15 - in[i].time;
        s2 += e * e;
    }
    const double sigma = 100e-12 / models::kFwhmPerSigma;
    const double sd = std::sqrt(s2 / in.size());
    CHECK(std::abs(sd - sigma) < 3 * sigma / std::sqrt(2.0 * in.size()));
}

TEST_CASE("dead time drops close events and every drop is counted")
{
    std::vector<Photon> in;
    for (int i = 0; i < 1000; ++i) in.push_back({i * 10e-9});
    DetectorSpec d = ideal_detector();
    d.dead_time = 25e-9;
    d.efficiency = 0.9;
    d.dark_rate = 1e5;
    const auto r = detect(in, d, 0, 1e-5, RandomSource(12, 0));
    CHECK(r.counts.balanced());
    CHECK(r.counts.dead_time_dropped > 0);
    const auto tags = r.stream.tags();
    for (std::size_t i = 1; i < tags.size(); ++i)
        REQUIRE(static_cast<double>(tags[i].ticks - tags[i - 1].ticks) * kDefaultResolution >= 25e-9 - 4e-12);
}

TEST_CASE("run_experiment is deterministic and conserves photons in every scenario")
{
    std::vector<ExperimentConfig> configs;
    ExperimentConfig base;
    base.detectors = {DetectorSpec{0.6, 100e-12, 1e3, 30e-9}, DetectorSpec{0.5, 100e-12, 1e3, 30e-9}};
    base.emitter.alpha = 0.8;
    configs.push_back(base);
    auto pulsed = base;
    pulsed.scenario = Scenario::hbt_pulsed;
    pulsed.emitter.mode = Excitation::pulsed;
    pulsed.emitter.lifetime = 1e-9;
    configs.push_back(pulsed);
    auto hom = base;
    hom.scenario = Scenario::hom_single;
    hom.qfc.enabled = true;
    configs.push_back(hom);
    auto two = base;
    two.scenario = Scenario::two_state_hbt;
    two.emitter.charge_model = ChargeModel{};
    two.qfc.enabled = true;
    two.detectors = {base.detectors[0], base.detectors[1], base.detectors[0], base.detectors[1]};
    configs.push_back(two);
    auto two_hom = two;
    two_hom.scenario = Scenario::two_state_hom;
    two_hom.detectors.resize(2);
    configs.push_back(two_hom);

    for (const auto& cfg : configs) {
        CAPTURE(to_string(cfg.scenario));
        const auto a = run_experiment(cfg, 2e-4, RandomSource(21, 0));
        const auto b = run_experiment(cfg, 2e-4, RandomSource(21, 0));
        const auto c = run_experiment(cfg, 2e-4, RandomSource(22, 0));
        REQUIRE(a.detectors.size() == detector_count(cfg.scenario));
        CHECK(a.detectors == b.detectors);
        CHECK(a.detectors != c.detectors);
        CHECK(a.counts.conserved());
        for (std::size_t d = 0; d < a.detectors.size(); ++d) {
            CHECK(a.detectors[d].channel_count() == a.detectors.size());
            CHECK(a.detectors[d].is_sorted());
            for (const auto& t : a.detectors[d].tags()) REQUIRE(t.channel == d);
        }
        CHECK(a.combined().size() == a.detectors[0].size() + a.detectors[1].size() +
                                         (a.detectors.size() > 2 ? a.detectors[2].size() + a.detectors[3].size() : 0));
    }
}

TEST_CASE("scenario validation rejects inconsistent settings")
{
    ExperimentConfig cfg;
    cfg.detectors.resize(1);
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg.detectors.resize(2);
    cfg.scenario = Scenario::two_state_hom;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);  // no charge model, no conversion
    cfg.scenario = Scenario::hbt_pulsed;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);  // cw emitter
    CHECK_THROWS_AS(scenario_from_string("fig9"), InvalidArgument);
    for (auto s : {Scenario::hbt_cw, Scenario::hbt_pulsed, Scenario::hom_single, Scenario::two_state_hbt,
                   Scenario::two_state_hom})
        CHECK(scenario_from_string(to_string(s)) == s);
}

TEST_CASE("zero duration gives empty streams")
{
    ExperimentConfig cfg;
    cfg.detectors.resize(2);
    const auto r = run_experiment(cfg, 0.0, RandomSource(1, 0));
    REQUIRE(r.detectors.size() == 2);
    CHECK(r.detectors[0].empty());
    CHECK(r.counts.conserved());
}
