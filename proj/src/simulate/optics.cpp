#include <algorithm>
#include <cmath>

#include "qfcsim/error.hpp"
#include "qfcsim/simulate.hpp"

namespace qfcsim::sim {
namespace {

bool by_time(const Photon& a, const Photon& b)
{
    return a.time < b.time;
}

constexpr double kCoalescenceWindow = 5.0;  // in units of tau_c

}  // namespace

QfcOutput apply_qfc(std::span<const Photon> photons, const QfcSpec& q, double pump_power, double duration,
                    RandomSource rng)
{
    QfcOutput out;
    if (!q.enabled) {
        out.photons.assign(photons.begin(), photons.end());
        return out;
    }
    q.validate();
    const double eta = models::conversion_efficiency(pump_power, q.stage);
    auto thin = rng.substream(1);
    std::vector<Photon> kept;
    kept.reserve(static_cast<std::size_t>(static_cast<double>(photons.size()) * eta) + 16);
    for (const auto& p : photons) {
        if (thin.bernoulli(eta)) kept.push_back(p);
        else ++out.lost;
    }
    auto bg_rng = rng.substream(2);
    auto background = poisson_photons(q.stage.background_rate_coeff * pump_power, duration, Origin::qfc_background,
                                      bg_rng);
    out.background_added = background.size();
    out.photons.reserve(kept.size() + background.size());
    std::merge(kept.begin(), kept.end(), background.begin(), background.end(), std::back_inserter(out.photons),
               by_time);
    return out;
}

PortOutput combine_at_beamsplitter(std::vector<ArmPhoton> arrivals, const models::HomInterferometer& h, double tau_c,
                                   RandomSource& rng)
{
    h.validate();
    require(tau_c > 0.0, "coherence time must be positive");
    std::stable_sort(arrivals.begin(), arrivals.end(),
                     [](const ArmPhoton& a, const ArmPhoton& b) { return a.arrival < b.arrival; });
    const double window = kCoalescenceWindow * tau_c;
    const std::size_t n = arrivals.size();
    std::vector<std::size_t> partner(n, n);

    PortOutput out;
    for (std::size_t i = 0; i < n; ++i) {
        if (partner[i] != n) continue;
        for (std::size_t j = i + 1; j < n && arrivals[j].arrival - arrivals[i].arrival <= window; ++j) {
            if (partner[j] == n && arrivals[j].input != arrivals[i].input) {
                partner[i] = j;
                partner[j] = i;
                ++out.pairs;
                break;
            }
        }
    }

    auto emit = [&](const ArmPhoton& p, bool to_a) {
        Photon ph = p.photon;
        ph.time = p.arrival;
        (to_a ? out.port_a : out.port_b).push_back(ph);
    };
    // Single photon: input 1 transmits to A, input 2 transmits to B.
    auto route_single = [&](const ArmPhoton& p) {
        const bool transmit = rng.bernoulli(h.t2);
        emit(p, p.input == 1 ? transmit : !transmit);
    };

    for (std::size_t i = 0; i < n; ++i) {
        if (partner[i] == n) {
            route_single(arrivals[i]);
            continue;
        }
        if (partner[i] < i) continue;
        const ArmPhoton& first = arrivals[i];
        const ArmPhoton& second = arrivals[partner[i]];
        const ArmPhoton& in1 = first.input == 1 ? first : second;
        const ArmPhoton& in2 = first.input == 1 ? second : first;
        const double dt = std::abs(second.arrival - first.arrival);
        const double factor =
            h.config == models::Polarization::parallel ? 1.0 - h.v * std::exp(-2.0 * dt / tau_c) : 1.0;
        const double p_ab = h.t2 * h.t2 * factor;  // in1 -> A, in2 -> B
        const double p_ba = h.r2 * h.r2 * factor;  // in1 -> B, in2 -> A
        const double p_same = 0.5 * (1.0 - p_ab - p_ba);
        const double u = rng.uniform();
        bool in1_a = true, in2_a = false;
        if (u < p_ab) {
            in1_a = true, in2_a = false;
        } else if (u < p_ab + p_ba) {
            in1_a = false, in2_a = true;
        } else if (u < p_ab + p_ba + p_same) {
            in1_a = true, in2_a = true;
        } else {
            in1_a = false, in2_a = false;
        }
        emit(in1, in1_a);
        emit(in2, in2_a);
    }
    std::stable_sort(out.port_a.begin(), out.port_a.end(), by_time);
    std::stable_sort(out.port_b.begin(), out.port_b.end(), by_time);
    return out;
}

PortOutput route_hom(std::span<const Photon> photons, const models::HomInterferometer& h, double tau_c,
                     RandomSource rng)
{
    h.validate();
    auto arm_rng = rng.substream(1);
    std::vector<ArmPhoton> arrivals;
    arrivals.reserve(photons.size());
    for (const auto& p : photons) {
        const bool delayed = arm_rng.bernoulli(h.r1);
        arrivals.push_back({p, p.time + (delayed ? h.delta_tau : 0.0), delayed ? 2 : 1});
    }
    auto bs_rng = rng.substream(2);
    return combine_at_beamsplitter(std::move(arrivals), h, tau_c, bs_rng);
}

PortOutput split(std::span<const Photon> photons, double transmission, RandomSource rng)
{
    require(transmission >= 0.0 && transmission <= 1.0, "splitter transmission must lie in [0, 1]");
    PortOutput out;
    for (const auto& p : photons) (rng.bernoulli(transmission) ? out.port_a : out.port_b).push_back(p);
    return out;
}

}  // namespace qfcsim::sim
