#include <algorithm>
#include <cmath>

#include "qfcsim/error.hpp"
#include "qfcsim/simulate.hpp"

namespace qfcsim::sim {

void DetectorSpec::validate() const
{
    require(std::isfinite(efficiency) && efficiency >= 0.0 && efficiency <= 1.0,
            "detector efficiency must lie in [0, 1]");
    require(std::isfinite(jitter_fwhm) && jitter_fwhm >= 0.0, "detector jitter must be non-negative");
    require(std::isfinite(dark_rate) && dark_rate >= 0.0, "dark rate must be non-negative");
    require(std::isfinite(dead_time) && dead_time >= 0.0, "dead time must be non-negative");
}

DetectionResult detect(std::span<const Photon> photons, const DetectorSpec& d, unsigned channel, double duration,
                       RandomSource rng, double resolution)
{
    d.validate();
    require(channel < 256, "detector channel must be below 256");
    require(std::isfinite(duration) && duration >= 0.0, "duration must be non-negative");
    DetectorCounts counts;
    counts.input = photons.size();

    auto thin = rng.substream(1);
    auto jitter = rng.substream(2);
    const double sigma = d.jitter_fwhm / models::kFwhmPerSigma;
    std::vector<double> clicks;
    clicks.reserve(photons.size());
    for (const auto& p : photons) {
        if (!thin.bernoulli(d.efficiency)) {
            ++counts.efficiency_dropped;
            continue;
        }
        const double t = sigma > 0.0 ? p.time + jitter.normal(0.0, sigma) : p.time;
        if (t < 0.0 || t > duration) {
            ++counts.out_of_window;
            continue;
        }
        clicks.push_back(t);
    }
    auto dark_rng = rng.substream(3);
    const auto dark = poisson_photons(d.dark_rate, duration, Origin::emitter, dark_rng);
    counts.dark_added = dark.size();
    for (const auto& p : dark) clicks.push_back(p.time);
    std::sort(clicks.begin(), clicks.end());

    std::vector<TimeTag> tags;
    tags.reserve(clicks.size());
    double last_accepted = -INFINITY;
    for (double t : clicks) {
        if (t - last_accepted < d.dead_time) {
            ++counts.dead_time_dropped;
            continue;
        }
        last_accepted = t;
        tags.push_back({to_ticks(t, resolution), static_cast<std::uint8_t>(channel)});
    }
    counts.detected = tags.size();
    return {TimeTagStream(resolution, channel + 1, std::move(tags), duration), counts};
}

}  // namespace qfcsim::sim
