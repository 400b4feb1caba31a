#include <algorithm>
#include <cmath>
#include <map>

#include "qfcsim/correlate.hpp"
#include "qfcsim/error.hpp"

namespace qfcsim::corr {
namespace {

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& v)
{
    MeanStd r;
    if (v.empty()) return r;
    for (double x : v) r.mean += x;
    r.mean /= static_cast<double>(v.size());
    if (v.size() < 2) return r;
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return r;
}

}  // namespace

CorrelationHistogram normalize_cw(const CorrelationHistogram& h, double norm_window_start)
{
    require(std::isfinite(norm_window_start) && norm_window_start >= 0.0,
            "normalization window start must be non-negative");
    std::vector<double> plateau;
    std::size_t negative = 0, positive = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double d = h.delay(i);
        if (std::abs(d) <= norm_window_start * (1.0 + 1e-12)) continue;
        // Edge bins only partly inside the acceptance window are biased low.
        if (h.max_delay > 0.0 && std::abs(d) + 0.5 * h.bin_width > h.max_delay * (1.0 + 1e-12)) continue;
        plateau.push_back(h.counts[i]);
        (d < 0.0 ? negative : positive) += 1;
    }
    if (plateau.size() < 10)
        throw DataError("only " + std::to_string(plateau.size()) + " plateau bins beyond " +
                        std::to_string(norm_window_start * 1e9) + " ns; at least 10 are needed");
    if (h.mode != HistogramMode::start_stop && (negative == 0 || positive == 0))
        throw DataError("plateau must extend beyond the normalization window on both sides");
    const auto stats = mean_std(plateau);
    if (!(stats.mean > 0.0)) throw DataError("plateau mean is zero; cannot normalize");

    CorrelationHistogram out = h;
    out.normalization = stats.mean;
    out.sigma = std::vector<double>(h.size(), stats.stddev / stats.mean);
    return out;
}

PulsedG2 pulsed_g2_zero(const CorrelationHistogram& h, double rep_period)
{
    require(std::isfinite(rep_period) && rep_period > 0.0, "repetition period must be positive");
    require(h.size() > 0 && h.bin_width > 0.0, "histogram is empty");
    const double lo_edge = h.delay(0) - 0.5 * h.bin_width;
    const double hi_edge = h.delay(h.size() - 1) + 0.5 * h.bin_width;
    std::map<long long, double> areas;
    for (std::size_t i = 0; i < h.size(); ++i)
        areas[std::llround(h.delay(i) / rep_period)] += h.counts[i];

    PulsedG2 r;
    std::vector<double> side;
    const double tol = 1e-9 * rep_period;
    for (const auto& [m, area] : areas) {
        const double start = (static_cast<double>(m) - 0.5) * rep_period;
        const double end = (static_cast<double>(m) + 0.5) * rep_period;
        if (start < lo_edge - tol || end > hi_edge + tol) continue;
        if (m == 0) r.center_area = area;
        else side.push_back(area);
    }
    if (side.size() < 4)
        throw DataError("pulsed g2(0) needs at least 4 complete side peaks, found " + std::to_string(side.size()));
    const auto stats = mean_std(side);
    if (!(stats.mean > 0.0)) throw DataError("side peaks are empty");
    r.side_peaks = side.size();
    r.side_mean = stats.mean;
    r.g2_0 = r.center_area / stats.mean;
    r.sigma = stats.stddev / stats.mean;
    return r;
}

FlankAsymmetry flank_asymmetry(const CorrelationHistogram& normalized, double window)
{
    require(normalized.normalization.has_value(), "flank asymmetry needs a normalized histogram");
    FlankAsymmetry r;
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        const double d = normalized.delay(i);
        if (d == 0.0 || std::abs(d) > window) continue;
        // Absolute deviation: cascade bunching next to the dip would otherwise
        // cancel part of the dip area.
        const double area = std::abs(1.0 - normalized.normalized(i)) * normalized.bin_width;
        (d < 0.0 ? r.left_area : r.right_area) += area;
    }
    const double mean = 0.5 * (r.left_area + r.right_area);
    r.relative_difference = mean > 0.0 ? std::abs(r.left_area - r.right_area) / mean : 0.0;
    return r;
}

double g2_at_zero(const CorrelationHistogram& normalized)
{
    const auto zero = normalized.zero_bin();
    require(zero.has_value(), "histogram has no zero-delay bin");
    return normalized.normalized(*zero);
}

}  // namespace qfcsim::corr
