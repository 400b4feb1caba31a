#pragma once

#include <optional>

#include "qfcsim/histogram.hpp"
#include "qfcsim/simd.hpp"
#include "qfcsim/time_tag.hpp"

namespace qfcsim::corr {

enum class CorrelationMode { start_stop, full };

struct CorrelationRequest {
    unsigned channel_a = 0;
    unsigned channel_b = 1;
    CorrelationMode mode = CorrelationMode::full;
    double bin_width = 256e-12;
    double max_delay = 1e-6;

    void validate() const;
};

struct CorrelateOptions {
    unsigned threads = 1;
    /// Kernel table to use; the runtime-selected one when empty.
    std::optional<simd::Isa> isa;
};

/// Pair histogram of channel_b relative to channel_a (positive delay: b after a).
///
/// Full mode counts every ordered pair with |t_b - t_a| <= max_delay, excluding
/// a tag paired with itself when a == b. Start-stop mode pairs each start with
/// the first stop at or after it. Counts are exact integers and do not depend
/// on the thread count or the kernel variant.
CorrelationHistogram correlate(const TimeTagStream& stream, const CorrelationRequest& req,
                               const CorrelateOptions& options = {});

/// O(n^2) reference used to validate correlate().
CorrelationHistogram brute_force_correlate(const TimeTagStream& stream, const CorrelationRequest& req);

/// Divides by the mean of the plateau bins (|delay| > norm_window_start, fully
/// inside the pair acceptance window). Every bin receives the plateau's
/// relative standard deviation as its sigma.
CorrelationHistogram normalize_cw(const CorrelationHistogram& h, double norm_window_start = 500e-9);

struct PulsedG2 {
    double g2_0 = 0.0;
    double sigma = 0.0;
    double center_area = 0.0;
    double side_mean = 0.0;
    std::size_t side_peaks = 0;
};

/// Centre-peak area over the mean side-peak area. Peak windows are one period
/// wide and centred on multiples of rep_period; only side peaks fully covered
/// by the histogram are used.
PulsedG2 pulsed_g2_zero(const CorrelationHistogram& h, double rep_period);

struct FlankAsymmetry {
    double left_area = 0.0;   // integral of |1 - g2| over -window <= tau < 0
    double right_area = 0.0;  // integral of |1 - g2| over 0 < tau <= window
    /// |left - right| / ((left + right) / 2)
    double relative_difference = 0.0;
};

/// Flank areas of a normalized dip, zero-delay bin excluded.
FlankAsymmetry flank_asymmetry(const CorrelationHistogram& normalized, double window);

/// Normalized value of the zero-delay bin.
double g2_at_zero(const CorrelationHistogram& normalized);

}  // namespace qfcsim::corr
