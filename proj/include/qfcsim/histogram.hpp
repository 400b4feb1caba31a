#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qfcsim {

enum class HistogramMode { start_stop, full_autocorrelation, cross_correlation };

std::string to_string(HistogramMode mode);
HistogramMode histogram_mode_from_string(const std::string& text);

/// Binned coincidences. Bin i is centred on (first_index + i) * bin_width and
/// covers [(k - 1/2) w, (k + 1/2) w), so zero delay is always a bin centre.
struct CorrelationHistogram {
    double bin_width = 0.0;
    std::int64_t first_index = 0;
    std::vector<double> counts;
    HistogramMode mode = HistogramMode::full_autocorrelation;
    std::optional<double> normalization;
    std::optional<std::vector<double>> sigma;  // per bin, in normalized units
    double max_delay = 0.0;                   // pair acceptance limit, seconds (0 = unknown)

    std::size_t size() const noexcept { return counts.size(); }
    double delay(std::size_t i) const noexcept
    {
        return static_cast<double>(first_index + static_cast<std::int64_t>(i)) * bin_width;
    }
    /// counts / normalization, or the raw counts when no normalization is set.
    double normalized(std::size_t i) const noexcept { return normalization ? counts[i] / *normalization : counts[i]; }
    /// Index of the bin centred on zero delay, if present.
    std::optional<std::size_t> zero_bin() const noexcept;
    double total() const noexcept;
};

/// Elementwise sum; both histograms must share bin width, mode and index range.
CorrelationHistogram merge_histograms(const CorrelationHistogram& a, const CorrelationHistogram& b);

namespace io {

/// Histogram CSV: "# key=value" metadata lines, then "delay_ns,counts,normalized,sigma".
void write_histogram_csv(std::ostream& out, const CorrelationHistogram& h);
void write_histogram_csv(const std::string& path, const CorrelationHistogram& h);

struct HistogramCsv {
    CorrelationHistogram histogram;
    bool had_sigma_column = false;
};
HistogramCsv read_histogram_csv(std::istream& in);
HistogramCsv read_histogram_csv(const std::string& path);

}  // namespace io
}  // namespace qfcsim
