#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qfcsim {

inline constexpr double kDefaultResolution = 4e-12;

struct TimeTag {
    std::uint64_t ticks = 0;
    std::uint8_t channel = 0;

    friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

// Ordering used for every finalized stream: ticks, then channel ascending.
inline bool tag_less(const TimeTag& a, const TimeTag& b) noexcept
{
    return a.ticks < b.ticks || (a.ticks == b.ticks && a.channel < b.channel);
}

/// Multi-channel detection record at a fixed tick resolution.
///
/// A stream is immutable once built. The constructor validates channel indices
/// and the duration bound; it does not sort. Use sort_stream() or merge_streams()
/// to obtain a finalized stream.
class TimeTagStream {
public:
    TimeTagStream() = default;
    TimeTagStream(double resolution, unsigned channel_count, std::vector<TimeTag> tags, double duration);

    /// Empty stream covering [0, duration].
    static TimeTagStream empty(double resolution, unsigned channel_count, double duration);

    double resolution() const noexcept { return resolution_; }
    unsigned channel_count() const noexcept { return channel_count_; }
    double duration() const noexcept { return duration_; }
    std::span<const TimeTag> tags() const noexcept { return tags_; }
    std::size_t size() const noexcept { return tags_.size(); }
    bool empty() const noexcept { return tags_.empty(); }
    bool is_sorted() const noexcept;

    /// Ticks of every tag on one channel, in stream order.
    std::vector<std::uint64_t> channel_ticks(unsigned channel) const;

    friend bool operator==(const TimeTagStream&, const TimeTagStream&) = default;

private:
    double resolution_ = kDefaultResolution;
    unsigned channel_count_ = 1;
    std::vector<TimeTag> tags_;
    double duration_ = 0.0;
};

TimeTagStream sort_stream(const TimeTagStream& s);

/// Sorted union of two streams; channel indices are kept as they are.
TimeTagStream merge_streams(const TimeTagStream& a, const TimeTagStream& b);

/// Converts a time in seconds to ticks. Negative times and values that do not
/// fit in 64 bits are rejected.
std::uint64_t to_ticks(double seconds, double resolution);

}  // namespace qfcsim
