#include "qfcsim/time_tag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "qfcsim/error.hpp"

namespace qfcsim {

TimeTagStream::TimeTagStream(double resolution, unsigned channel_count, std::vector<TimeTag> tags, double duration)
    : resolution_(resolution), channel_count_(channel_count), tags_(std::move(tags)), duration_(duration)
{
    require(std::isfinite(resolution) && resolution > 0.0, "stream resolution must be positive");
    require(channel_count >= 1 && channel_count <= 256, "stream channel count must be in [1, 256]");
    require(std::isfinite(duration) && duration >= 0.0, "stream duration must be non-negative");
    require(duration / resolution < 0x1p64, "stream duration overflows 64-bit ticks");
    std::uint64_t last = 0;
    for (const auto& t : tags_) {
        if (t.channel >= channel_count_)
            throw InvalidArgument("tag channel " + std::to_string(t.channel) + " >= channel count " +
                                  std::to_string(channel_count_));
        last = std::max(last, t.ticks);
    }
    if (!tags_.empty() && static_cast<double>(last) * resolution_ > duration_ * (1.0 + 1e-12))
        duration_ = static_cast<double>(last) * resolution_;
}

TimeTagStream TimeTagStream::empty(double resolution, unsigned channel_count, double duration)
{
    return TimeTagStream(resolution, channel_count, {}, duration);
}

bool TimeTagStream::is_sorted() const noexcept
{
    return std::is_sorted(tags_.begin(), tags_.end(), tag_less);
}

std::vector<std::uint64_t> TimeTagStream::channel_ticks(unsigned channel) const
{
    std::vector<std::uint64_t> out;
    for (const auto& t : tags_)
        if (t.channel == channel) out.push_back(t.ticks);
    return out;
}

TimeTagStream sort_stream(const TimeTagStream& s)
{
    std::vector<TimeTag> tags(s.tags().begin(), s.tags().end());
    std::stable_sort(tags.begin(), tags.end(), tag_less);
    return TimeTagStream(s.resolution(), s.channel_count(), std::move(tags), s.duration());
}

TimeTagStream merge_streams(const TimeTagStream& a, const TimeTagStream& b)
{
    if (a.resolution() != b.resolution())
    {
        std::ostringstream msg;
        msg << "cannot merge streams with different resolutions (" << a.resolution() << " s vs " << b.resolution()
            << " s)";
        throw InvalidArgument(msg.str());
    }
    const auto sa = a.is_sorted() ? a : sort_stream(a);
    const auto sb = b.is_sorted() ? b : sort_stream(b);
    std::vector<TimeTag> tags;
    tags.reserve(sa.size() + sb.size());
    std::merge(sa.tags().begin(), sa.tags().end(), sb.tags().begin(), sb.tags().end(), std::back_inserter(tags),
               tag_less);
    return TimeTagStream(a.resolution(), std::max(a.channel_count(), b.channel_count()), std::move(tags),
                         std::max(a.duration(), b.duration()));
}

std::uint64_t to_ticks(double seconds, double resolution)
{
    require(std::isfinite(seconds) && seconds >= 0.0, "time must be finite and non-negative");
    const double ticks = std::floor(seconds / resolution);
    require(ticks < 0x1p64, "time overflows 64-bit ticks");
    return static_cast<std::uint64_t>(ticks);
}

}  // namespace qfcsim
