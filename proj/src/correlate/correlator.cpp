#include <algorithm>
#include <cmath>
#include <thread>

#include "qfcsim/correlate.hpp"
#include "qfcsim/error.hpp"

namespace qfcsim::corr {
namespace {

std::int64_t whole_femtoseconds(double seconds, const char* what)
{
    const double fs = seconds * 1e15;
    const double rounded = std::round(fs);
    if (!(rounded >= 1.0) || rounded > 0x1p52 || std::abs(fs - rounded) > 1e-6 * rounded)
        throw InvalidArgument(std::string(what) + " must be a positive whole number of femtoseconds");
    return static_cast<std::int64_t>(rounded);
}

struct Layout {
    simd::BinGeometry geometry;
    std::int64_t first_index = 0;
    std::size_t bins = 0;
};

Layout layout_for(const TimeTagStream& stream, const CorrelationRequest& req)
{
    const auto res_fs = whole_femtoseconds(stream.resolution(), "stream resolution");
    const auto bin_fs = whole_femtoseconds(req.bin_width, "bin width");
    const auto max_fs = static_cast<std::int64_t>(std::llround(req.max_delay * 1e15));
    const auto max_ticks = max_fs / res_fs;
    Layout l;
    l.geometry = simd::BinGeometry(res_fs, bin_fs, max_ticks);
    std::int32_t last = 0;
    simd::scalar::bin_indices(reinterpret_cast<const std::uint64_t*>(&max_ticks), 1, 0, l.geometry, &last);
    l.first_index = req.mode == CorrelationMode::full ? -static_cast<std::int64_t>(last) : 0;
    l.bins = static_cast<std::size_t>(last - l.first_index + 1);
    return l;
}

CorrelationHistogram empty_histogram(const CorrelationRequest& req, const Layout& l, bool auto_corr)
{
    CorrelationHistogram h;
    h.bin_width = req.bin_width;
    h.first_index = l.first_index;
    h.counts.assign(l.bins, 0.0);
    h.max_delay = req.max_delay;
    if (req.mode == CorrelationMode::start_stop) h.mode = HistogramMode::start_stop;
    else h.mode = auto_corr ? HistogramMode::full_autocorrelation : HistogramMode::cross_correlation;
    return h;
}

// Full-mode pairs for starts a[begin, end). Self pairs are skipped when a and b
// are the same array.
void full_pairs(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, bool same, std::size_t begin,
                std::size_t end, const Layout& l, const simd::KernelTable& k, std::vector<std::uint64_t>& hist)
{
    const auto max = static_cast<std::uint64_t>(l.geometry.max_delay_ticks);
    std::vector<std::int32_t> idx;
    if (begin >= end) return;
    const std::uint64_t t0 = a[begin];
    std::size_t lo = std::lower_bound(b.begin(), b.end(), t0 >= max ? t0 - max : 0) - b.begin();
    std::size_t hi = lo;
    auto accumulate = [&](std::size_t from, std::size_t to, std::uint64_t origin) {
        if (from >= to) return;
        idx.resize(to - from);
        k.bin_indices(b.data() + from, to - from, origin, l.geometry, idx.data());
        for (auto bin : idx) ++hist[static_cast<std::size_t>(bin - l.first_index)];
    };
    for (std::size_t i = begin; i < end; ++i) {
        const std::uint64_t t = a[i];
        while (lo < b.size() && b[lo] + max < t) ++lo;
        if (hi < lo) hi = lo;
        while (hi < b.size() && b[hi] <= t + max) ++hi;
        if (same) {
            accumulate(lo, i, t);
            accumulate(i + 1, hi, t);
        } else {
            accumulate(lo, hi, t);
        }
    }
}

void start_stop_pairs(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, bool same,
                      std::size_t begin, std::size_t end, const Layout& l, const simd::KernelTable& k,
                      std::vector<std::uint64_t>& hist)
{
    const auto max = static_cast<std::uint64_t>(l.geometry.max_delay_ticks);
    if (begin >= end) return;
    std::size_t stop = same ? begin + 1 : std::lower_bound(b.begin(), b.end(), a[begin]) - b.begin();
    for (std::size_t i = begin; i < end; ++i) {
        const std::uint64_t t = a[i];
        if (same) stop = i + 1;
        else
            while (stop < b.size() && b[stop] < t) ++stop;
        if (stop >= b.size() || b[stop] - t > max) continue;
        std::int32_t bin = 0;
        k.bin_indices(b.data() + stop, 1, t, l.geometry, &bin);
        ++hist[static_cast<std::size_t>(bin - l.first_index)];
    }
}

}  // namespace

void CorrelationRequest::validate() const
{
    require(std::isfinite(bin_width) && bin_width > 0.0, "bin width must be positive");
    require(std::isfinite(max_delay) && max_delay >= bin_width, "max delay must be at least one bin width");
    require(channel_a < 256 && channel_b < 256, "channels must be below 256");
}

CorrelationHistogram correlate(const TimeTagStream& stream, const CorrelationRequest& req,
                               const CorrelateOptions& options)
{
    req.validate();
    if (req.channel_a >= stream.channel_count() || req.channel_b >= stream.channel_count())
        throw InvalidArgument("unknown channel: stream has " + std::to_string(stream.channel_count()) + " channels");
    require(stream.is_sorted(), "correlate needs a sorted stream");
    const Layout l = layout_for(stream, req);
    const bool same = req.channel_a == req.channel_b;
    auto h = empty_histogram(req, l, same);
    const auto& kernels = options.isa ? simd::kernels_for(*options.isa) : simd::active_kernels();

    const auto a = stream.channel_ticks(req.channel_a);
    const auto b = same ? std::vector<std::uint64_t>{} : stream.channel_ticks(req.channel_b);
    std::span<const std::uint64_t> bs = same ? std::span<const std::uint64_t>(a) : std::span<const std::uint64_t>(b);
    auto run = req.mode == CorrelationMode::full ? &full_pairs : &start_stop_pairs;

    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(a.size() / 1024 + 1)));
    std::vector<std::vector<std::uint64_t>> partial(threads, std::vector<std::uint64_t>(l.bins, 0));
    if (threads == 1) {
        run(a, bs, same, 0, a.size(), l, kernels, partial[0]);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (a.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = std::min(a.size(), t * chunk);
            const std::size_t end = std::min(a.size(), begin + chunk);
            pool.emplace_back([&, t, begin, end] { run(a, bs, same, begin, end, l, kernels, partial[t]); });
        }
        for (auto& th : pool) th.join();
    }
    for (const auto& p : partial)
        for (std::size_t i = 0; i < l.bins; ++i) h.counts[i] += static_cast<double>(p[i]);
    return h;
}

CorrelationHistogram brute_force_correlate(const TimeTagStream& stream, const CorrelationRequest& req)
{
    req.validate();
    if (req.channel_a >= stream.channel_count() || req.channel_b >= stream.channel_count())
        throw InvalidArgument("unknown channel");
    const Layout l = layout_for(stream, req);
    const bool same = req.channel_a == req.channel_b;
    auto h = empty_histogram(req, l, same);
    const auto tags = stream.tags();
    const __int128 res = l.geometry.resolution_fs;
    const __int128 w = l.geometry.bin_width_fs;
    const __int128 max_fs = static_cast<__int128>(l.geometry.max_delay_ticks) * res;
    auto bin_of = [&](__int128 d) {
        // floor((d r + w/2) / w) without rounding: compare in doubled units.
        const __int128 num = 2 * d * res + w;
        const __int128 den = 2 * w;
        __int128 k = num / den;
        if (num % den != 0 && num < 0) --k;
        return static_cast<std::int64_t>(k);
    };
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (tags[i].channel != req.channel_a) continue;
        std::optional<std::size_t> first_stop;
        for (std::size_t j = 0; j < tags.size(); ++j) {
            if (tags[j].channel != req.channel_b || i == j) continue;
            const __int128 d = static_cast<__int128>(tags[j].ticks) - static_cast<__int128>(tags[i].ticks);
            if (req.mode == CorrelationMode::full) {
                if ((d < 0 ? -d : d) * res <= max_fs) h.counts[static_cast<std::size_t>(bin_of(d) - l.first_index)] += 1;
            } else if (d >= 0 && (same ? j > i : true)) {
                if (!first_stop || tags[j].ticks < tags[*first_stop].ticks ||
                    (tags[j].ticks == tags[*first_stop].ticks && j < *first_stop))
                    first_stop = j;
            }
        }
        if (first_stop) {
            const __int128 d = static_cast<__int128>(tags[*first_stop].ticks) - static_cast<__int128>(tags[i].ticks);
            if (d * res <= max_fs) h.counts[static_cast<std::size_t>(bin_of(d) - l.first_index)] += 1;
        }
    }
    return h;
}

}  // namespace qfcsim::corr
