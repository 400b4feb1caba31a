#pragma once

#include <cstdint>

namespace qfcsim {

/// Counter-based random source.
///
/// Sample k of a source is a pure function of (seed, stream_id, k): a keyed
/// SplitMix64 finalizer applied to the counter. Two sources with equal
/// (seed, stream_id) therefore produce the same sequence on any platform,
/// and independent sub-sources are obtained with substream().
class RandomSource {
public:
    RandomSource(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    std::uint64_t counter() const noexcept { return counter_; }

    /// Independent source keyed by the same seed and a derived stream id.
    RandomSource substream(std::uint64_t child) const;

    std::uint64_t next_u64() noexcept;
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform in (0, 1].
    double uniform_open_zero() noexcept;
    double exponential(double mean) noexcept;
    double normal(double mean, double sigma) noexcept;
    bool bernoulli(double p) noexcept;
    std::uint64_t poisson(double mean);

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace qfcsim
