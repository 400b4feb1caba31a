#include "qfcsim/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qfcsim/error.hpp"

namespace qfcsim {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), key_(mix64(mix64(seed ^ 0x6a09e667f3bcc908ULL) + stream_id * kGolden))
{
}

RandomSource RandomSource::substream(std::uint64_t child) const
{
    return RandomSource(seed_, mix64(stream_id_ + 0x3c6ef372fe94f82bULL) ^ child);
}

std::uint64_t RandomSource::next_u64() noexcept
{
    // Two finalizer rounds so that neighbouring keys do not give correlated outputs.
    return mix64(mix64(key_ + (++counter_) * kGolden) ^ key_);
}

double RandomSource::uniform() noexcept
{
    return static_cast<double>(next_u64() >> 11) * 0x1p-53;
}

double RandomSource::uniform_open_zero() noexcept
{
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1p-53;
}

double RandomSource::exponential(double mean) noexcept
{
    return -mean * std::log(uniform_open_zero());
}

double RandomSource::normal(double mean, double sigma) noexcept
{
    if (has_spare_normal_) {
        has_spare_normal_ = false;
        return mean + sigma * spare_normal_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open_zero()));
    const double phi = 2.0 * std::numbers::pi * uniform();
    spare_normal_ = r * std::sin(phi);
    has_spare_normal_ = true;
    return mean + sigma * r * std::cos(phi);
}

bool RandomSource::bernoulli(double p) noexcept
{
    return uniform() < p;
}

std::uint64_t RandomSource::poisson(double mean)
{
    require(std::isfinite(mean) && mean >= 0.0, "Poisson mean must be finite and non-negative");
    // Knuth's product method on chunks of at most 30 keeps exp(-chunk) well away from underflow.
    std::uint64_t total = 0;
    while (mean > 0.0) {
        const double chunk = std::min(mean, 30.0);
        mean -= chunk;
        const double limit = std::exp(-chunk);
        double product = uniform_open_zero();
        while (product > limit) {
            ++total;
            product *= uniform_open_zero();
        }
    }
    return total;
}

}  // namespace qfcsim
