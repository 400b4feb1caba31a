#include "qfcsim/error.hpp"
#include "qfcsim/simd.hpp"

namespace qfcsim::simd {

BinGeometry::BinGeometry(std::int64_t resolution_fs_, std::int64_t bin_width_fs_, std::int64_t max_delay_ticks_)
    : resolution_fs(resolution_fs_), bin_width_fs(bin_width_fs_), max_delay_ticks(max_delay_ticks_)
{
    require(resolution_fs > 0 && bin_width_fs > 0 && max_delay_ticks >= 0, "bin geometry values must be positive");
    constexpr double kExact = 0x1p53;
    const double span = 2.0 * static_cast<double>(max_delay_ticks) * static_cast<double>(resolution_fs) +
                        static_cast<double>(bin_width_fs);
    require(span < kExact && 2.0 * static_cast<double>(bin_width_fs) < kExact &&
                static_cast<double>(max_delay_ticks) < 0x1p51,
            "correlation window too large for exact binning");
}

namespace scalar {

void bin_indices(const std::uint64_t* ticks, std::size_t n, std::uint64_t origin, const BinGeometry& g,
                 std::int32_t* out)
{
    const std::int64_t den = 2 * g.bin_width_fs;
    for (std::size_t i = 0; i < n; ++i) {
        const auto d = static_cast<std::int64_t>(ticks[i] - origin);
        const std::int64_t num = 2 * d * g.resolution_fs + g.bin_width_fs;
        std::int64_t k = num / den;
        if (num % den != 0 && num < 0) --k;
        out[i] = static_cast<std::int32_t>(k);
    }
}

double dot(const double* a, const double* b, std::size_t n)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

}  // namespace scalar
}  // namespace qfcsim::simd
