#include <doctest.h>

#include <cstdlib>
#include <vector>

#include "qfcsim/random.hpp"
#include "qfcsim/simd.hpp"

using namespace qfcsim;
using namespace qfcsim::simd;

namespace {

// Exact reference: floor((2 d r + w) / (2 w)) in 128-bit integers.
std::int32_t oracle_bin(std::int64_t d, const BinGeometry& g)
{
    const __int128 num = 2 * static_cast<__int128>(d) * g.resolution_fs + g.bin_width_fs;
    const __int128 den = 2 * static_cast<__int128>(g.bin_width_fs);
    __int128 k = num / den;
    if (num % den != 0 && num < 0) --k;
    return static_cast<std::int32_t>(k);
}

}  // namespace

TEST_CASE("scalar kernel is listed first and active kernels are available")
{
    const auto isas = available_isas();
    REQUIRE(!isas.empty());
    CHECK(isas.front() == Isa::scalar);
    bool found = false;
    for (auto isa : isas) found = found || isa == active_kernels().isa;
    CHECK(found);
}

TEST_CASE("bin geometry rejects inexact configurations")
{
    CHECK_THROWS(BinGeometry(0, 256000, 100));
    CHECK_THROWS(BinGeometry(4000, 0, 100));
    CHECK_THROWS(BinGeometry(4000, 256000, std::int64_t{1} << 50));
    CHECK_NOTHROW(BinGeometry(4000, 256000, 250000000));
}

TEST_CASE("every bin-index kernel matches the integer oracle")
{
    const BinGeometry geometries[] = {
        {4000, 256000, 250000},     // 4 ps ticks, 256 ps bins, 1 us
        {1000, 125000, 1000000},    // 1 ps ticks, 125 ps bins
        {4000, 250000, 250000},     // bin not a multiple of the tick
        {3, 7, 1000},               // odd sizes, exact half-bin ties
    };
    RandomSource rng(99, 0);
    for (const auto& g : geometries) {
        const std::uint64_t origin = 1'000'000'000'000ull;
        std::vector<std::uint64_t> ticks;
        // Exact bin edges in both directions, plus random offsets.
        for (std::int64_t d = -40; d <= 40; ++d) ticks.push_back(origin + d);
        for (std::int64_t k = -5; k <= 5; ++k) {
            const std::int64_t edge = (2 * k - 1) * g.bin_width_fs;  // 2 d r = (2k - 1) w
            if (edge % (2 * g.resolution_fs) == 0) {
                const std::int64_t d = edge / (2 * g.resolution_fs);
                if (std::llabs(d) <= g.max_delay_ticks) {
                    ticks.push_back(origin + d);
                    ticks.push_back(origin + d - 1);
                }
            }
        }
        ticks.push_back(origin + g.max_delay_ticks);
        ticks.push_back(origin - g.max_delay_ticks);
        for (int i = 0; i < 5000; ++i) {
            const auto span = static_cast<std::uint64_t>(2 * g.max_delay_ticks + 1);
            ticks.push_back(origin - g.max_delay_ticks + rng.next_u64() % span);
        }
        std::vector<std::int32_t> expected(ticks.size());
        for (std::size_t i = 0; i < ticks.size(); ++i)
            expected[i] = oracle_bin(static_cast<std::int64_t>(ticks[i] - origin), g);
        for (auto isa : available_isas()) {
            CAPTURE(to_string(isa));
            // Odd lengths exercise the vector tail.
            for (std::size_t n : {ticks.size(), ticks.size() - 1, std::size_t{3}, std::size_t{0}}) {
                std::vector<std::int32_t> got(n, 12345);
                kernels_for(isa).bin_indices(ticks.data(), n, origin, g, got.data());
                CHECK(std::equal(got.begin(), got.end(), expected.begin()));
            }
        }
    }
}

TEST_CASE("dot kernels agree with the scalar reference")
{
    RandomSource rng(5, 1);
    for (std::size_t n : {0, 1, 3, 4, 7, 8, 9, 255, 1001}) {
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.uniform() - 0.5;
            b[i] = rng.uniform();
        }
        long double exact = 0;
        for (std::size_t i = 0; i < n; ++i) exact += static_cast<long double>(a[i]) * b[i];
        for (auto isa : available_isas()) {
            CAPTURE(to_string(isa));
            CAPTURE(n);
            const double got = kernels_for(isa).dot(a.data(), b.data(), n);
            CHECK(std::abs(got - static_cast<double>(exact)) <= 1e-14 * (1.0 + static_cast<double>(n)));
        }
    }
}
