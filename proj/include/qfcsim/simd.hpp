#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Data-parallel inner loops with a scalar reference and vectorized variants.
// The active variant is chosen once at runtime from the CPU features; setting
// QFCSIM_SIMD=scalar in the environment forces the reference path.

namespace qfcsim::simd {

enum class Isa { scalar, avx2, neon };

std::string to_string(Isa isa);

/// Integer description of the delay-to-bin map
///   k = floor((2 d r + w) / (2 w))
/// with d the signed tick difference, r the tick length and w the bin width,
/// both in femtoseconds. Bin k then covers [(k - 1/2) w, (k + 1/2) w).
struct BinGeometry {
    std::int64_t resolution_fs = 0;
    std::int64_t bin_width_fs = 0;
    std::int64_t max_delay_ticks = 0;  // |d| accepted by callers

    BinGeometry() = default;
    /// Rejects geometries whose intermediate values are not exact in a double.
    BinGeometry(std::int64_t resolution_fs, std::int64_t bin_width_fs, std::int64_t max_delay_ticks);
};

/// out[i] = bin index of (ticks[i] - origin). Every |ticks[i] - origin| must be
/// at most g.max_delay_ticks.
using BinIndexFn = void (*)(const std::uint64_t* ticks, std::size_t n, std::uint64_t origin, const BinGeometry& g,
                            std::int32_t* out);
using DotFn = double (*)(const double* a, const double* b, std::size_t n);

struct KernelTable {
    Isa isa;
    BinIndexFn bin_indices;
    DotFn dot;
};

/// ISAs usable on this machine, scalar first.
std::vector<Isa> available_isas();
const KernelTable& kernels_for(Isa isa);
/// Kernels selected at startup.
const KernelTable& active_kernels();

namespace scalar {
void bin_indices(const std::uint64_t* ticks, std::size_t n, std::uint64_t origin, const BinGeometry& g,
                 std::int32_t* out);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(__i386__)
namespace avx2 {
void bin_indices(const std::uint64_t* ticks, std::size_t n, std::uint64_t origin, const BinGeometry& g,
                 std::int32_t* out);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void bin_indices(const std::uint64_t* ticks, std::size_t n, std::uint64_t origin, const BinGeometry& g,
                 std::int32_t* out);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace neon
#endif

}  // namespace qfcsim::simd
