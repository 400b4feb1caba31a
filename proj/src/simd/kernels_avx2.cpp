#include "qfcsim/simd.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

namespace qfcsim::simd::avx2 {
namespace {

// int64 -> double for |x| < 2^51: add the bit pattern of 1.5 * 2^52 and
// subtract the same value as a double.
__attribute__((target("avx2"))) inline __m256d small_i64_to_pd(__m256i x)
{
    const __m256i magic_i = _mm256_set1_epi64x(0x4338000000000000LL);
    const __m256d magic_d = _mm256_set1_pd(0x1.8p52);
    return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_add_epi64(x, magic_i)), magic_d);
}

}  // namespace

__attribute__((target("avx2,fma"))) void bin_indices(const std::uint64_t* ticks, std::size_t n, std::uint64_t origin,
                                                     const BinGeometry& g, std::int32_t* out)
{
    const __m256i origin_v = _mm256_set1_epi64x(static_cast<long long>(origin));
    const __m256d scale = _mm256_set1_pd(2.0 * static_cast<double>(g.resolution_fs));
    const __m256d offset = _mm256_set1_pd(static_cast<double>(g.bin_width_fs));
    const __m256d den = _mm256_set1_pd(2.0 * static_cast<double>(g.bin_width_fs));
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256i t = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(ticks + i));
        const __m256d d = small_i64_to_pd(_mm256_sub_epi64(t, origin_v));
        // Both products and sums are integers below 2^53, so fma and div are exact up to the final rounding.
        const __m256d num = _mm256_fmadd_pd(d, scale, offset);
        const __m256d k = _mm256_floor_pd(_mm256_div_pd(num, den));
        _mm_storeu_si128(reinterpret_cast<__m128i*>(out + i), _mm256_cvtpd_epi32(k));
    }
    if (i < n) scalar::bin_indices(ticks + i, n - i, origin, g, out + i);
}

__attribute__((target("avx2,fma"))) double dot(const double* a, const double* b, std::size_t n)
{
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    const __m256d acc = _mm256_add_pd(acc0, acc1);
    const __m128d lo = _mm256_castpd256_pd128(acc);
    const __m128d hi = _mm256_extractf128_pd(acc, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    double sum = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

}  // namespace qfcsim::simd::avx2

#endif
