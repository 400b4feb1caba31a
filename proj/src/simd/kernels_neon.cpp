#include "qfcsim/simd.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace qfcsim::simd::neon {

void bin_indices(const std::uint64_t* ticks, std::size_t n, std::uint64_t origin, const BinGeometry& g,
                 std::int32_t* out)
{
    const uint64x2_t origin_v = vdupq_n_u64(origin);
    const float64x2_t scale = vdupq_n_f64(2.0 * static_cast<double>(g.resolution_fs));
    const float64x2_t offset = vdupq_n_f64(static_cast<double>(g.bin_width_fs));
    const float64x2_t den = vdupq_n_f64(2.0 * static_cast<double>(g.bin_width_fs));
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const int64x2_t d = vreinterpretq_s64_u64(vsubq_u64(vld1q_u64(ticks + i), origin_v));
        const float64x2_t num = vfmaq_f64(offset, vcvtq_f64_s64(d), scale);
        const float64x2_t k = vrndmq_f64(vdivq_f64(num, den));
        vst1_s32(out + i, vmovn_s64(vcvtq_s64_f64(k)));
    }
    if (i < n) scalar::bin_indices(ticks + i, n - i, origin, g, out + i);
}

double dot(const double* a, const double* b, std::size_t n)
{
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) sum += a[i] * b[i];
    return sum;
}

}  // namespace qfcsim::simd::neon

#endif
