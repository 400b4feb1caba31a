#include <cstdlib>
#include <string_view>

#include "qfcsim/error.hpp"
#include "qfcsim/simd.hpp"

namespace qfcsim::simd {
namespace {

constexpr KernelTable kScalar{Isa::scalar, &scalar::bin_indices, &scalar::dot};
#if defined(__x86_64__) || defined(__i386__)
constexpr KernelTable kAvx2{Isa::avx2, &avx2::bin_indices, &avx2::dot};
#endif
#if defined(__aarch64__)
constexpr KernelTable kNeon{Isa::neon, &neon::bin_indices, &neon::dot};
#endif

bool cpu_supports(Isa isa)
{
    switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(__x86_64__) || defined(__i386__)
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
        return true;
#else
        return false;
#endif
    }
    return false;
}

const KernelTable& select()
{
    if (const char* forced = std::getenv("QFCSIM_SIMD"); forced && std::string_view(forced) == "scalar")
        return kScalar;
    const auto isas = available_isas();
    return kernels_for(isas.back());
}

}  // namespace

std::string to_string(Isa isa)
{
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
    }
    return "unknown";
}

std::vector<Isa> available_isas()
{
    std::vector<Isa> out;
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
        if (cpu_supports(isa)) out.push_back(isa);
    return out;
}

const KernelTable& kernels_for(Isa isa)
{
    require(cpu_supports(isa), "instruction set " + to_string(isa) + " is not available on this CPU");
    switch (isa) {
#if defined(__x86_64__) || defined(__i386__)
    case Isa::avx2: return kAvx2;
#endif
#if defined(__aarch64__)
    case Isa::neon: return kNeon;
#endif
    default: return kScalar;
    }
}

const KernelTable& active_kernels()
{
    static const KernelTable& table = select();
    return table;
}

}  // namespace qfcsim::simd
