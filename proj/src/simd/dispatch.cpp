#include <cstdlib>
#include <string>

#include "autokg/simd.hpp"

namespace autokg::simd {
namespace {

bool cpu_has_avx2() {
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& select() {
    const char* forced = std::getenv("AUTOKG_SIMD");
    std::string want = forced ? forced : "";
    if (want == "scalar") return scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
    if ((want.empty() || want == "avx2") && cpu_has_avx2()) return avx2_kernels();
#endif
#if defined(__aarch64__)
    if (want.empty() || want == "neon") return neon_kernels();
#endif
    return scalar_kernels();
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "unknown";
}

std::vector<const KernelTable*> available_kernels() {
    std::vector<const KernelTable*> out{&scalar_kernels()};
#if defined(__x86_64__) || defined(_M_X64)
    if (cpu_has_avx2()) out.push_back(&avx2_kernels());
#endif
#if defined(__aarch64__)
    out.push_back(&neon_kernels());
#endif
    return out;
}

const KernelTable& active() noexcept {
    static const KernelTable& table = select();
    return table;
}

}  // namespace autokg::simd
