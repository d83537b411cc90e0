#pragma once
// Dense double-precision inner-loop kernels.
//
// Every kernel has a portable scalar reference implementation plus optional
// vector variants (AVX2+FMA on x86-64, NEON on AArch64). The active table is
// picked once at startup from CPUID and can be forced with the environment
// variable AUTOKG_SIMD=scalar|avx2|neon. Vector variants reassociate sums, so
// they agree with the scalar reference to rounding, not bit-for-bit.

#include <cstddef>
#include <string_view>
#include <vector>

namespace autokg::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

struct KernelTable {
    Isa isa;
    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // x[i] *= alpha
    void (*scal)(double alpha, double* x, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_kernels() noexcept;
#endif
#if defined(__aarch64__)
const KernelTable& neon_kernels() noexcept;
#endif

// Tables usable on this CPU, scalar first.
std::vector<const KernelTable*> available_kernels();

// The dispatched table. Resolved on first use and then fixed for the process.
const KernelTable& active() noexcept;

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline void scal(double alpha, double* x, std::size_t n) { active().scal(alpha, x, n); }

}  // namespace autokg::simd
