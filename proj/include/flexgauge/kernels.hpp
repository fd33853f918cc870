#pragma once

// Dense vector kernels used by the simplex tableau updates.
//
// Every kernel has a scalar reference implementation; SIMD variants are
// selected once at startup from the instruction sets the CPU reports. The
// element-wise kernels (axpy, scale) are bit-identical across variants
// because they use separate multiply and add instructions. Reductions (dot,
// max_abs_index) may differ from the scalar result in the last few ulps for
// dot, and are exact for max_abs_index.

#include <cstddef>
#include <span>
#include <string_view>

namespace flexgauge::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // x[i] *= a
  void (*scale)(double a, double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // Index of the first element with the largest |x[i]|; n must be > 0.
  std::size_t (*max_abs_index)(const double* x, std::size_t n);
};

const KernelTable& table(Isa isa);
bool supported(Isa isa);

// Kernels in use. Defaults to the widest supported ISA; the environment
// variable FLEXGAUGE_ISA=scalar|avx2|neon overrides it.
const KernelTable& active();
Isa active_isa();
// Forces a variant (tests and benchmarking). Returns false if unsupported.
bool set_active(Isa isa);

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline void scale(double a, std::span<double> x) { active().scale(a, x.data(), x.size()); }
inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

namespace detail {
extern const KernelTable scalar_table;
#if defined(FLEXGAUGE_HAVE_AVX2)
extern const KernelTable avx2_table;
#endif
#if defined(FLEXGAUGE_HAVE_NEON)
extern const KernelTable neon_table;
#endif
}  // namespace detail

}  // namespace flexgauge::kernels
