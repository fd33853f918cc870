#include "flexgauge/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace flexgauge::kernels::detail {
namespace {

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t p = vmulq_f64(va, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), p));
  }
  for (; i < n; ++i) {
    const double prod = a * x[i];
    y[i] = y[i] + prod;
  }
}

void scale_neon(double a, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

std::size_t max_abs_index_neon(const double* x, std::size_t n) {
  float64x2_t vmax = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vmax = vmaxq_f64(vmax, vabsq_f64(vld1q_f64(x + i)));
  double best_val = std::fmax(vgetq_lane_f64(vmax, 0), vgetq_lane_f64(vmax, 1));
  for (; i < n; ++i) best_val = std::fmax(best_val, std::fabs(x[i]));
  for (std::size_t k = 0; k < n; ++k)
    if (std::fabs(x[k]) == best_val) return k;
  return 0;
}

}  // namespace

const KernelTable neon_table{axpy_neon, scale_neon, dot_neon, max_abs_index_neon};

}  // namespace flexgauge::kernels::detail
