#include "flexgauge/kernels.hpp"

#include <cmath>

namespace flexgauge::kernels::detail {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double prod = a * x[i];
    y[i] = y[i] + prod;
  }
}

void scale_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

std::size_t max_abs_index_scalar(const double* x, std::size_t n) {
  std::size_t best = 0;
  double best_val = std::fabs(x[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const double v = std::fabs(x[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

}  // namespace

const KernelTable scalar_table{axpy_scalar, scale_scalar, dot_scalar, max_abs_index_scalar};

}  // namespace flexgauge::kernels::detail
