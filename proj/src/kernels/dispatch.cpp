#include "flexgauge/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace flexgauge::kernels {
namespace {

Isa widest_supported() {
  if (supported(Isa::avx2)) return Isa::avx2;
  if (supported(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa initial_isa() {
  if (const char* env = std::getenv("FLEXGAUGE_ISA")) {
    const std::string want(env);
    if (want == "scalar") return Isa::scalar;
    if (want == "avx2" && supported(Isa::avx2)) return Isa::avx2;
    if (want == "neon" && supported(Isa::neon)) return Isa::neon;
  }
  return widest_supported();
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(FLEXGAUGE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(FLEXGAUGE_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  switch (isa) {
#if defined(FLEXGAUGE_HAVE_AVX2)
    case Isa::avx2: return detail::avx2_table;
#endif
#if defined(FLEXGAUGE_HAVE_NEON)
    case Isa::neon: return detail::neon_table;
#endif
    default: return detail::scalar_table;
  }
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

const KernelTable& active() { return table(active_isa()); }

bool set_active(Isa isa) {
  if (!supported(isa)) return false;
  current().store(isa, std::memory_order_relaxed);
  return true;
}

}  // namespace flexgauge::kernels
