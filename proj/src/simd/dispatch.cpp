#include "patk/simd.hpp"

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>

namespace patk::simd {
namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(PATK_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(PATK_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa initial_isa() {
  if (const char* env = std::getenv("PATK_SIMD")) {
    const std::string want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (want == to_string(isa) && cpu_has(isa)) return isa;
    }
  }
  return detect_isa();
}

std::atomic<Isa>& selected() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

Isa detect_isa() {
  if (cpu_has(Isa::avx2)) return Isa::avx2;
  if (cpu_has(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) { return cpu_has(isa); }

bool set_isa(Isa isa) {
  if (!cpu_has(isa)) return false;
  selected().store(isa, std::memory_order_relaxed);
  return true;
}

void axpy(float a, std::span<const float> x, std::span<float> y) {
  assert(y.size() >= x.size());
  switch (active_isa()) {
#if defined(PATK_HAVE_AVX2)
    case Isa::avx2: return avx2::axpy(a, x.data(), y.data(), x.size());
#endif
#if defined(PATK_HAVE_NEON)
    case Isa::neon: return neon::axpy(a, x.data(), y.data(), x.size());
#endif
    default: return scalar::axpy(a, x.data(), y.data(), x.size());
  }
}

float dot(std::span<const float> a, std::span<const float> b) {
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  switch (active_isa()) {
#if defined(PATK_HAVE_AVX2)
    case Isa::avx2: return avx2::dot(a.data(), b.data(), n);
#endif
#if defined(PATK_HAVE_NEON)
    case Isa::neon: return neon::dot(a.data(), b.data(), n);
#endif
    default: return scalar::dot(a.data(), b.data(), n);
  }
}

void axpy_widen(double a, std::span<const float> x, std::span<double> y) {
  assert(y.size() >= x.size());
  switch (active_isa()) {
#if defined(PATK_HAVE_AVX2)
    case Isa::avx2: return avx2::axpy_widen(a, x.data(), y.data(), x.size());
#endif
#if defined(PATK_HAVE_NEON)
    case Isa::neon: return neon::axpy_widen(a, x.data(), y.data(), x.size());
#endif
    default: return scalar::axpy_widen(a, x.data(), y.data(), x.size());
  }
}

double dot_widen(std::span<const float> a, std::span<const float> b) {
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  switch (active_isa()) {
#if defined(PATK_HAVE_AVX2)
    case Isa::avx2: return avx2::dot_widen(a.data(), b.data(), n);
#endif
#if defined(PATK_HAVE_NEON)
    case Isa::neon: return neon::dot_widen(a.data(), b.data(), n);
#endif
    default: return scalar::dot_widen(a.data(), b.data(), n);
  }
}

void gather_lerp_accumulate(std::span<const float> src, std::span<const float> pos,
                            std::span<const float> weight, std::span<float> dst) {
  assert(src.size() >= 2);
  assert(pos.size() == dst.size() && weight.size() == dst.size());
  switch (active_isa()) {
#if defined(PATK_HAVE_AVX2)
    case Isa::avx2:
      return avx2::gather_lerp_accumulate(src.data(), src.size(), pos.data(), weight.data(),
                                          dst.data(), dst.size());
#endif
#if defined(PATK_HAVE_NEON)
    case Isa::neon:
      return neon::gather_lerp_accumulate(src.data(), src.size(), pos.data(), weight.data(),
                                          dst.data(), dst.size());
#endif
    default:
      return scalar::gather_lerp_accumulate(src.data(), src.size(), pos.data(), weight.data(),
                                            dst.data(), dst.size());
  }
}

}  // namespace patk::simd
