#include "patk/simd.hpp"

#include <cmath>

namespace patk::simd::scalar {

void axpy(float a, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

float dot(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_widen(double a, const float* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * static_cast<double>(x[i]);
}

double dot_widen(const float* a, const float* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

void gather_lerp_accumulate(const float* src, std::size_t src_len, const float* pos,
                            const float* weight, float* dst, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    if (weight[k] == 0.0f) continue;
    const float p = pos[k];
    auto i0 = static_cast<std::size_t>(p);
    if (i0 + 1 >= src_len) i0 = src_len - 2;
    const float f = p - static_cast<float>(i0);
    const float v = src[i0] + f * (src[i0 + 1] - src[i0]);
    dst[k] += weight[k] * v;
  }
}

}  // namespace patk::simd::scalar
