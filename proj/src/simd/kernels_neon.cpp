// AArch64 variants. NEON is baseline on AArch64, so no feature check is
// needed beyond the build target.

#include "patk/simd.hpp"

#include <arm_neon.h>

namespace patk::simd::neon {

void axpy(float a, const float* x, float* y, std::size_t n) {
  const float32x4_t va = vdupq_n_f32(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t vx = vld1q_f32(x + i);
    const float32x4_t vy = vld1q_f32(y + i);
    vst1q_f32(y + i, vaddq_f32(vy, vmulq_f32(va, vx)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

float dot(const float* a, const float* b, std::size_t n) {
  float32x4_t acc0 = vdupq_n_f32(0.0f);
  float32x4_t acc1 = vdupq_n_f32(0.0f);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f32(acc0, vld1q_f32(a + i), vld1q_f32(b + i));
    acc1 = vfmaq_f32(acc1, vld1q_f32(a + i + 4), vld1q_f32(b + i + 4));
  }
  float sum = vaddvq_f32(vaddq_f32(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_widen(double a, const float* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t vx = vld1q_f32(x + i);
    const float64x2_t x0 = vcvt_f64_f32(vget_low_f32(vx));
    const float64x2_t x1 = vcvt_high_f64_f32(vx);
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, x0)));
    vst1q_f64(y + i + 2, vaddq_f64(vld1q_f64(y + i + 2), vmulq_f64(va, x1)));
  }
  for (; i < n; ++i) y[i] += a * static_cast<double>(x[i]);
}

double dot_widen(const float* a, const float* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t va = vld1q_f32(a + i);
    const float32x4_t vb = vld1q_f32(b + i);
    acc0 = vfmaq_f64(acc0, vcvt_f64_f32(vget_low_f32(va)), vcvt_f64_f32(vget_low_f32(vb)));
    acc1 = vfmaq_f64(acc1, vcvt_high_f64_f32(va), vcvt_high_f64_f32(vb));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

// NEON has no gather; the lerp is vectorized after scalar loads.
void gather_lerp_accumulate(const float* src, std::size_t src_len, const float* pos,
                            const float* weight, float* dst, std::size_t n) {
  const auto last = static_cast<std::size_t>(src_len - 2);
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    float s0[4];
    float s1[4];
    float fr[4];
    float live[4];
    for (int l = 0; l < 4; ++l) {
      live[l] = weight[k + l] != 0.0f ? 1.0f : 0.0f;
      if (live[l] == 0.0f) {
        s0[l] = s1[l] = fr[l] = 0.0f;
        continue;
      }
      auto i0 = static_cast<std::size_t>(pos[k + l]);
      if (i0 > last) i0 = last;
      s0[l] = src[i0];
      s1[l] = src[i0 + 1];
      fr[l] = pos[k + l] - static_cast<float>(i0);
    }
    const float32x4_t a = vld1q_f32(s0);
    const float32x4_t b = vld1q_f32(s1);
    const float32x4_t f = vld1q_f32(fr);
    const float32x4_t v = vaddq_f32(a, vmulq_f32(f, vsubq_f32(b, a)));
    const float32x4_t c = vmulq_f32(vmulq_f32(vld1q_f32(weight + k), v), vld1q_f32(live));
    vst1q_f32(dst + k, vaddq_f32(vld1q_f32(dst + k), c));
  }
  if (k < n) scalar::gather_lerp_accumulate(src, src_len, pos + k, weight + k, dst + k, n - k);
}

}  // namespace patk::simd::neon
