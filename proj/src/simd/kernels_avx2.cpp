// Built with -mavx2 -mfma -ffp-contract=off. Only reached through dispatch
// after a CPUID check.

#include "patk/simd.hpp"

#include <immintrin.h>

namespace patk::simd::avx2 {

void axpy(float a, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vx = _mm256_loadu_ps(x + i);
    const __m256 vy = _mm256_loadu_ps(y + i);
    _mm256_storeu_ps(y + i, _mm256_add_ps(vy, _mm256_mul_ps(va, vx)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

float dot(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  }
  const __m256 acc = _mm256_add_ps(acc0, acc1);
  __m128 lo = _mm256_castps256_ps128(acc);
  const __m128 hi = _mm256_extractf128_ps(acc, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
  lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 0x1));
  float sum = _mm_cvtss_f32(lo);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_widen(double a, const float* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) y[i] += a * static_cast<double>(x[i]);
}

double dot_widen(const float* a, const float* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + i)),
                           _mm256_cvtps_pd(_mm_loadu_ps(b + i)), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + i + 4)),
                           _mm256_cvtps_pd(_mm_loadu_ps(b + i + 4)), acc1);
  }
  const __m256d acc = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc);
  lo = _mm_add_pd(lo, _mm256_extractf128_pd(acc, 1));
  double sum = _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
  for (; i < n; ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

void gather_lerp_accumulate(const float* src, std::size_t src_len, const float* pos,
                            const float* weight, float* dst, std::size_t n) {
  const __m256i last = _mm256_set1_epi32(static_cast<int>(src_len) - 2);
  const __m256 zero = _mm256_setzero_ps();
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    const __m256 w = _mm256_loadu_ps(weight + k);
    const __m256 live = _mm256_cmp_ps(w, zero, _CMP_NEQ_OQ);
    if (_mm256_testz_ps(live, live)) continue;
    const __m256 p = _mm256_loadu_ps(pos + k);
    __m256i i0 = _mm256_min_epi32(_mm256_cvttps_epi32(p), last);
    const __m256 f = _mm256_sub_ps(p, _mm256_cvtepi32_ps(i0));
    const __m256 s0 = _mm256_mask_i32gather_ps(zero, src, i0, live, 4);
    const __m256 s1 = _mm256_mask_i32gather_ps(zero, src + 1, i0, live, 4);
    const __m256 v = _mm256_add_ps(s0, _mm256_mul_ps(f, _mm256_sub_ps(s1, s0)));
    const __m256 contrib = _mm256_and_ps(_mm256_mul_ps(w, v), live);
    _mm256_storeu_ps(dst + k, _mm256_add_ps(_mm256_loadu_ps(dst + k), contrib));
  }
  if (k < n) scalar::gather_lerp_accumulate(src, src_len, pos + k, weight + k, dst + k, n - k);
}

}  // namespace patk::simd::avx2
