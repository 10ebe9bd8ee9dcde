#pragma once

// Inner-loop kernels shared by the forward model, its adjoint and the
// beamformer. Every kernel has a portable scalar reference implementation and
// optional vector variants; the variant is chosen once at runtime from the
// CPU features (override with PATK_SIMD=scalar|avx2|neon).

#include <cstddef>
#include <span>
#include <string_view>

namespace patk::simd {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa);

/// Best instruction set supported by both this build and the running CPU.
Isa detect_isa();

/// Currently selected instruction set.
Isa active_isa();

/// Forces a variant. Returns false (and leaves the selection unchanged) when
/// the variant is not available on this machine.
bool set_isa(Isa isa);

bool isa_available(Isa isa);

/// y[i] += a * x[i]. Requires y.size() >= x.size().
void axpy(float a, std::span<const float> x, std::span<float> y);

/// Sum of a[i] * b[i] over the shorter length. Vector variants use a different
/// summation order than the scalar reference, so results agree to rounding.
float dot(std::span<const float> a, std::span<const float> b);

/// y[i] += a * x[i] with x widened to double. All variants round identically.
void axpy_widen(double a, std::span<const float> x, std::span<double> y);

/// Sum of a[i] * b[i] accumulated in double. Products are exact; only the
/// summation order differs between variants.
double dot_widen(std::span<const float> a, std::span<const float> b);

/// dst[k] += weight[k] * lerp(src, pos[k]) where lerp reads src at the
/// fractional index pos[k]. Caller guarantees 0 <= pos[k] <= src.size() - 1
/// wherever weight[k] != 0; positions with zero weight are never read.
void gather_lerp_accumulate(std::span<const float> src, std::span<const float> pos,
                            std::span<const float> weight, std::span<float> dst);

// Per-variant entry points. Exposed so the equivalence tests can call each
// implementation directly.
namespace scalar {
void axpy(float a, const float* x, float* y, std::size_t n);
float dot(const float* a, const float* b, std::size_t n);
void axpy_widen(double a, const float* x, double* y, std::size_t n);
double dot_widen(const float* a, const float* b, std::size_t n);
void gather_lerp_accumulate(const float* src, std::size_t src_len, const float* pos,
                            const float* weight, float* dst, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void axpy(float a, const float* x, float* y, std::size_t n);
float dot(const float* a, const float* b, std::size_t n);
void axpy_widen(double a, const float* x, double* y, std::size_t n);
double dot_widen(const float* a, const float* b, std::size_t n);
void gather_lerp_accumulate(const float* src, std::size_t src_len, const float* pos,
                            const float* weight, float* dst, std::size_t n);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void axpy(float a, const float* x, float* y, std::size_t n);
float dot(const float* a, const float* b, std::size_t n);
void axpy_widen(double a, const float* x, double* y, std::size_t n);
double dot_widen(const float* a, const float* b, std::size_t n);
void gather_lerp_accumulate(const float* src, std::size_t src_len, const float* pos,
                            const float* weight, float* dst, std::size_t n);
}  // namespace neon
#endif

}  // namespace patk::simd
