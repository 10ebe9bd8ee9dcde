#include "patk/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "patk/error.hpp"
#include "patk/hash.hpp"
#include "patk/simd.hpp"

namespace patk {
namespace {

constexpr double kPi = std::numbers::pi;

void throw_if_any(const std::vector<std::string>& bad, const std::string& what) {
  if (bad.empty()) return;
  std::string msg = "invalid " + what + ":";
  for (const auto& b : bad) msg += "\n  " + b;
  throw InvalidArgument(msg);
}

// Clipped [first, last) range of waveform indices j such that start + j is a
// valid record sample.
struct Span {
  long first;
  long last;
};

Span clip(long start, long taps, long n_samples) {
  return {std::max(0L, -start), std::min(taps, n_samples - start)};
}

}  // namespace

void validate(const ProbeConfig& probe) {
  std::vector<std::string> bad;
  if (probe.n_elements < 2) bad.push_back("n_elements must be >= 2");
  if (!(probe.pitch > 0.0)) bad.push_back("pitch must be > 0");
  if (!(probe.f_center > 0.0)) bad.push_back("f_center must be > 0");
  if (!(probe.fractional_bandwidth > 0.0)) bad.push_back("fractional_bandwidth must be > 0");
  if (!(probe.fs > 2.0 * probe.f_center * (1.0 + probe.fractional_bandwidth))) {
    bad.push_back("fs must exceed 2 * f_center * (1 + fractional_bandwidth)");
  }
  if (probe.n_samples < 2) bad.push_back("n_samples must be >= 2");
  if (!std::isfinite(probe.t0)) bad.push_back("t0 must be finite");
  throw_if_any(bad, "probe config");
}

void validate(const Medium& medium) {
  if (!(medium.c > 0.0)) throw InvalidArgument("invalid medium:\n  c must be > 0");
}

double envelope_sigma(const ProbeConfig& probe) {
  // |H(f)| ~ exp(-(2 pi sigma)^2 (f - fc)^2 / 2) drops to one half at
  // |f - fc| = sqrt(2 ln 2) / (2 pi sigma).
  return std::sqrt(2.0 * std::numbers::ln2) /
         (kPi * probe.fractional_bandwidth * probe.f_center);
}

Waveform impulse_response(const ProbeConfig& probe) {
  validate(probe);
  const double sigma = envelope_sigma(probe);
  const auto half = static_cast<std::size_t>(std::ceil(4.0 * sigma * probe.fs));
  Waveform h;
  h.fs = probe.fs;
  h.center = half;
  h.samples.assign(2 * half + 1, 0.0f);
  std::vector<double> pos(half + 1, 0.0);
  double peak = 0.0;
  for (std::size_t m = 1; m <= half; ++m) {
    const double t = static_cast<double>(m) / probe.fs;
    pos[m] = std::exp(-t * t / (2.0 * sigma * sigma)) * std::sin(2.0 * kPi * probe.f_center * t);
    peak = std::max(peak, std::abs(pos[m]));
  }
  // Built from t >= 0 and mirrored so the odd symmetry is exact.
  for (std::size_t m = 1; m <= half; ++m) {
    const auto v = static_cast<float>(pos[m] / peak);
    h.samples[half + m] = v;
    h.samples[half - m] = -v;
  }
  return h;
}

ProbeConfig covering(const ProbeConfig& probe, const Grid& grid, const Medium& medium) {
  validate(grid);
  double r_max = 0.0;
  for (double x : {grid.x(0), grid.x(grid.cols - 1)}) {
    for (double z : {grid.z(0), grid.z(grid.rows - 1)}) {
      for (int e : {0, probe.n_elements - 1}) {
        r_max = std::max(r_max, std::hypot(x - probe.element_x(e), z));
      }
    }
  }
  ProbeConfig out = probe;
  const auto half = static_cast<std::size_t>(std::ceil(4.0 * envelope_sigma(probe) * probe.fs));
  out.n_samples =
      static_cast<std::size_t>(std::ceil((r_max / medium.c - probe.t0) * probe.fs)) + half + 2;
  return out;
}

PropagationOperator::PropagationOperator(const Grid& grid, const ProbeConfig& probe,
                                         const Medium& medium, const AcousticModel& model)
    : PropagationOperator(grid, probe, medium, impulse_response(probe), model) {}

PropagationOperator::PropagationOperator(const Grid& grid, const ProbeConfig& probe,
                                         const Medium& medium, Waveform response,
                                         const AcousticModel& model)
    : grid_(grid), probe_(probe), medium_(medium), model_(model), response_(std::move(response)),
      cos_acceptance_(std::cos(model.acceptance_deg * kPi / 180.0)) {
  validate(grid_);
  validate(probe_);
  validate(medium_);
  if (response_.samples.empty() || response_.center >= response_.samples.size()) {
    throw InvalidArgument("impulse response is empty");
  }
  if (std::abs(response_.fs - probe_.fs) > 1e-9 * probe_.fs) {
    throw InvalidArgument("impulse response sample rate differs from the probe's");
  }
  check_geometry();
}

void PropagationOperator::check_geometry() const {
  if (!(grid_.z0 > 0.0)) {
    throw InvalidArgument("grid extends to z = " + std::to_string(grid_.z0) +
                          " m; every pixel must lie in front of the probe (z > 0)");
  }
}

PropagationOperator::Tap PropagationOperator::tap(std::size_t pixel, int element) const {
  const std::size_t r = pixel / grid_.cols;
  const std::size_t c = pixel % grid_.cols;
  const double dx = grid_.x(c) - probe_.element_x(element);
  const double z = grid_.z(r);
  const double dist = std::sqrt(dx * dx + z * z);
  const double cos_theta = z / dist;
  Tap t;
  t.delay = (dist / medium_.c - probe_.t0) * probe_.fs;
  if (cos_theta < cos_acceptance_) return t;
  const double ratio = model_.reference_distance / dist;
  const double spread = model_.spreading_exponent == 1.0   ? ratio
                        : model_.spreading_exponent == 0.5 ? std::sqrt(ratio)
                                                           : std::pow(ratio, model_.spreading_exponent);
  t.weight = static_cast<float>(cos_theta * spread);
  return t;
}

// Contribution of pixel p to element e at record sample n:
//   x_p * w * [(1 - f) h[n - k] + f h[n - k - 1]],  k + f = delay
// i.e. two shifted copies of the waveform. The adjoint gathers the same two
// windows with the same coefficients.
void PropagationOperator::apply(std::span<const float> x, std::span<float> y) const {
  if (x.size() != domain_size() || y.size() != range_size()) {
    throw InvalidArgument("propagation operator: vector size mismatch");
  }
  std::fill(y.begin(), y.end(), 0.0f);
  const auto taps = static_cast<long>(response_.samples.size());
  const auto center = static_cast<long>(response_.center);
  const auto n_samples = static_cast<long>(probe_.n_samples);
  const std::span<const float> h(response_.samples);
  const std::size_t n_pix = grid_.size();

#pragma omp parallel
  {
    std::vector<double> acc(probe_.n_samples);
#pragma omp for schedule(static)
    for (int e = 0; e < probe_.n_elements; ++e) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t p = 0; p < n_pix; ++p) {
        if (x[p] == 0.0f) continue;
        const Tap t = tap(p, e);
        if (t.weight == 0.0f) continue;
        const double kf = std::floor(t.delay);
        const double f = t.delay - kf;
        const long k = static_cast<long>(kf);
        const double a = static_cast<double>(x[p]) * t.weight;
        for (int shift = 0; shift < 2; ++shift) {
          const double coeff = shift == 0 ? a * (1.0 - f) : a * f;
          const long start = k + shift - center;
          const Span s = clip(start, taps, n_samples);
          if (s.first >= s.last || coeff == 0.0) continue;
          const auto len = static_cast<std::size_t>(s.last - s.first);
          simd::axpy_widen(coeff, h.subspan(s.first, len),
                           {acc.data() + start + s.first, len});
        }
      }
      float* row = y.data() + static_cast<std::size_t>(e) * probe_.n_samples;
      for (std::size_t n = 0; n < probe_.n_samples; ++n) row[n] = static_cast<float>(acc[n]);
    }
  }
}

void PropagationOperator::apply_adjoint(std::span<const float> y, std::span<float> x) const {
  if (x.size() != domain_size() || y.size() != range_size()) {
    throw InvalidArgument("propagation operator: vector size mismatch");
  }
  const auto taps = static_cast<long>(response_.samples.size());
  const auto center = static_cast<long>(response_.center);
  const auto n_samples = static_cast<long>(probe_.n_samples);
  const std::span<const float> h(response_.samples);
  const auto n_pix = static_cast<long>(grid_.size());

#pragma omp parallel for schedule(static)
  for (long p = 0; p < n_pix; ++p) {
    double acc = 0.0;
    for (int e = 0; e < probe_.n_elements; ++e) {
      const Tap t = tap(static_cast<std::size_t>(p), e);
      if (t.weight == 0.0f) continue;
      const double kf = std::floor(t.delay);
      const double f = t.delay - kf;
      const long k = static_cast<long>(kf);
      const float* row = y.data() + static_cast<std::size_t>(e) * probe_.n_samples;
      double sum = 0.0;
      for (int shift = 0; shift < 2; ++shift) {
        const double coeff = shift == 0 ? 1.0 - f : f;
        const long start = k + shift - center;
        const Span s = clip(start, taps, n_samples);
        if (s.first >= s.last || coeff == 0.0) continue;
        const auto len = static_cast<std::size_t>(s.last - s.first);
        sum += coeff * simd::dot_widen(h.subspan(s.first, len), {row + start + s.first, len});
      }
      acc += static_cast<double>(t.weight) * sum;
    }
    x[static_cast<std::size_t>(p)] = static_cast<float>(acc);
  }
}

RFData PropagationOperator::apply(const Image& obj) const {
  if (!(obj.grid == grid_)) throw InvalidArgument("object grid does not match the operator grid");
  RFData rf(static_cast<std::size_t>(probe_.n_elements), probe_.n_samples, probe_.fs, probe_.t0);
  apply(obj.pixels, rf.samples);
  return rf;
}

Image PropagationOperator::apply_adjoint(const RFData& rf) const {
  if (rf.n_elements != static_cast<std::size_t>(probe_.n_elements) ||
      rf.n_samples != probe_.n_samples) {
    throw InvalidArgument("RF record does not match the operator's probe");
  }
  Image out(grid_);
  apply_adjoint(rf.samples, out.pixels);
  return out;
}

RFData synthesize_rf(const GroundTruthImage& obj, const PropagationOperator& op) {
  return op.apply(obj);
}

RFData add_noise(const RFData& rf, double snr, std::uint64_t seed) {
  if (!(snr > 0.0)) throw InvalidArgument("snr must be > 0");
  RFData out = rf;
  const double sd = static_cast<double>(max_abs(rf.samples)) / snr;
  if (sd == 0.0) return out;
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> noise(0.0, sd);
  for (float& v : out.samples) v = static_cast<float>(v + noise(rng));
  return out;
}

}  // namespace patk
