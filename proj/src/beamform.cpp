#include "patk/beamform.hpp"

#include <atomic>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <fftw3.h>

#include "patk/error.hpp"
#include "patk/simd.hpp"

namespace patk {
namespace {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))) {
    if (data == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
};

struct FftwPlan {
  fftw_plan plan;
  ~FftwPlan() { fftw_destroy_plan(plan); }
};

void check_record(const RFData& rf, const ProbeConfig& probe) {
  if (rf.n_elements != static_cast<std::size_t>(probe.n_elements)) {
    throw InvalidArgument("record has " + std::to_string(rf.n_elements) +
                          " elements, probe has " + std::to_string(probe.n_elements));
  }
  if (rf.n_samples < 2) throw InvalidArgument("record needs at least 2 samples");
  if (rf.samples.size() != rf.n_elements * rf.n_samples) {
    throw InvalidArgument("record sample count does not match its shape");
  }
}

// Accumulates delayed samples of each record in `planes` into the matching
// output plane.
std::vector<Image> delay_and_sum(std::initializer_list<const RFData*> planes, const Grid& grid,
                                 const ProbeConfig& probe, const Medium& medium,
                                 const DasOptions& opts) {
  validate(grid);
  validate(medium);
  const RFData& ref = **planes.begin();
  check_record(ref, probe);
  if (!(grid.z0 > 0.0)) throw InvalidArgument("beamforming grid must lie in front of the probe");

  std::vector<Image> out;
  for (std::size_t i = 0; i < planes.size(); ++i) out.emplace_back(grid);
  const double cos_accept = std::cos(opts.model.acceptance_deg * std::numbers::pi / 180.0);
  const double last = static_cast<double>(ref.n_samples - 1);
  std::atomic<bool> out_of_record{false};
  const auto rows = static_cast<long>(grid.rows);

#pragma omp parallel
  {
    std::vector<float> pos(grid.cols);
    std::vector<float> weight(grid.cols);
#pragma omp for schedule(static)
    for (long r = 0; r < rows; ++r) {
      const double z = grid.z(static_cast<std::size_t>(r));
      for (int e = 0; e < probe.n_elements; ++e) {
        const double xe = probe.element_x(e);
        bool any = false;
        for (std::size_t c = 0; c < grid.cols; ++c) {
          const double dx = grid.x(c) - xe;
          const double dist = std::sqrt(dx * dx + z * z);
          const double p = (dist / medium.c - ref.t0) * ref.fs;
          pos[c] = static_cast<float>(p);
          weight[c] = z / dist >= cos_accept ? 1.0f : 0.0f;
          if (weight[c] != 0.0f && !(p >= 0.0 && p <= last)) {
            if (!opts.zero_fill) out_of_record = true;
            weight[c] = 0.0f;
          }
          any = any || weight[c] != 0.0f;
        }
        if (!any) continue;
        std::size_t i = 0;
        for (const RFData* plane : planes) {
          simd::gather_lerp_accumulate(plane->row(static_cast<std::size_t>(e)), pos, weight,
                                       out[i].row(static_cast<std::size_t>(r)));
          ++i;
        }
      }
    }
  }
  if (out_of_record) {
    throw InvalidArgument(
        "pixel time of flight falls outside the RF record; extend the record or enable zero fill");
  }
  return out;
}

}  // namespace

AnalyticRF analytic_signal(const RFData& rf) {
  const std::size_t n = rf.n_samples;
  if (n < 2) throw InvalidArgument("analytic signal needs at least 2 samples");
  AnalyticRF out{rf, rf};
  std::fill(out.im.samples.begin(), out.im.samples.end(), 0.0f);

  FftwBuffer buf(n);
  // Plans are created serially; FFTW planning is not thread-safe.
  FftwPlan fwd{fftw_plan_dft_1d(static_cast<int>(n), buf.data, buf.data, FFTW_FORWARD, FFTW_ESTIMATE)};
  FftwPlan inv{fftw_plan_dft_1d(static_cast<int>(n), buf.data, buf.data, FFTW_BACKWARD, FFTW_ESTIMATE)};

  const std::size_t half = n / 2;
  const bool even = n % 2 == 0;
  for (std::size_t e = 0; e < rf.n_elements; ++e) {
    const auto src = rf.row(e);
    for (std::size_t i = 0; i < n; ++i) {
      buf.data[i][0] = src[i];
      buf.data[i][1] = 0.0;
    }
    fftw_execute(fwd.plan);
    // Bins 1 .. ceil(n/2)-1 doubled; DC and (even n) Nyquist kept; rest zeroed.
    const std::size_t pos_end = even ? half : half + 1;
    for (std::size_t k = 1; k < pos_end; ++k) {
      buf.data[k][0] *= 2.0;
      buf.data[k][1] *= 2.0;
    }
    for (std::size_t k = even ? half + 1 : half + 1; k < n; ++k) {
      buf.data[k][0] = 0.0;
      buf.data[k][1] = 0.0;
    }
    fftw_execute(inv.plan);
    auto im = out.im.row(e);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) im[i] = static_cast<float>(buf.data[i][1] * scale);
  }
  return out;
}

BeamformedImage das(const RFData& rf, const Grid& grid, const ProbeConfig& probe,
                    const Medium& medium, const DasOptions& opts) {
  auto planes = delay_and_sum({&rf}, grid, probe, medium, opts);
  return {std::move(planes[0]), BeamformKind::mbf};
}

BeamformedImage das(const AnalyticRF& rf, const Grid& grid, const ProbeConfig& probe,
                    const Medium& medium, const DasOptions& opts) {
  if (rf.re.samples.size() != rf.im.samples.size()) {
    throw InvalidArgument("analytic record planes differ in size");
  }
  auto planes = delay_and_sum({&rf.re, &rf.im}, grid, probe, medium, opts);
  Image out(grid);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = std::hypot(planes[0].pixels[i], planes[1].pixels[i]);
  }
  return {std::move(out), BeamformKind::dmbf};
}

BeamformedImage das_envelope(const RFData& rf, const Grid& grid, const ProbeConfig& probe,
                             const Medium& medium, const DasOptions& opts) {
  return das(analytic_signal(rf), grid, probe, medium, opts);
}

}  // namespace patk
