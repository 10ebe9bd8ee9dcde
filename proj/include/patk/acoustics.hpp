#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "patk/image.hpp"
#include "patk/linear_operator.hpp"

namespace patk {

/// Linear array on the z = 0 plane, elements centred about x = 0.
struct ProbeConfig {
  int n_elements = 128;
  double pitch = 0.1e-3;               ///< m
  double f_center = 15.6e6;            ///< Hz
  double fractional_bandwidth = 0.6;   ///< -6 dB bandwidth / f_center
  double fs = 62.5e6;                  ///< Hz
  std::size_t n_samples = 1024;
  double t0 = 0.0;                     ///< time of the first sample, s

  double element_x(int i) const {
    return (static_cast<double>(i) - 0.5 * static_cast<double>(n_elements - 1)) * pitch;
  }
  bool operator==(const ProbeConfig&) const = default;
};

void validate(const ProbeConfig& probe);

struct Medium {
  double c = 1500.0;  ///< speed of sound, m/s
  bool operator==(const Medium&) const = default;
};

void validate(const Medium& medium);

/// Geometry shared by the forward model and the beamformer.
struct AcousticModel {
  double spreading_exponent = 1.0;   ///< amplitude ~ (r_ref / r)^exponent
  double acceptance_deg = 75.0;      ///< elements beyond this angle see nothing
  double reference_distance = 0.01;  ///< m
  bool operator==(const AcousticModel&) const = default;
};

/// Element-by-sample record of real or complex-valued signals.
struct RFData {
  std::size_t n_elements = 0;
  std::size_t n_samples = 0;
  double fs = 0.0;
  double t0 = 0.0;
  std::vector<float> samples;  ///< n_elements x n_samples, row-major

  RFData() = default;
  RFData(std::size_t elements, std::size_t samples_per_element, double fs_hz, double t0_s)
      : n_elements(elements), n_samples(samples_per_element), fs(fs_hz), t0(t0_s),
        samples(elements * samples_per_element, 0.0f) {}

  std::span<float> row(std::size_t e) { return {samples.data() + e * n_samples, n_samples}; }
  std::span<const float> row(std::size_t e) const {
    return {samples.data() + e * n_samples, n_samples};
  }
};

/// Sampled system response; samples[center] is t = 0.
struct Waveform {
  std::vector<float> samples;
  double fs = 0.0;
  std::size_t center = 0;

  double time(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(center)) / fs;
  }
};

/// Standard deviation of the Gaussian envelope giving the probe's -6 dB
/// fractional bandwidth.
double envelope_sigma(const ProbeConfig& probe);

/// Gaussian-modulated sine exp(-t^2 / 2 sigma^2) sin(2 pi f t), truncated at
/// +-4 sigma and scaled to unit peak magnitude.
Waveform impulse_response(const ProbeConfig& probe);

/// Copy of `probe` whose record length covers every pixel of `grid` plus the
/// impulse support.
ProbeConfig covering(const ProbeConfig& probe, const Grid& grid, const Medium& medium);

/// Forward model A: object grid -> RF samples, stored in factored form.
///
/// Pixel p and element i couple through the delay tau = |r_p - r_i| / c and
/// the weight cos(theta) * (r_ref / |r_p - r_i|)^k, zero beyond the acceptance
/// angle. The response h(t - tau) is sampled onto the record by linear
/// interpolation between the two nearest waveform samples, so apply and
/// apply_adjoint are exact transposes of each other.
class PropagationOperator final : public LinearOperator {
 public:
  PropagationOperator(const Grid& grid, const ProbeConfig& probe, const Medium& medium,
                      const AcousticModel& model = {});
  PropagationOperator(const Grid& grid, const ProbeConfig& probe, const Medium& medium,
                      Waveform response, const AcousticModel& model = {});

  std::size_t domain_size() const override { return grid_.size(); }
  std::size_t range_size() const override {
    return static_cast<std::size_t>(probe_.n_elements) * probe_.n_samples;
  }
  void apply(std::span<const float> x, std::span<float> y) const override;
  void apply_adjoint(std::span<const float> y, std::span<float> x) const override;

  RFData apply(const Image& obj) const;
  Image apply_adjoint(const RFData& rf) const;

  const Grid& grid() const { return grid_; }
  const ProbeConfig& probe() const { return probe_; }
  const Medium& medium() const { return medium_; }
  const AcousticModel& model() const { return model_; }
  const Waveform& response() const { return response_; }

  struct Tap {
    double delay = 0.0;   ///< arrival time in fractional samples from t0
    float weight = 0.0f;  ///< 0 when outside the acceptance cone
  };
  Tap tap(std::size_t pixel, int element) const;

 private:
  void check_geometry() const;

  Grid grid_;
  ProbeConfig probe_;
  Medium medium_;
  AcousticModel model_;
  Waveform response_;
  double cos_acceptance_;
};

/// RF record of an object: op.apply(obj).
RFData synthesize_rf(const GroundTruthImage& obj, const PropagationOperator& op);

/// Adds i.i.d. Gaussian noise with std max|rf| / snr.
RFData add_noise(const RFData& rf, double snr, std::uint64_t seed);

}  // namespace patk
