#pragma once

#include "patk/acoustics.hpp"
#include "patk/image.hpp"

namespace patk {

/// Analytic signal of every element trace: real part is the input record.
struct AnalyticRF {
  RFData re;
  RFData im;
};

/// Frequency-domain analytic signal per element: negative frequencies zeroed,
/// positive frequencies doubled, DC and Nyquist kept.
AnalyticRF analytic_signal(const RFData& rf);

struct DasOptions {
  AcousticModel model;     ///< only the acceptance angle is used
  bool zero_fill = false;  ///< treat out-of-record delays as zero instead of failing
};

/// Delay-and-sum of the real record: modulated (mBF) image, signed.
BeamformedImage das(const RFData& rf, const Grid& grid, const ProbeConfig& probe,
                    const Medium& medium, const DasOptions& opts = {});

/// Delay-and-sum of the analytic record followed by the modulus:
/// demodulated (dmBF) image, non-negative.
BeamformedImage das(const AnalyticRF& rf, const Grid& grid, const ProbeConfig& probe,
                    const Medium& medium, const DasOptions& opts = {});

/// Convenience: dmBF straight from a real record.
BeamformedImage das_envelope(const RFData& rf, const Grid& grid, const ProbeConfig& probe,
                             const Medium& medium, const DasOptions& opts = {});

}  // namespace patk
