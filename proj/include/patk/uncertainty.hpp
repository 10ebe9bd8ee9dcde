#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "patk/acoustics.hpp"
#include "patk/image.hpp"
#include "patk/tensorio.hpp"

namespace patk {

struct UncertaintyMaps {
  Image mean;
  Image std;  ///< unbiased (n - 1)
  std::size_t n = 0;
  std::optional<Image> abs_error;
};

/// Pixelwise sample mean and unbiased std of a prediction stack. Values are
/// summed in sorted order, so the result does not depend on stack order.
UncertaintyMaps aggregate(const std::vector<Image>& stack);

/// Same for an n x H x W tensor placed on `grid`.
UncertaintyMaps aggregate(const Tensor& stack, const Grid& grid);

/// n_acq noisy records of the same object, each with its own noise seed.
std::vector<RFData> noise_variability(const GroundTruthImage& obj, const PropagationOperator& op,
                                      double snr, std::size_t n_acq, std::uint64_t seed);

/// Fraction of the top-q error pixels that fall inside the top-2q std pixels.
/// Ties are broken by pixel index.
double overlap_score(const Image& std_map, const Image& error_map, double q);

}  // namespace patk
