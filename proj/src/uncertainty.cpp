#include "patk/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "patk/error.hpp"
#include "patk/hash.hpp"

namespace patk {
namespace {

std::vector<std::size_t> top_indices(const Image& img, std::size_t k) {
  std::vector<std::size_t> idx(img.pixels.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (img.pixels[a] != img.pixels[b]) return img.pixels[a] > img.pixels[b];
                      return a < b;
                    });
  idx.resize(k);
  return idx;
}

bool constant(const Image& img) {
  const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
  return *lo == *hi;
}

}  // namespace

UncertaintyMaps aggregate(const std::vector<Image>& stack) {
  if (stack.size() < 2) throw InvalidArgument("aggregation needs at least 2 predictions");
  const Grid& g = stack.front().grid;
  for (const auto& img : stack) {
    if (img.rows() != g.rows || img.cols() != g.cols) {
      throw InvalidArgument("predictions in the stack differ in shape");
    }
  }
  const std::size_t n = stack.size();
  UncertaintyMaps out{Image(g), Image(g), n, std::nullopt};
  std::vector<double> v(n);
  for (std::size_t p = 0; p < g.size(); ++p) {
    for (std::size_t i = 0; i < n; ++i) v[i] = stack[i].pixels[p];
    std::sort(v.begin(), v.end());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out.mean.pixels[p] = static_cast<float>(mean);
    out.std.pixels[p] = static_cast<float>(std::sqrt(ss / static_cast<double>(n - 1)));
  }
  return out;
}

UncertaintyMaps aggregate(const Tensor& stack, const Grid& grid) {
  if (stack.shape.size() != 3 || stack.shape[1] != grid.rows || stack.shape[2] != grid.cols) {
    throw InvalidArgument("prediction stack must be n x rows x cols matching the grid");
  }
  std::vector<Image> images;
  const std::size_t plane = grid.size();
  for (std::size_t i = 0; i < stack.shape[0]; ++i) {
    images.emplace_back(grid, std::vector<float>(stack.data.begin() + static_cast<long>(i * plane),
                                                 stack.data.begin() + static_cast<long>((i + 1) * plane)));
  }
  return aggregate(images);
}

std::vector<RFData> noise_variability(const GroundTruthImage& obj, const PropagationOperator& op,
                                      double snr, std::size_t n_acq, std::uint64_t seed) {
  if (n_acq < 2) throw InvalidArgument("noise variability needs at least 2 acquisitions");
  const RFData clean = op.apply(obj);
  std::vector<RFData> out;
  out.reserve(n_acq);
  for (std::size_t i = 0; i < n_acq; ++i) out.push_back(add_noise(clean, snr, derive_seed(seed, i)));
  return out;
}

double overlap_score(const Image& std_map, const Image& error_map, double q) {
  if (std_map.rows() != error_map.rows() || std_map.cols() != error_map.cols()) {
    throw InvalidArgument("std and error maps differ in shape");
  }
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("quantile must be in (0, 1)");
  if (constant(std_map) || constant(error_map)) {
    throw InvalidArgument("overlap score is undefined for constant maps");
  }
  const std::size_t n = error_map.pixels.size();
  const auto k_err = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(q * n)));
  const auto k_std = std::min(n, std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(2.0 * q * n))));
  std::vector<unsigned char> in_std(n, 0);
  for (std::size_t i : top_indices(std_map, k_std)) in_std[i] = 1;
  std::size_t hits = 0;
  for (std::size_t i : top_indices(error_map, k_err)) hits += in_std[i];
  return static_cast<double>(hits) / static_cast<double>(k_err);
}

}  // namespace patk
