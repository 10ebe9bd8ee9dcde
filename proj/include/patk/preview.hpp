#pragma once

#include <filesystem>
#include <vector>

#include "patk/image.hpp"

namespace patk {

/// 8-bit grayscale buffer.
struct Gray8 {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<unsigned char> pixels;
};

/// Max-normalizes and clamps to [0, 1]; negative values map to 0 unless
/// `signed_range` is set, in which case [-max|v|, max|v|] maps to [0, 255].
Gray8 to_gray8(const Image& img, bool signed_range = false);

/// Tiles images left to right (heights must match).
Gray8 tile_horizontal(const std::vector<Gray8>& tiles);

/// Binary PGM (P5).
void write_pgm(const std::filesystem::path& path, const Gray8& img);

/// Binary PPM (P6) through a perceptual blue-to-yellow colour map.
void write_colormap_ppm(const std::filesystem::path& path, const Image& img);

}  // namespace patk
