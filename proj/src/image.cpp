#include "patk/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "patk/error.hpp"

namespace patk {

Grid Grid::centered(std::size_t rows, std::size_t cols, double pitch, double cx, double cz) {
  Grid g{rows, cols, pitch, 0.0, 0.0};
  g.x0 = cx - 0.5 * pitch * static_cast<double>(cols - 1);
  g.z0 = cz - 0.5 * pitch * static_cast<double>(rows - 1);
  return g;
}

Grid Grid::sub(std::size_t row0, std::size_t col0, std::size_t n_rows,
               std::size_t n_cols) const {
  if (row0 + n_rows > rows || col0 + n_cols > cols) {
    throw InvalidArgument("sub-grid " + std::to_string(n_rows) + "x" + std::to_string(n_cols) +
                          " does not fit at offset (" + std::to_string(row0) + ", " +
                          std::to_string(col0) + ")");
  }
  return Grid{n_rows, n_cols, pitch, x(col0), z(row0)};
}

void validate(const Grid& grid) {
  if (grid.rows == 0 || grid.cols == 0) throw InvalidArgument("grid has no pixels");
  if (!(grid.pitch > 0.0)) throw InvalidArgument("grid pitch must be positive");
}

Image::Image(const Grid& g, std::vector<float> data) : grid(g), pixels(std::move(data)) {
  if (pixels.size() != grid.size()) {
    throw InvalidArgument("pixel count " + std::to_string(pixels.size()) +
                          " does not match grid " + std::to_string(grid.rows) + "x" +
                          std::to_string(grid.cols));
  }
}

float max_value(std::span<const float> v) {
  if (v.empty()) return 0.0f;
  return *std::max_element(v.begin(), v.end());
}

float max_abs(std::span<const float> v) {
  float m = 0.0f;
  for (float x : v) m = std::max(m, std::abs(x));
  return m;
}

Image max_normalized(const Image& img) {
  Image out = img;
  const float m = max_value(img.pixels);
  if (m > 0.0f) {
    for (float& p : out.pixels) p /= m;
  }
  return out;
}

Image crop(const Image& img, std::size_t row0, std::size_t col0, std::size_t rows,
           std::size_t cols) {
  Image out(img.grid.sub(row0, col0, rows, cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto src = img.row(row0 + r).subspan(col0, cols);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

std::pair<std::size_t, std::size_t> center_offset(const Grid& outer, std::size_t rows,
                                                  std::size_t cols) {
  if (rows > outer.rows || cols > outer.cols) {
    throw InvalidArgument("centred window larger than grid");
  }
  return {(outer.rows - rows) / 2, (outer.cols - cols) / 2};
}

Image gaussian_blur(const Image& img, double sigma_px) {
  if (sigma_px <= 0.0) return img;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma_px));
  std::vector<float> k(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = static_cast<float>(std::exp(-0.5 * i * i / (sigma_px * sigma_px)));
    total += k[i + radius];
  }
  for (float& v : k) v = static_cast<float>(v / total);

  const auto rows = static_cast<long>(img.rows());
  const auto cols = static_cast<long>(img.cols());
  Image tmp(img.grid);
  Image out(img.grid);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i) {
        const long cc = c + i;
        if (cc >= 0 && cc < cols) acc += k[i + radius] * img.at(r, cc);
      }
      tmp.at(r, c) = acc;
    }
  }
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i) {
        const long rr = r + i;
        if (rr >= 0 && rr < rows) acc += k[i + radius] * tmp.at(rr, c);
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

}  // namespace patk
