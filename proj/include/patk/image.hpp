#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace patk {

/// Regular pixel grid in the imaging plane. x runs along the probe (columns),
/// z is depth (rows). Positions are in meters relative to the probe centre and
/// refer to pixel centres.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double pitch = 0.0;
  double x0 = 0.0;  ///< x of column 0
  double z0 = 0.0;  ///< z of row 0

  std::size_t size() const { return rows * cols; }
  double x(std::size_t col) const { return x0 + pitch * static_cast<double>(col); }
  double z(std::size_t row) const { return z0 + pitch * static_cast<double>(row); }
  double width() const { return pitch * static_cast<double>(cols); }
  double height() const { return pitch * static_cast<double>(rows); }
  double center_x() const { return x0 + 0.5 * pitch * static_cast<double>(cols - 1); }
  double center_z() const { return z0 + 0.5 * pitch * static_cast<double>(rows - 1); }

  /// Grid of rows x cols pixels whose centre sits at (cx, cz).
  static Grid centered(std::size_t rows, std::size_t cols, double pitch, double cx, double cz);

  /// Sub-grid starting at (row0, col0). Throws InvalidArgument when it does
  /// not fit.
  Grid sub(std::size_t row0, std::size_t col0, std::size_t n_rows, std::size_t n_cols) const;

  bool operator==(const Grid&) const = default;
};

/// Throws InvalidArgument unless the grid is non-empty with positive pitch.
void validate(const Grid& grid);

/// Pixels on a grid, row-major.
struct Image {
  Grid grid;
  std::vector<float> pixels;

  Image() = default;
  explicit Image(const Grid& g, float fill = 0.0f) : grid(g), pixels(g.size(), fill) {}
  Image(const Grid& g, std::vector<float> data);

  std::size_t rows() const { return grid.rows; }
  std::size_t cols() const { return grid.cols; }
  float& at(std::size_t r, std::size_t c) { return pixels[r * grid.cols + c]; }
  float at(std::size_t r, std::size_t c) const { return pixels[r * grid.cols + c]; }
  std::span<float> row(std::size_t r) { return {pixels.data() + r * grid.cols, grid.cols}; }
  std::span<const float> row(std::size_t r) const {
    return {pixels.data() + r * grid.cols, grid.cols};
  }
};

/// The object being imaged: non-negative, normalized to [0, 1].
using GroundTruthImage = Image;

enum class BeamformKind { mbf, dmbf };

struct BeamformedImage {
  Image image;
  BeamformKind kind = BeamformKind::dmbf;
};

float max_value(std::span<const float> v);
float max_abs(std::span<const float> v);

/// Divides by the maximum value; an image whose maximum is <= 0 is returned
/// unchanged.
Image max_normalized(const Image& img);

Image crop(const Image& img, std::size_t row0, std::size_t col0, std::size_t rows,
           std::size_t cols);

/// Offset (row0, col0) of the centred rows x cols window of a grid.
std::pair<std::size_t, std::size_t> center_offset(const Grid& outer, std::size_t rows,
                                                  std::size_t cols);

/// Separable Gaussian blur with zero boundary, kernel truncated at 3 sigma.
Image gaussian_blur(const Image& img, double sigma_px);

}  // namespace patk
