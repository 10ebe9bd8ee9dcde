#include "patk/preview.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>

#include "patk/error.hpp"

namespace patk {

Gray8 to_gray8(const Image& img, bool signed_range) {
  Gray8 out{img.rows(), img.cols(), std::vector<unsigned char>(img.pixels.size())};
  const float m = signed_range ? max_abs(img.pixels) : max_value(img.pixels);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    double v = m > 0.0f ? img.pixels[i] / m : 0.0;
    if (signed_range) v = 0.5 * (v + 1.0);
    out.pixels[i] = static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
  }
  return out;
}

Gray8 tile_horizontal(const std::vector<Gray8>& tiles) {
  if (tiles.empty()) throw InvalidArgument("nothing to tile");
  Gray8 out;
  out.rows = tiles.front().rows;
  for (const auto& t : tiles) {
    if (t.rows != out.rows) throw InvalidArgument("panel tiles differ in height");
    out.cols += t.cols;
  }
  out.pixels.resize(out.rows * out.cols);
  std::size_t col0 = 0;
  for (const auto& t : tiles) {
    for (std::size_t r = 0; r < t.rows; ++r) {
      std::copy_n(t.pixels.begin() + static_cast<long>(r * t.cols), t.cols,
                  out.pixels.begin() + static_cast<long>(r * out.cols + col0));
    }
    col0 += t.cols;
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const Gray8& img) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << img.cols << ' ' << img.rows << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_colormap_ppm(const std::filesystem::path& path, const Image& img) {
  // Anchor colours, linearly interpolated.
  static constexpr std::array<std::array<double, 3>, 5> anchors{{{0.27, 0.00, 0.33},
                                                                 {0.23, 0.32, 0.55},
                                                                 {0.13, 0.57, 0.55},
                                                                 {0.37, 0.79, 0.38},
                                                                 {0.99, 0.91, 0.14}}};
  const Gray8 g = to_gray8(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P6\n" << g.cols << ' ' << g.rows << "\n255\n";
  for (unsigned char v : g.pixels) {
    const double x = v / 255.0 * (anchors.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(x), anchors.size() - 2);
    const double f = x - static_cast<double>(i);
    for (int ch = 0; ch < 3; ++ch) {
      const double c = anchors[i][ch] + f * (anchors[i + 1][ch] - anchors[i][ch]);
      out.put(static_cast<char>(std::lround(255.0 * c)));
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace patk
