#include "patk/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "patk/error.hpp"
#include "patk/hash.hpp"

namespace patk {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxChildAngle = 75.0 * kPi / 180.0;
constexpr double kMinChildAngle = 20.0 * kPi / 180.0;

struct Walker {
  const BranchingConfig& cfg;
  std::mt19937_64 rng;
  std::vector<Stroke> strokes;

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

  bool inside(double col, double row, double width) const {
    const double inset = 0.5 * width + 1.0;
    return col >= inset && row >= inset && col <= static_cast<double>(cfg.grid.cols) - 1.0 - inset &&
           row <= static_cast<double>(cfg.grid.rows) - 1.0 - inset;
  }

  void grow(double col, double row, double heading, double width0, double length, int generation) {
    Stroke stroke;
    stroke.generation = generation;
    const int steps = std::max(1, static_cast<int>(length / cfg.step_px));
    std::normal_distribution<double> turn(0.0, cfg.curvature);
    auto width_at = [&](int i) {
      const double s = static_cast<double>(i) / steps;
      return std::max(cfg.width_min_px, width0 * (1.0 + (cfg.taper - 1.0) * s));
    };
    stroke.points.push_back({col, row, width_at(0)});
    for (int i = 1; i <= steps; ++i) {
      if (cfg.curvature > 0.0) heading += turn(rng);
      const double w = width_at(i);
      const double nc = col + cfg.step_px * std::cos(heading);
      const double nr = row + cfg.step_px * std::sin(heading);
      if (!inside(nc, nr, w)) break;
      col = nc;
      row = nr;
      stroke.points.push_back({col, row, w});
    }
    const auto points = stroke.points;
    const double grown = cfg.step_px * static_cast<double>(points.size() - 1);
    strokes.push_back(std::move(stroke));

    if (generation + 1 >= cfg.depth || points.size() < 4) return;
    if (uniform(0.0, 1.0) >= cfg.branch_probability) return;
    const int children = std::uniform_int_distribution<int>(2, 3)(rng);
    for (int k = 0; k < children; ++k) {
      const auto idx = static_cast<std::size_t>(
          uniform(0.15, 0.9) * static_cast<double>(points.size() - 1));
      const double sign = uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
      const double angle = sign * uniform(kMinChildAngle, kMaxChildAngle);
      // Local parent direction at the spawn point.
      const auto& a = points[idx];
      const auto& b = points[std::min(idx + 1, points.size() - 1)];
      const double parent_heading = std::atan2(b.row - a.row, b.col - a.col);
      const double w = std::max(cfg.width_min_px, a.width * uniform(0.5, 0.8));
      const double len = grown * cfg.child_length_ratio * uniform(0.7, 1.0);
      grow(a.col, a.row, parent_heading + angle, w, len, generation + 1);
    }
  }
};

void draw_segment(const StrokePoint& a, const StrokePoint& b, Image& img) {
  const double ha = 0.5 * a.width;
  const double hb = 0.5 * b.width;
  const double reach = std::max(ha, hb) + 1.0;
  const long c_lo = std::max(0L, static_cast<long>(std::floor(std::min(a.col, b.col) - reach)));
  const long c_hi = std::min(static_cast<long>(img.cols()) - 1,
                             static_cast<long>(std::ceil(std::max(a.col, b.col) + reach)));
  const long r_lo = std::max(0L, static_cast<long>(std::floor(std::min(a.row, b.row) - reach)));
  const long r_hi = std::min(static_cast<long>(img.rows()) - 1,
                             static_cast<long>(std::ceil(std::max(a.row, b.row) + reach)));
  const double dc = b.col - a.col;
  const double dr = b.row - a.row;
  const double len2 = dc * dc + dr * dr;
  for (long r = r_lo; r <= r_hi; ++r) {
    for (long c = c_lo; c <= c_hi; ++c) {
      double t = 0.0;
      if (len2 > 0.0) {
        t = std::clamp(((c - a.col) * dc + (r - a.row) * dr) / len2, 0.0, 1.0);
      }
      const double pc = a.col + t * dc - c;
      const double pr = a.row + t * dr - r;
      const double d = std::sqrt(pc * pc + pr * pr);
      const double h = ha + t * (hb - ha);
      const double cov = std::clamp(h - d + 0.5, 0.0, 1.0);
      float& px = img.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
      px = std::max(px, static_cast<float>(cov));
    }
  }
}

// Bilinear read with zero outside the image.
float sample_bilinear(const Image& img, double col, double row) {
  const double fc = std::floor(col);
  const double fr = std::floor(row);
  const long c0 = static_cast<long>(fc);
  const long r0 = static_cast<long>(fr);
  const double tc = col - fc;
  const double tr = row - fr;
  const auto rows = static_cast<long>(img.rows());
  const auto cols = static_cast<long>(img.cols());
  auto get = [&](long r, long c) -> double {
    if (r < 0 || c < 0 || r >= rows || c >= cols) return 0.0;
    return img.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };
  const double top = tc == 0.0 ? get(r0, c0) : get(r0, c0) + tc * (get(r0, c0 + 1) - get(r0, c0));
  if (tr == 0.0) return static_cast<float>(top);
  const double bot =
      tc == 0.0 ? get(r0 + 1, c0) : get(r0 + 1, c0) + tc * (get(r0 + 1, c0 + 1) - get(r0 + 1, c0));
  return static_cast<float>(top + tr * (bot - top));
}

}  // namespace

void validate(const BranchingConfig& cfg) {
  std::vector<std::string> bad;
  if (cfg.trunk_count < 1) bad.push_back("trunk_count must be >= 1");
  if (cfg.depth < 1) bad.push_back("depth must be >= 1");
  if (!(cfg.width_min_px > 0.0)) bad.push_back("width_min_px must be > 0");
  if (cfg.width_max_px < cfg.width_min_px) bad.push_back("width_max_px must be >= width_min_px");
  if (cfg.branch_probability < 0.0 || cfg.branch_probability > 1.0) {
    bad.push_back("branch_probability must be in [0, 1]");
  }
  if (cfg.curvature < 0.0) bad.push_back("curvature must be >= 0");
  if (!(cfg.step_px > 0.0)) bad.push_back("step_px must be > 0");
  if (!(cfg.trunk_length_frac > 0.0)) bad.push_back("trunk_length_frac must be > 0");
  if (!(cfg.child_length_ratio > 0.0)) bad.push_back("child_length_ratio must be > 0");
  if (!(cfg.taper > 0.0) || cfg.taper > 1.0) bad.push_back("taper must be in (0, 1]");
  if (cfg.grid.rows == 0 || cfg.grid.cols == 0 || !(cfg.grid.pitch > 0.0)) {
    bad.push_back("grid must be non-empty with positive pitch");
  } else if (static_cast<double>(std::min(cfg.grid.rows, cfg.grid.cols)) <
             4.0 * cfg.width_min_px + 4.0) {
    bad.push_back("grid too small to hold the minimum vein width");
  }
  if (!bad.empty()) {
    std::string msg = "invalid branching config:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw InvalidArgument(msg);
  }
}

std::vector<Stroke> generate_branching_strokes(std::uint64_t seed, const BranchingConfig& cfg) {
  validate(cfg);
  Walker w{cfg, std::mt19937_64(splitmix64(seed)), {}};
  const double rows = static_cast<double>(cfg.grid.rows);
  const double cols = static_cast<double>(cfg.grid.cols);
  const double diag = std::hypot(rows, cols);
  for (int t = 0; t < cfg.trunk_count; ++t) {
    const double width = cfg.width_max_px * w.uniform(0.75, 1.0);
    const double inset = 0.5 * width + 1.5;
    const int side = std::uniform_int_distribution<int>(0, 3)(w.rng);
    const double along = w.uniform(0.25, 0.75);
    double col = 0.0;
    double row = 0.0;
    double heading = 0.0;
    switch (side) {
      case 0: col = inset; row = along * rows; heading = 0.0; break;
      case 1: col = cols - 1.0 - inset; row = along * rows; heading = kPi; break;
      case 2: col = along * cols; row = inset; heading = 0.5 * kPi; break;
      default: col = along * cols; row = rows - 1.0 - inset; heading = -0.5 * kPi; break;
    }
    heading += w.uniform(-0.6, 0.6);
    w.grow(col, row, heading, width, cfg.trunk_length_frac * diag, 0);
  }
  return std::move(w.strokes);
}

void rasterize_strokes(const std::vector<Stroke>& strokes, Image& img) {
  for (const auto& s : strokes) {
    if (s.points.size() == 1) draw_segment(s.points[0], s.points[0], img);
    for (std::size_t i = 0; i + 1 < s.points.size(); ++i) {
      draw_segment(s.points[i], s.points[i + 1], img);
    }
  }
}

GroundTruthImage generate_branching_phantom(std::uint64_t seed, const BranchingConfig& cfg) {
  Image img(cfg.grid);
  rasterize_strokes(generate_branching_strokes(seed, cfg), img);
  return max_normalized(img);
}

void validate(const AugmentSpec& spec) {
  std::vector<std::string> bad;
  if (!(spec.radial_scale >= 0.5 && spec.radial_scale <= 2.0)) {
    bad.push_back("radial_scale must be in [0.5, 2]");
  }
  if (!(std::abs(spec.shear_x) <= 0.5)) bad.push_back("|shear_x| must be <= 0.5");
  if (!(std::abs(spec.shear_z) <= 0.5)) bad.push_back("|shear_z| must be <= 0.5");
  if (!std::isfinite(spec.rotation)) bad.push_back("rotation must be finite");
  if (!bad.empty()) {
    std::string msg = "invalid augmentation:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw InvalidArgument(msg);
  }
}

GroundTruthImage augment(const GroundTruthImage& img, const AugmentSpec& spec) {
  validate(spec);
  // Forward map on centred (u = col, v = row) coordinates.
  double m[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
  auto left_multiply = [&m](const double a[2][2]) {
    const double r[2][2] = {{a[0][0] * m[0][0] + a[0][1] * m[1][0], a[0][0] * m[0][1] + a[0][1] * m[1][1]},
                            {a[1][0] * m[0][0] + a[1][1] * m[1][0], a[1][0] * m[0][1] + a[1][1] * m[1][1]}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m[i][j] = r[i][j];
  };
  if (spec.mirror == Mirror::horizontal) {
    const double f[2][2] = {{-1.0, 0.0}, {0.0, 1.0}};
    left_multiply(f);
  } else if (spec.mirror == Mirror::vertical) {
    const double f[2][2] = {{1.0, 0.0}, {0.0, -1.0}};
    left_multiply(f);
  }
  if (spec.rotation != 0.0) {
    const double c = std::cos(spec.rotation);
    const double s = std::sin(spec.rotation);
    const double rot[2][2] = {{c, -s}, {s, c}};
    left_multiply(rot);
  }
  if (spec.shear_x != 0.0 || spec.shear_z != 0.0) {
    const double sh[2][2] = {{1.0, spec.shear_x}, {spec.shear_z, 1.0}};
    left_multiply(sh);
  }
  if (spec.radial_scale != 1.0) {
    const double sc[2][2] = {{spec.radial_scale, 0.0}, {0.0, spec.radial_scale}};
    left_multiply(sc);
  }
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  if (std::abs(det) < 1e-9) throw InvalidArgument("augmentation is singular");
  const double inv[2][2] = {{m[1][1] / det, -m[0][1] / det}, {-m[1][0] / det, m[0][0] / det}};

  const double cu = 0.5 * static_cast<double>(img.cols() - 1);
  const double cv = 0.5 * static_cast<double>(img.rows() - 1);
  Image out(img.grid);
  for (std::size_t r = 0; r < img.rows(); ++r) {
    const double v = static_cast<double>(r) - cv;
    for (std::size_t c = 0; c < img.cols(); ++c) {
      const double u = static_cast<double>(c) - cu;
      const double su = inv[0][0] * u + inv[0][1] * v;
      const double sv = inv[1][0] * u + inv[1][1] * v;
      out.at(r, c) = sample_bilinear(img, su + cu, sv + cv);
    }
  }
  return out;
}

GroundTruthImage prepare_ground_truth(const GroundTruthImage& img, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw InvalidArgument("ground-truth threshold must be in [0, 1)");
  }
  const float m = max_value(img.pixels);
  Image out = img;
  if (!(m > 0.0f)) return out;
  const float cut = static_cast<float>(threshold) * m;
  for (float& p : out.pixels) p = p < cut ? 0.0f : p / m;
  return out;
}

}  // namespace patk
