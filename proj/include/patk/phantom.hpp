#pragma once

#include <cstdint>
#include <vector>

#include "patk/image.hpp"

namespace patk {

/// Parameters of the procedural branching (leaf-skeleton-like) generator.
/// Lengths are in pixels of `grid`.
struct BranchingConfig {
  Grid grid;
  int trunk_count = 4;
  int depth = 5;                     ///< generations, 1 = trunks only
  double width_min_px = 2.0;
  double width_max_px = 20.0;
  double branch_probability = 0.85;  ///< chance that a branch spawns children
  double curvature = 0.06;           ///< heading random walk, radians per step
  double step_px = 2.0;
  double trunk_length_frac = 1.2;    ///< trunk length relative to the grid diagonal
  double child_length_ratio = 0.6;   ///< child length relative to its parent
  double taper = 0.6;                ///< end width / start width along a branch
};

/// Throws InvalidArgument with every violated field.
void validate(const BranchingConfig& cfg);

struct StrokePoint {
  double col = 0.0;
  double row = 0.0;
  double width = 0.0;  ///< full width in pixels
};

/// One tapering branch as a polyline.
struct Stroke {
  std::vector<StrokePoint> points;
  int generation = 0;
};

/// The branch geometry behind generate_branching_phantom, before
/// rasterization. Deterministic in (seed, cfg).
std::vector<Stroke> generate_branching_strokes(std::uint64_t seed, const BranchingConfig& cfg);

/// Anti-aliased rasterization of strokes as round-capped tapering lines,
/// combined with max; coverage of a pixel is clamp(w/2 - d + 1/2, 0, 1).
void rasterize_strokes(const std::vector<Stroke>& strokes, Image& img);

GroundTruthImage generate_branching_phantom(std::uint64_t seed, const BranchingConfig& cfg);

enum class Mirror { none, horizontal, vertical };

/// Geometric augmentation about the image centre. Applied to input
/// coordinates in the order mirror, rotation, shear, radial scale.
struct AugmentSpec {
  double rotation = 0.0;      ///< radians
  Mirror mirror = Mirror::none;
  double shear_x = 0.0;       ///< horizontal shear, col += shear_x * row
  double shear_z = 0.0;       ///< vertical shear, row += shear_z * col
  double radial_scale = 1.0;  ///< > 1 expands about the centre

  bool operator==(const AugmentSpec&) const = default;
};

void validate(const AugmentSpec& spec);

/// Bilinear resampling on the same grid; samples outside the image read 0.
GroundTruthImage augment(const GroundTruthImage& img, const AugmentSpec& spec);

inline constexpr double kDefaultGroundTruthThreshold = 0.1;

/// Zeroes pixels below threshold * max and renormalizes to max 1. An all-zero
/// image is returned unchanged.
GroundTruthImage prepare_ground_truth(const GroundTruthImage& img,
                                      double threshold = kDefaultGroundTruthThreshold);

}  // namespace patk
