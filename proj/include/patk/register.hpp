#pragma once

#include <string>

#include "patk/image.hpp"

namespace patk {

/// Maps input pixel p to c + scale * R(rotation) (p - c) + (tx, tz), with c
/// the image centre and (col, row) pixel coordinates.
struct SimilarityTransform {
  double rotation = 0.0;  ///< radians
  double tx = 0.0;        ///< pixels along columns
  double tz = 0.0;        ///< pixels along rows
  double scale = 1.0;

  bool operator==(const SimilarityTransform&) const = default;
};

SimilarityTransform inverse(const SimilarityTransform& t);

/// Resamples `img` so that out(T p) = img(p); bilinear, zero outside.
Image apply_transform(const Image& img, const SimilarityTransform& t);

struct RegistrationBounds {
  double max_rotation = 0.785398163397448;  ///< pi / 4
  double max_translation_frac = 0.2;        ///< of the image size
  double scale_min = 0.8;
  double scale_max = 1.25;
  double rotation_step_deg = 1.0;
  double translation_step_px = 1.0;
  double scale_step = 0.025;
  int refinement_halvings = 3;
};

struct RegistrationResult {
  SimilarityTransform transform;
  double score = 0.0;          ///< Pearson correlation after warping
  double identity_score = 0.0; ///< Pearson correlation without warping
};

/// Pearson correlation between the max-normalized reference and the warped
/// moving image over pixels whose warp samples lie inside the moving image.
/// Returns -1 when fewer than 10% of pixels overlap.
double warped_correlation(const Image& reference, const Image& moving,
                          const SimilarityTransform& t);

/// Finds T maximizing warped_correlation(reference, moving, T): coarse grid over
/// rotation and scale with FFT-based translation search, then coordinate
/// descent. Deterministic.
RegistrationResult register_similarity(const Image& reference, const Image& moving,
                                       const RegistrationBounds& bounds = {});

std::string to_json(const RegistrationResult& r);

}  // namespace patk
