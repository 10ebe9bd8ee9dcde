#pragma once

#include <string>
#include <vector>

#include "patk/image.hpp"

namespace patk {

/// Normalized cross-correlation: both images are max-normalized, then the
/// Pearson correlation of every overlap for shifts up to +-max_shift pixels is
/// computed from windowed (integral-image) sums; the peak is returned. At zero
/// shift this is the Pearson coefficient. Throws when `truth` is constant.
double ncc(const Image& pred, const Image& truth, int max_shift = 5);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean SSIM over all fully-contained Gaussian windows. Inputs are used as
/// given (callers max-normalize).
double ssim(const Image& a, const Image& b, const SsimParams& params = {});

/// Search grid of the scaled-and-shifted SSIM.
struct SssimSearch {
  double gain_min = 0.1;
  double gain_max = 10.0;
  int gain_steps = 32;      ///< logarithmic
  double offset_min = -0.5;
  double offset_max = 0.5;
  int offset_steps = 17;    ///< linear
  double tolerance = 1e-7;  ///< refinement stops below this step size
};

struct SssimResult {
  double score = 0.0;
  double gain = 1.0;
  double offset = 0.0;
};

/// max over g, o of ssim(g * pred + o, truth): coarse grid (plus the identity)
/// followed by bounded compass refinement in (log g, o).
SssimResult sssim_search(const Image& pred, const Image& truth, const SsimParams& params = {},
                         const SssimSearch& search = {});

double sssim(const Image& pred, const Image& truth, const SsimParams& params = {});

/// Pixelwise |truth - pred|.
Image abs_error_map(const Image& pred, const Image& truth);

struct PairScores {
  double ncc = 0.0;
  double ssim = 0.0;
  double sssim = 0.0;
};

/// Scores a reconstruction against its ground truth after max-normalizing both.
PairScores evaluate_pair(const Image& pred, const Image& truth);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  ///< unbiased (n - 1); 0 for a single value
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(const std::vector<double>& values);

struct MetricReport {
  std::vector<std::string> labels;
  std::vector<PairScores> pairs;
  Summary ncc;
  Summary ssim;
  Summary sssim;
};

MetricReport make_report(std::vector<std::string> labels, std::vector<PairScores> pairs);
std::string to_json(const MetricReport& report);
/// Aligned table: one row per metric with mean +- std.
std::string to_table(const MetricReport& report, const std::string& column = "DAS");

}  // namespace patk
