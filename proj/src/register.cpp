#include "patk/register.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <fftw3.h>
#include <json.hpp>

#include "patk/error.hpp"

namespace patk {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Affine {
  // p_in = m * (q - c) + c - shift, the inverse map used for sampling.
  double m[2][2];
  double off[2];
};

// For out(q) = img(T^-1 q): T^-1 q = c + (1/s) R(-theta) (q - c - t).
Affine sampling_map(const SimilarityTransform& t, double cu, double cv) {
  const double c = std::cos(t.rotation) / t.scale;
  const double s = std::sin(t.rotation) / t.scale;
  Affine a{};
  a.m[0][0] = c;
  a.m[0][1] = s;
  a.m[1][0] = -s;
  a.m[1][1] = c;
  // p = M (q - c - t) + c
  a.off[0] = cu - (a.m[0][0] * (cu + t.tx) + a.m[0][1] * (cv + t.tz));
  a.off[1] = cv - (a.m[1][0] * (cu + t.tx) + a.m[1][1] * (cv + t.tz));
  return a;
}

// Warps with validity mask (sample inside [0, n-1] in both axes).
void warp(const Image& img, const SimilarityTransform& t, std::vector<float>& out,
          std::vector<unsigned char>& valid) {
  const std::size_t rows = img.rows();
  const std::size_t cols = img.cols();
  const double cu = 0.5 * static_cast<double>(cols - 1);
  const double cv = 0.5 * static_cast<double>(rows - 1);
  const Affine a = sampling_map(t, cu, cv);
  out.assign(rows * cols, 0.0f);
  valid.assign(rows * cols, 0);
  const double max_c = static_cast<double>(cols - 1);
  const double max_r = static_cast<double>(rows - 1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double u = a.m[0][0] * c + a.m[0][1] * r + a.off[0];
      const double v = a.m[1][0] * c + a.m[1][1] * r + a.off[1];
      if (!(u >= -1e-9 && v >= -1e-9 && u <= max_c + 1e-9 && v <= max_r + 1e-9)) continue;
      const double uc = std::clamp(u, 0.0, max_c);
      const double vc = std::clamp(v, 0.0, max_r);
      auto c0 = static_cast<std::size_t>(uc);
      auto r0 = static_cast<std::size_t>(vc);
      if (c0 + 1 >= cols) c0 = cols >= 2 ? cols - 2 : 0;
      if (r0 + 1 >= rows) r0 = rows >= 2 ? rows - 2 : 0;
      const double fu = uc - static_cast<double>(c0);
      const double fv = vc - static_cast<double>(r0);
      const std::size_t c1 = std::min(c0 + 1, cols - 1);
      const std::size_t r1 = std::min(r0 + 1, rows - 1);
      const double top = img.at(r0, c0) + fu * (img.at(r0, c1) - img.at(r0, c0));
      const double bot = img.at(r1, c0) + fu * (img.at(r1, c1) - img.at(r1, c0));
      out[r * cols + c] = static_cast<float>(top + fv * (bot - top));
      valid[r * cols + c] = 1;
    }
  }
}

double masked_pearson(const std::vector<float>& a, const std::vector<float>& b,
                      const std::vector<unsigned char>& mask) {
  double n = 0.0, sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask[i]) continue;
    n += 1.0;
    sa += a[i];
    sb += b[i];
  }
  if (n < 0.1 * static_cast<double>(a.size())) return -1.0;
  const double ma = sa / n;
  const double mb = sb / n;
  double cab = 0.0, caa = 0.0, cbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask[i]) continue;
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    cab += da * db;
    caa += da * da;
    cbb += db * db;
  }
  const double den = std::sqrt(caa * cbb);
  return den > 1e-15 ? cab / den : 0.0;
}

Image downsample2(const Image& img) {
  Grid g = img.grid;
  g.rows /= 2;
  g.cols /= 2;
  g.pitch *= 2.0;
  Image out(g);
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t c = 0; c < g.cols; ++c) {
      out.at(r, c) = 0.25f * (img.at(2 * r, 2 * c) + img.at(2 * r + 1, 2 * c) +
                              img.at(2 * r, 2 * c + 1) + img.at(2 * r + 1, 2 * c + 1));
    }
  }
  return out;
}

// Cross-correlation of a fixed image against many moving images via FFTW.
class Correlator {
 public:
  Correlator(const std::vector<float>& fixed, std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), pr_(2 * rows), pc_(2 * cols), hc_(pc_ / 2 + 1),
        real_(fftw_alloc_real(pr_ * pc_)), spec_(fftw_alloc_complex(pr_ * hc_)),
        fixed_spec_(pr_ * hc_) {
    fwd_ = fftw_plan_dft_r2c_2d(static_cast<int>(pr_), static_cast<int>(pc_), real_, spec_,
                                FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_2d(static_cast<int>(pr_), static_cast<int>(pc_), spec_, real_,
                                FFTW_ESTIMATE);
    load(fixed);
    fftw_execute(fwd_);
    for (std::size_t i = 0; i < pr_ * hc_; ++i) fixed_spec_[i] = {spec_[i][0], spec_[i][1]};
  }
  ~Correlator() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(real_);
    fftw_free(spec_);
  }
  Correlator(const Correlator&) = delete;
  Correlator& operator=(const Correlator&) = delete;

  // Integer shift t (|t| <= max) maximizing sum_q fixed(q) moving(q - t).
  std::pair<int, int> best_shift(const std::vector<float>& moving, int max_r, int max_c) {
    load(moving);
    fftw_execute(fwd_);
    for (std::size_t i = 0; i < pr_ * hc_; ++i) {
      const std::complex<double> m(spec_[i][0], spec_[i][1]);
      const std::complex<double> p = fixed_spec_[i] * std::conj(m);
      spec_[i][0] = p.real();
      spec_[i][1] = p.imag();
    }
    fftw_execute(inv_);
    double best = -1e300;
    std::pair<int, int> arg{0, 0};
    for (int dr = -max_r; dr <= max_r; ++dr) {
      for (int dc = -max_c; dc <= max_c; ++dc) {
        const std::size_t ir = static_cast<std::size_t>((dr + static_cast<int>(pr_)) % static_cast<int>(pr_));
        const std::size_t ic = static_cast<std::size_t>((dc + static_cast<int>(pc_)) % static_cast<int>(pc_));
        const double v = real_[ir * pc_ + ic];
        if (v > best) {
          best = v;
          arg = {dr, dc};
        }
      }
    }
    return arg;
  }

 private:
  void load(const std::vector<float>& img) {
    double mean = 0.0;
    for (float v : img) mean += v;
    mean /= static_cast<double>(img.size());
    std::fill(real_, real_ + pr_ * pc_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) real_[r * pc_ + c] = img[r * cols_ + c] - mean;
    }
  }

  std::size_t rows_, cols_, pr_, pc_, hc_;
  double* real_;
  fftw_complex* spec_;
  std::vector<std::complex<double>> fixed_spec_;
  fftw_plan fwd_{};
  fftw_plan inv_{};
};

}  // namespace

SimilarityTransform inverse(const SimilarityTransform& t) {
  // p = (1/s) R(-theta) (q - t) about the centre.
  SimilarityTransform inv;
  inv.rotation = -t.rotation;
  inv.scale = 1.0 / t.scale;
  const double c = std::cos(-t.rotation) / t.scale;
  const double s = std::sin(-t.rotation) / t.scale;
  inv.tx = -(c * t.tx - s * t.tz);
  inv.tz = -(s * t.tx + c * t.tz);
  return inv;
}

Image apply_transform(const Image& img, const SimilarityTransform& t) {
  if (!(t.scale > 0.0)) throw InvalidArgument("similarity scale must be > 0");
  if (t == SimilarityTransform{}) return img;
  Image out(img.grid);
  std::vector<unsigned char> valid;
  warp(img, t, out.pixels, valid);
  return out;
}

double warped_correlation(const Image& reference, const Image& moving,
                          const SimilarityTransform& t) {
  std::vector<float> w;
  std::vector<unsigned char> valid;
  warp(max_normalized(moving), t, w, valid);
  return masked_pearson(max_normalized(reference).pixels, w, valid);
}

RegistrationResult register_similarity(const Image& reference, const Image& moving,
                                       const RegistrationBounds& b) {
  if (reference.rows() != moving.rows() || reference.cols() != moving.cols()) {
    throw InvalidArgument("reference and moving images differ in shape");
  }
  {
    const auto [lo, hi] = std::minmax_element(reference.pixels.begin(), reference.pixels.end());
    if (*lo == *hi) throw InvalidArgument("reference image is constant");
  }
  const Image ref = max_normalized(reference);
  const Image mov = max_normalized(moving);

  std::vector<float> buf;
  std::vector<unsigned char> mask;
  auto score = [&](const SimilarityTransform& t) {
    warp(mov, t, buf, mask);
    return masked_pearson(ref.pixels, buf, mask);
  };

  RegistrationResult result;
  result.identity_score = score({});
  SimilarityTransform best{};
  double best_score = result.identity_score;

  // Coarse pass on a half-resolution pyramid level when the image is large
  // enough; translations found there are doubled.
  const bool half = ref.rows() >= 64 && ref.cols() >= 64;
  const Image cref = half ? downsample2(ref) : ref;
  const Image cmov = half ? downsample2(mov) : mov;
  const double unit = half ? 2.0 : 1.0;
  Correlator corr(cref.pixels, cref.rows(), cref.cols());
  const int max_r = static_cast<int>(b.max_translation_frac * static_cast<double>(cref.rows()));
  const int max_c = static_cast<int>(b.max_translation_frac * static_cast<double>(cref.cols()));
  const int n_rot = static_cast<int>(std::floor(b.max_rotation / (b.rotation_step_deg * kDeg) + 1e-9));
  const int n_scale = static_cast<int>(std::floor((b.scale_max - b.scale_min) / b.scale_step + 1e-9));
  std::vector<float> cbuf;
  std::vector<unsigned char> cmask;
  for (int ir = -n_rot; ir <= n_rot; ++ir) {
    for (int is = 0; is <= n_scale; ++is) {
      SimilarityTransform t;
      t.rotation = ir * b.rotation_step_deg * kDeg;
      t.scale = b.scale_min + is * b.scale_step;
      warp(cmov, t, cbuf, cmask);
      const auto [dr, dc] = corr.best_shift(cbuf, max_r, max_c);
      t.tx = dc;
      t.tz = dr;
      warp(cmov, t, cbuf, cmask);
      const double s = masked_pearson(cref.pixels, cbuf, cmask);
      if (s > best_score + 1e-12) {
        best_score = s;
        best = t;
        best.tx *= unit;
        best.tz *= unit;
      }
    }
  }
  best_score = score(best);
  if (best_score < result.identity_score) {
    best = {};
    best_score = result.identity_score;
  }

  // Coordinate descent, step sizes halved after each converged sweep.
  const double max_tx = b.max_translation_frac * static_cast<double>(ref.cols());
  const double max_tz = b.max_translation_frac * static_cast<double>(ref.rows());
  double steps[4] = {b.rotation_step_deg * kDeg, b.translation_step_px, b.translation_step_px,
                     b.scale_step};
  for (int level = 0; level <= b.refinement_halvings; ++level) {
    bool improved = true;
    int sweeps = 0;
    while (improved && sweeps++ < 100) {
      improved = false;
      for (int k = 0; k < 4; ++k) {
        for (double dir : {1.0, -1.0}) {
          SimilarityTransform t = best;
          double* field = k == 0 ? &t.rotation : k == 1 ? &t.tx : k == 2 ? &t.tz : &t.scale;
          *field += dir * steps[k];
          t.rotation = std::clamp(t.rotation, -b.max_rotation, b.max_rotation);
          t.tx = std::clamp(t.tx, -max_tx, max_tx);
          t.tz = std::clamp(t.tz, -max_tz, max_tz);
          t.scale = std::clamp(t.scale, b.scale_min, b.scale_max);
          const double s = score(t);
          if (s > best_score + 1e-12) {
            best_score = s;
            best = t;
            improved = true;
          }
        }
      }
    }
    for (double& s : steps) s *= 0.5;
  }

  if (best_score <= -1.0) throw InvalidArgument("no overlap between reference and warped moving image");
  result.transform = best;
  result.score = best_score;
  return result;
}

std::string to_json(const RegistrationResult& r) {
  nlohmann::json j{{"rotation_rad", r.transform.rotation},
                   {"rotation_deg", r.transform.rotation / kDeg},
                   {"tx_px", r.transform.tx},
                   {"tz_px", r.transform.tz},
                   {"scale", r.transform.scale},
                   {"score", r.score},
                   {"identity_score", r.identity_score}};
  return j.dump(2) + "\n";
}

}  // namespace patk
