#include "patk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "patk/error.hpp"

namespace patk {
namespace {

void require_same_shape(const Image& a, const Image& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument("images differ in shape");
  }
}

bool is_constant(const Image& img) {
  const auto [lo, hi] = std::minmax_element(img.pixels.begin(), img.pixels.end());
  return *lo == *hi;
}

// Summed-area table with a zero border: S(r, c) = sum of v over [0, r) x [0, c).
class Integral {
 public:
  Integral(const std::vector<double>& v, std::size_t rows, std::size_t cols)
      : cols_(cols + 1), s_((rows + 1) * (cols + 1), 0.0) {
    for (std::size_t r = 0; r < rows; ++r) {
      double run = 0.0;
      for (std::size_t c = 0; c < cols; ++c) {
        run += v[r * cols + c];
        s_[(r + 1) * cols_ + c + 1] = s_[r * cols_ + c + 1] + run;
      }
    }
  }
  double sum(std::size_t r0, std::size_t c0, std::size_t r1, std::size_t c1) const {
    return s_[r1 * cols_ + c1] - s_[r0 * cols_ + c1] - s_[r1 * cols_ + c0] + s_[r0 * cols_ + c0];
  }

 private:
  std::size_t cols_;
  std::vector<double> s_;
};

// Local statistics for SSIM on the valid region.
struct SsimStats {
  std::vector<double> mu_a, mu_b, var_a, var_b, cov;
  double c1 = 0.0;
  double c2 = 0.0;
};

std::vector<double> filter_valid(const std::vector<double>& v, std::size_t rows, std::size_t cols,
                                 const std::vector<double>& k) {
  const std::size_t w = k.size();
  const std::size_t orows = rows - w + 1;
  const std::size_t ocols = cols - w + 1;
  std::vector<double> tmp(rows * ocols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < ocols; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < w; ++i) acc += k[i] * v[r * cols + c + i];
      tmp[r * ocols + c] = acc;
    }
  }
  std::vector<double> out(orows * ocols);
  for (std::size_t r = 0; r < orows; ++r) {
    for (std::size_t c = 0; c < ocols; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < w; ++i) acc += k[i] * tmp[(r + i) * ocols + c];
      out[r * ocols + c] = acc;
    }
  }
  return out;
}

SsimStats ssim_stats(const Image& a, const Image& b, const SsimParams& p) {
  require_same_shape(a, b);
  if (p.window < 1 || a.rows() < static_cast<std::size_t>(p.window) ||
      a.cols() < static_cast<std::size_t>(p.window)) {
    throw InvalidArgument("image smaller than the SSIM window");
  }
  std::vector<double> k(static_cast<std::size_t>(p.window));
  const double mid = 0.5 * (p.window - 1);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double d = static_cast<double>(i) - mid;
    k[i] = std::exp(-d * d / (2.0 * p.sigma * p.sigma));
  }
  const double total = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= total;

  const std::size_t n = a.pixels.size();
  std::vector<double> va(n), vb(n), aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    va[i] = a.pixels[i];
    vb[i] = b.pixels[i];
    aa[i] = va[i] * va[i];
    bb[i] = vb[i] * vb[i];
    ab[i] = va[i] * vb[i];
  }
  SsimStats s;
  s.mu_a = filter_valid(va, a.rows(), a.cols(), k);
  s.mu_b = filter_valid(vb, a.rows(), a.cols(), k);
  s.var_a = filter_valid(aa, a.rows(), a.cols(), k);
  s.var_b = filter_valid(bb, a.rows(), a.cols(), k);
  s.cov = filter_valid(ab, a.rows(), a.cols(), k);
  for (std::size_t i = 0; i < s.mu_a.size(); ++i) {
    s.var_a[i] -= s.mu_a[i] * s.mu_a[i];
    s.var_b[i] -= s.mu_b[i] * s.mu_b[i];
    s.cov[i] -= s.mu_a[i] * s.mu_b[i];
  }
  s.c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  s.c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  return s;
}

// SSIM of (g * a + o, b) from the statistics of (a, b).
double ssim_affine(const SsimStats& s, double g, double o) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.mu_a.size(); ++i) {
    const double ma = g * s.mu_a[i] + o;
    const double mb = s.mu_b[i];
    const double num = (2.0 * ma * mb + s.c1) * (2.0 * g * s.cov[i] + s.c2);
    const double den = (ma * ma + mb * mb + s.c1) * (g * g * s.var_a[i] + s.var_b[i] + s.c2);
    acc += num / den;
  }
  return acc / static_cast<double>(s.mu_a.size());
}

}  // namespace

double ncc(const Image& pred, const Image& truth, int max_shift) {
  require_same_shape(pred, truth);
  if (is_constant(truth)) throw InvalidArgument("ground truth is constant; NCC is undefined");
  const Image a = max_normalized(pred);
  const Image b = max_normalized(truth);
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  const int limit = std::min<int>(max_shift, static_cast<int>(std::min(rows, cols) / 2) - 1);

  const std::size_t n = rows * cols;
  std::vector<double> va(n), vb(n), aa(n), bb(n);
  for (std::size_t i = 0; i < n; ++i) {
    va[i] = a.pixels[i];
    vb[i] = b.pixels[i];
    aa[i] = va[i] * va[i];
    bb[i] = vb[i] * vb[i];
  }
  const Integral sa(va, rows, cols), sb(vb, rows, cols), saa(aa, rows, cols), sbb(bb, rows, cols);

  double best = -1.0;
  for (int dr = -limit; dr <= limit; ++dr) {
    for (int dc = -limit; dc <= limit; ++dc) {
      // a(r, c) pairs with b(r - dr, c - dc).
      const std::size_t ar0 = static_cast<std::size_t>(std::max(0, dr));
      const std::size_t ac0 = static_cast<std::size_t>(std::max(0, dc));
      const std::size_t ar1 = rows - static_cast<std::size_t>(std::max(0, -dr));
      const std::size_t ac1 = cols - static_cast<std::size_t>(std::max(0, -dc));
      const std::size_t br0 = ar0 - static_cast<std::size_t>(dr);
      const std::size_t bc0 = ac0 - static_cast<std::size_t>(dc);
      const std::size_t br1 = ar1 - static_cast<std::size_t>(dr);
      const std::size_t bc1 = ac1 - static_cast<std::size_t>(dc);
      const double count = static_cast<double>((ar1 - ar0) * (ac1 - ac0));

      const double mean_a = sa.sum(ar0, ac0, ar1, ac1) / count;
      const double mean_b = sb.sum(br0, bc0, br1, bc1) / count;
      const double var_a = saa.sum(ar0, ac0, ar1, ac1) / count - mean_a * mean_a;
      const double var_b = sbb.sum(br0, bc0, br1, bc1) / count - mean_b * mean_b;
      double cross = 0.0;
      for (std::size_t r = ar0; r < ar1; ++r) {
        const float* pa = &a.pixels[r * cols];
        const float* pb = &b.pixels[(r - static_cast<std::size_t>(dr)) * cols];
        for (std::size_t c = ac0; c < ac1; ++c) {
          cross += static_cast<double>(pa[c]) * pb[c - static_cast<std::size_t>(dc)];
        }
      }
      const double cov = cross / count - mean_a * mean_b;
      const double denom = std::sqrt(std::max(var_a, 0.0) * std::max(var_b, 0.0));
      const double r = denom > 1e-15 ? cov / denom : 0.0;
      best = std::max(best, r);
    }
  }
  return std::clamp(best, -1.0, 1.0);
}

double ssim(const Image& a, const Image& b, const SsimParams& params) {
  return ssim_affine(ssim_stats(a, b, params), 1.0, 0.0);
}

SssimResult sssim_search(const Image& pred, const Image& truth, const SsimParams& params,
                         const SssimSearch& search) {
  const SsimStats stats = ssim_stats(pred, truth, params);
  const double lg_lo = std::log(search.gain_min);
  const double lg_hi = std::log(search.gain_max);
  auto eval = [&](double lg, double o) { return ssim_affine(stats, std::exp(lg), o); };

  double best_lg = 0.0;
  double best_o = 0.0;
  double best = eval(0.0, 0.0);
  const double dlg = (lg_hi - lg_lo) / std::max(1, search.gain_steps - 1);
  const double dof = (search.offset_max - search.offset_min) / std::max(1, search.offset_steps - 1);
  for (int i = 0; i < search.gain_steps; ++i) {
    const double lg = lg_lo + dlg * i;
    for (int j = 0; j < search.offset_steps; ++j) {
      const double o = search.offset_min + dof * j;
      const double v = eval(lg, o);
      if (v > best) {
        best = v;
        best_lg = lg;
        best_o = o;
      }
    }
  }

  // Compass refinement, clamped to the search box.
  double step_lg = dlg;
  double step_o = dof;
  while (step_lg > search.tolerance || step_o > search.tolerance) {
    bool moved = false;
    const double cand[4][2] = {{step_lg, 0.0}, {-step_lg, 0.0}, {0.0, step_o}, {0.0, -step_o}};
    for (const auto& d : cand) {
      const double lg = std::clamp(best_lg + d[0], lg_lo, lg_hi);
      const double o = std::clamp(best_o + d[1], search.offset_min, search.offset_max);
      const double v = eval(lg, o);
      if (v > best) {
        best = v;
        best_lg = lg;
        best_o = o;
        moved = true;
      }
    }
    if (!moved) {
      step_lg *= 0.5;
      step_o *= 0.5;
    }
  }
  return {std::min(best, 1.0), std::exp(best_lg), best_o};
}

double sssim(const Image& pred, const Image& truth, const SsimParams& params) {
  return sssim_search(pred, truth, params).score;
}

Image abs_error_map(const Image& pred, const Image& truth) {
  require_same_shape(pred, truth);
  Image out(truth.grid);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = std::abs(truth.pixels[i] - pred.pixels[i]);
  }
  return out;
}

PairScores evaluate_pair(const Image& pred, const Image& truth) {
  const Image a = max_normalized(pred);
  const Image b = max_normalized(truth);
  return {ncc(a, b), ssim(a, b), sssim(a, b)};
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

MetricReport make_report(std::vector<std::string> labels, std::vector<PairScores> pairs) {
  MetricReport r;
  r.labels = std::move(labels);
  r.pairs = std::move(pairs);
  std::vector<double> n, s, ss;
  for (const auto& p : r.pairs) {
    n.push_back(p.ncc);
    s.push_back(p.ssim);
    ss.push_back(p.sssim);
  }
  r.ncc = summarize(n);
  r.ssim = summarize(s);
  r.sssim = summarize(ss);
  return r;
}

std::string to_json(const MetricReport& report) {
  using nlohmann::json;
  json pairs = json::array();
  for (std::size_t i = 0; i < report.pairs.size(); ++i) {
    const auto& p = report.pairs[i];
    pairs.push_back({{"label", i < report.labels.size() ? report.labels[i] : std::to_string(i)},
                     {"ncc", p.ncc},
                     {"ssim", p.ssim},
                     {"sssim", p.sssim}});
  }
  auto summary = [](const Summary& s) {
    return json{{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
  };
  json j{{"pairs", pairs},
         {"ncc", summary(report.ncc)},
         {"ssim", summary(report.ssim)},
         {"sssim", summary(report.sssim)},
         {"count", report.pairs.size()}};
  return j.dump(2) + "\n";
}

std::string to_table(const MetricReport& report, const std::string& column) {
  char line[128];
  std::string out;
  std::snprintf(line, sizeof line, "%-8s %16s\n", "", column.c_str());
  out += line;
  auto row = [&](const char* name, const Summary& s) {
    char cell[48];
    std::snprintf(cell, sizeof cell, "%.2f +- %.2f", s.mean, s.std);
    std::snprintf(line, sizeof line, "%-8s %16s\n", name, cell);
    out += line;
  };
  row("NCC", report.ncc);
  row("SSIM", report.ssim);
  row("sSSIM", report.sssim);
  return out;
}

}  // namespace patk
