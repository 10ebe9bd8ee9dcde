// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "patk/acoustics.hpp"
#include "patk/beamform.hpp"
#include "patk/dataset.hpp"
#include "patk/invert.hpp"
#include "patk/linear_operator.hpp"
#include "patk/manifest.hpp"
#include "patk/metrics.hpp"
#include "patk/phantom.hpp"
#include "patk/register.hpp"
#include "patk/tensorio.hpp"
#include "patk/uncertainty.hpp"

using namespace patk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome bar_visibility() {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid g = Grid::centered(128, 128, 40e-6, 0.0, 10e-3);
  const Medium m;
  ProbeConfig p;
  p.n_elements = 64;
  p = covering(p, g, m);
  const PropagationOperator op(g, p, m);
  double mean[2];
  for (int horizontal = 0; horizontal < 2; ++horizontal) {
    const Image obj = oracle::bar(g, 0.0, 10e-3, 3e-3, 0.2e-3, horizontal == 1);
    const BeamformedImage bf = das_envelope(op.apply(obj), g, p, m);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < obj.pixels.size(); ++i) {
      if (obj.pixels[i] >= 0.5f) {
        sum += bf.image.pixels[i];
        ++n;
      }
    }
    mean[horizontal] = sum / static_cast<double>(n);
  }
  const double ratio = mean[0] / mean[1];
  const double secs = seconds_since(t0);
  return {ratio <= 0.2 && secs < 30.0,
          fmt("vertical/horizontal = %.4f (<= 0.2), %.1f s (< 30 s)", ratio, secs)};
}

Outcome adjoint_exactness() {
  const Grid g = Grid::centered(32, 32, 40e-6, 0.0, 10e-3);
  const Medium m;
  ProbeConfig p;
  p.n_elements = 16;
  const PropagationOperator op(g, covering(p, g, m), m);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = oracle::normal_vector(op.domain_size(), 1000 + s);
    const auto y = oracle::normal_vector(op.range_size(), 2000 + s);
    std::vector<float> ax(op.range_size()), aty(op.domain_size());
    op.apply(x, ax);
    op.apply_adjoint(y, aty);
    const double lhs = oracle::dot(ax, y);
    const double rhs = oracle::dot(x, aty);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
  }
  return {worst <= 1e-5, fmt("max relative mismatch %.3e over 20 pairs (<= 1e-5)", worst)};
}

Outcome fista_oracle() {
  const std::size_t rows = 24, cols = 16;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<float> values(rows * cols);
  for (float& v : values) v = static_cast<float>(n01(rng));
  const DenseOperator a(rows, cols, values);
  std::vector<float> y(rows);
  for (float& v : y) v = static_cast<float>(n01(rng));

  FistaConfig cfg;
  cfg.alpha = 0.3;
  cfg.penalty = Penalty::l2_squared;
  cfg.max_iters = 500;
  cfg.rel_tol = 1e-12;
  cfg.power_iters = 100;
  SolveReport rep;
  const auto x = fista_solve(a, y, cfg, rep);

  Eigen::MatrixXd ae(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) ae(r, c) = values[r * cols + c];
  Eigen::VectorXd ye(rows);
  for (std::size_t r = 0; r < rows; ++r) ye(r) = y[r];
  // minimizer of 1/2 |Ax - y|^2 + alpha^2 |x|^2
  const Eigen::MatrixXd normal =
      ae.transpose() * ae + 2.0 * cfg.alpha * cfg.alpha * Eigen::MatrixXd::Identity(cols, cols);
  const Eigen::VectorXd xs = normal.ldlt().solve(ae.transpose() * ye);
  double num = 0.0;
  for (std::size_t c = 0; c < cols; ++c) num += (x[c] - xs(c)) * (x[c] - xs(c));
  const double rel = std::sqrt(num) / xs.norm();

  bool monotone = true;
  for (std::size_t i = 1; i < rep.objective.size(); ++i) {
    if (rep.objective[i] > rep.objective[i - 1]) monotone = false;
  }
  return {rel <= 1e-4 && rep.iterations <= 500 && monotone,
          fmt("relative error %.3e (<= 1e-4), %d iterations (<= 500), %d restarts, trace %s",
              rel, rep.iterations, rep.restarts, monotone ? "non-increasing" : "INCREASES")};
}

Outcome das_band() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto root = oracle::temp_dir("acceptance_das");
  DatasetConfig d;
  d.n_train = 1;
  d.n_val = 1;
  d.n_test = 15;
  d.input_kind = BeamformKind::dmbf;
  d.provenance = Provenance::simulated;
  d.seed = 7;
  const PipelineConfig cfg = default_pipeline_config();
  const Manifest man = build_dataset(d, cfg, root);
  const Grid grid = cfg.crop_grid();
  std::vector<double> nccs, sssims;
  for (const ManifestPair& p : man.pairs) {
    if (p.split != Split::test) continue;
    const Image in = to_image(read_tensor(root / p.input), grid);
    const Image gt = to_image(read_tensor(root / p.target), grid);
    const PairScores s = evaluate_pair(in, gt);
    nccs.push_back(s.ncc);
    sssims.push_back(s.sssim);
  }
  fs::remove_all(root);
  const Summary n = summarize(nccs);
  const Summary s = summarize(sssims);
  const double secs = seconds_since(t0);
  const bool ok = nccs.size() == 15 && n.mean >= 0.15 && n.mean <= 0.50 && s.mean >= 0.15 &&
                  s.mean <= 0.50 && secs < 600.0;
  return {ok, fmt("%zu pairs, NCC %.3f +- %.3f, sSSIM %.3f +- %.3f (both in [0.15, 0.50]), "
                  "%.0f s (< 600 s)",
                  nccs.size(), n.mean, n.std, s.mean, s.std, secs)};
}

Image reference_phantom(std::uint64_t seed) {
  const PipelineConfig cfg = default_pipeline_config();
  BranchingConfig pc = cfg.phantom;
  pc.grid = cfg.simulation;
  const Image full = generate_branching_phantom(seed, pc);
  const auto [r0, c0] = cfg.crop_offset();
  return crop(full, r0, c0, cfg.crop_rows, cfg.crop_cols);
}

Outcome metric_identities() {
  const Image x = prepare_ground_truth(reference_phantom(11));
  const double n = ncc(x, x);
  const double s = ssim(x, x);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lg(std::log(0.1), std::log(10.0));
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    // The inverse map (1/g, -o/g) must itself lie inside the search box.
    const double g = std::exp(lg(rng));
    const double o = u(rng) * std::min(1.0, g);
    Image y = x;
    for (float& v : y.pixels) v = static_cast<float>(g * v + o);
    worst = std::max(worst, std::abs(sssim(y, x) - 1.0));
  }
  const bool ok = std::abs(n - 1.0) <= 1e-6 && std::abs(s - 1.0) <= 1e-6 && worst <= 1e-3;
  return {ok, fmt("ncc(x,x) = %.9f, ssim(x,x) = %.9f, max |sssim(gx+o,x) - 1| = %.2e (<= 1e-3)",
                  n, s, worst)};
}

Outcome registration_recovery() {
  const Image ref = gaussian_blur(reference_phantom(12), 2.0);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> rot(-10.0, 10.0);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  std::uniform_real_distribution<double> scale(0.9, 1.1);
  double worst_rot = 0.0, worst_t = 0.0, worst_s = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 20; ++trial) {
    SimilarityTransform w;
    w.rotation = rot(rng) * std::numbers::pi / 180.0;
    w.tx = shift(rng);
    w.tz = shift(rng);
    w.scale = scale(rng);
    const Image moving = apply_transform(ref, w);
    const SimilarityTransform want = inverse(w);
    const SimilarityTransform got = register_similarity(ref, moving).transform;
    const double er = std::abs(got.rotation - want.rotation) * 180.0 / std::numbers::pi;
    const double et = std::max(std::abs(got.tx - want.tx), std::abs(got.tz - want.tz));
    const double es = std::abs(got.scale / want.scale - 1.0);
    worst_rot = std::max(worst_rot, er);
    worst_t = std::max(worst_t, et);
    worst_s = std::max(worst_s, es);
    if (er > 0.5 || et > 0.5 || es > 0.01) ++failures;
  }
  return {failures == 0, fmt("%d/20 outside tolerance; worst %.3f deg, %.3f px, %.3f%% "
                             "(0.5 deg / 0.5 px / 1%%)",
                             failures, worst_rot, worst_t, 100.0 * worst_s)};
}

Outcome noise_statistics() {
  const Image obj = prepare_ground_truth(reference_phantom(13));
  const Medium m;
  ProbeConfig p;
  p.n_elements = 64;
  const PropagationOperator op(obj.grid, covering(p, obj.grid, m), m);
  const RFData clean = op.apply(obj);
  const RFData noisy = add_noise(clean, 60.0, 77);
  double ss = 0.0;
  for (std::size_t i = 0; i < clean.samples.size(); ++i) {
    const double d = static_cast<double>(noisy.samples[i]) - clean.samples[i];
    ss += d * d;
  }
  const double measured = std::sqrt(ss / static_cast<double>(clean.samples.size()));
  const double expected = max_abs(clean.samples) / 60.0;
  const double rel = std::abs(measured / expected - 1.0);
  return {rel <= 0.05, fmt("std %.4e vs max|rf|/60 = %.4e, off by %.2f%% (<= 5%%)", measured,
                           expected, 100.0 * rel)};
}

Outcome uncertainty_aggregation() {
  const Grid g = Grid::centered(16, 16, 40e-6, 0.0, 10e-3);
  const std::vector<Image> constant(4, Image(g, 0.37f));
  const UncertaintyMaps c = aggregate(constant);
  bool zero = true;
  for (float v : c.std.pixels) zero = zero && v == 0.0f;

  const auto av = oracle::normal_vector(g.size(), 3);
  const auto bv = oracle::normal_vector(g.size(), 4);
  const UncertaintyMaps two = aggregate({Image(g, av), Image(g, bv)});
  bool exact = true;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = av[i], b = bv[i];
    const double mean = 0.5 * (a + b);
    const double sd = std::sqrt((a - mean) * (a - mean) + (b - mean) * (b - mean));
    exact = exact && two.std.pixels[i] == static_cast<float>(sd);
  }

  std::vector<Image> stack;
  for (std::uint64_t s = 0; s < 7; ++s) stack.emplace_back(g, oracle::normal_vector(g.size(), 10 + s));
  const UncertaintyMaps base = aggregate(stack);
  std::mt19937_64 rng(8);
  bool invariant = true;
  for (int k = 0; k < 10; ++k) {
    std::shuffle(stack.begin(), stack.end(), rng);
    const UncertaintyMaps u = aggregate(stack);
    invariant = invariant && u.mean.pixels == base.mean.pixels && u.std.pixels == base.std.pixels;
  }
  return {zero && exact && invariant,
          fmt("constant std zero: %s, two-point std exact: %s, permutation invariant: %s",
              zero ? "yes" : "no", exact ? "yes" : "no", invariant ? "yes" : "no")};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = ss.str();
  }
  return out;
}

Outcome determinism() {
  const PipelineConfig cfg = default_pipeline_config();
  DatasetConfig d;
  d.n_train = 3;
  d.n_val = 1;
  d.n_test = 2;
  d.seed = 21;
  const auto ds = oracle::temp_dir("acceptance_manifest");
  const std::string h1 = manifest_hash(build_dataset(d, cfg, ds / "a"));
  const std::string h2 = manifest_hash(build_dataset(d, cfg, ds / "a", true));
  const std::string h3 = manifest_hash(build_dataset(d, cfg, ds / "b"));
  const bool manifest_ok = h1 == h2 && h1 == h3 &&
                           snapshot(ds / "a") == snapshot(ds / "b");
  fs::remove_all(ds);

  const auto work = oracle::temp_dir("acceptance_cli");
  const fs::path conf = work.parent_path() / "patk_acceptance_cli.json";
  std::ofstream(conf) << R"({"simulation": {"rows": 72, "cols": 72},
                             "crop": {"rows": 48, "cols": 48},
                             "probe": {"n_elements": 24}})";
  const std::string w = work.string();
  const std::vector<std::pair<std::string, std::string>> steps = {
      {"phantom", "phantom --seed 3 --augment-seed 4 --out " + w + "/ph"},
      {"simulate", "simulate --object " + w + "/ph/phantom.patk --out " + w + "/sim"},
      {"simulate --noisy", "simulate --seed 3 --snr 60 --noise-seed 5 --out " + w + "/simn"},
      {"beamform", "beamform --rf " + w + "/sim/rf.patk --kind dmBF --out " + w + "/bf"},
      {"deconv", "deconv --rf " + w + "/simn/rf.patk --sweep --truth " + w +
                     "/ph/target.patk --max-iters 15 --snapshot-every 5 --out " + w + "/dc"},
      {"metrics", "metrics --pred " + w + "/bf/beamformed.patk --truth " + w +
                      "/ph/target.patk --out " + w + "/mt"},
      {"register", "register --reference " + w + "/ph/target.patk --moving " + w +
                       "/bf/beamformed.patk --out " + w + "/rg"},
      {"dataset", "dataset --n-train 2 --n-val 1 --n-test 1 --seed 9 --provenance noisy --out " +
                      w + "/ds"},
      {"uncertainty", "uncertainty --acquisitions 3 --seed 3 --noise-seed 2 --truth " + w +
                          "/ph/target.patk --out " + w + "/un"},
      {"panel", "panel --inputs " + w + "/ph/target.patk " + w + "/bf/beamformed.patk --out " +
                    w + "/pn"},
  };
  auto run_all = [&](std::vector<std::string>& failed) {
    fs::remove_all(work);
    fs::create_directories(work);
    for (const auto& [name, args] : steps) {
      const std::string cmd = std::string(PATK_CLI_PATH) + " -q --config " + conf.string() + " " +
                              args + " >/dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) failed.push_back(name + " (exit status)");
    }
    return snapshot(work);
  };
  std::vector<std::string> failed;
  const auto first = run_all(failed);
  const auto second = run_all(failed);
  for (const auto& [name, args] : steps) {
    const std::string dir = args.substr(args.rfind('/') + 1);
    std::size_t files = 0;
    bool same = true;
    for (const auto& [path, bytes] : first) {
      if (path.rfind(dir + "/", 0) != 0) continue;
      ++files;
      const auto it = second.find(path);
      same = same && it != second.end() && it->second == bytes;
    }
    if (files == 0 || !same) failed.push_back(name);
  }
  fs::remove_all(work);
  fs::remove(conf);

  std::string detail = std::string("manifest hash ") + (manifest_ok ? "stable" : "CHANGED") + ", " +
                       std::to_string(steps.size()) + " CLI runs ";
  if (failed.empty()) {
    detail += "byte-identical";
  } else {
    detail += "differ:";
    for (const auto& f : failed) detail += " " + f;
  }
  return {manifest_ok && failed.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"visibility artefact (bar orientation)", bar_visibility},
      {"adjoint exactness", adjoint_exactness},
      {"FISTA vs closed-form Tikhonov", fista_oracle},
      {"DAS metric band", das_band},
      {"metric identities", metric_identities},
      {"registration recovery", registration_recovery},
      {"noise statistics", noise_statistics},
      {"uncertainty aggregation", uncertainty_aggregation},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  %-40s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
