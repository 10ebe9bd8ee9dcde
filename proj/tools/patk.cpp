// patk: command-line front-end over the pipeline stages.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "patk/acoustics.hpp"
#include "patk/beamform.hpp"
#include "patk/config.hpp"
#include "patk/dataset.hpp"
#include "patk/error.hpp"
#include "patk/hash.hpp"
#include "patk/invert.hpp"
#include "patk/manifest.hpp"
#include "patk/metrics.hpp"
#include "patk/parallel.hpp"
#include "patk/phantom.hpp"
#include "patk/preview.hpp"
#include "patk/register.hpp"
#include "patk/tensorio.hpp"
#include "patk/uncertainty.hpp"

namespace fs = std::filesystem;
using namespace patk;

namespace {

struct Globals {
  std::string config_path;
  int threads = -1;
  bool quiet = false;
};

void info(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cout << msg << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

fs::path prepare_out(const std::string& dir) {
  const fs::path p(dir);
  fs::create_directories(p);
  return p;
}

// Places a rank-2 tensor on the crop or simulation grid when the shape
// matches, otherwise on a grid of the configured pitch centred like the crop.
Image load_image(const std::string& path, const PipelineConfig& cfg) {
  const Tensor t = read_tensor(path);
  if (t.shape.size() != 2) throw FormatError(path + ": expected a rank-2 tensor");
  const std::size_t rows = t.shape[0];
  const std::size_t cols = t.shape[1];
  const Grid crop = cfg.crop_grid();
  if (rows == crop.rows && cols == crop.cols) return to_image(t, crop);
  if (rows == cfg.simulation.rows && cols == cfg.simulation.cols) {
    return to_image(t, cfg.simulation);
  }
  return to_image(t, Grid::centered(rows, cols, cfg.simulation.pitch, crop.center_x(),
                                    crop.center_z()));
}

RFData load_rf(const std::string& path, const ProbeConfig& probe) {
  const Tensor t = read_tensor(path);
  if (t.shape.size() != 2) throw FormatError(path + ": expected an elements x samples tensor");
  if (t.shape[0] != static_cast<std::uint32_t>(probe.n_elements) ||
      t.shape[1] != probe.n_samples) {
    throw InvalidArgument(path + ": record is " + std::to_string(t.shape[0]) + " x " +
                          std::to_string(t.shape[1]) + ", configured probe expects " +
                          std::to_string(probe.n_elements) + " x " +
                          std::to_string(probe.n_samples));
  }
  RFData rf(t.shape[0], t.shape[1], probe.fs, probe.t0);
  rf.samples = t.data;
  return rf;
}

Tensor rf_tensor(const RFData& rf) {
  return Tensor{{static_cast<std::uint32_t>(rf.n_elements), static_cast<std::uint32_t>(rf.n_samples)},
                rf.samples};
}

Image rf_image(const RFData& rf) {
  Image img(Grid{rf.n_samples, rf.n_elements, 1.0, 0.0, 0.0});
  for (std::size_t e = 0; e < rf.n_elements; ++e) {
    for (std::size_t s = 0; s < rf.n_samples; ++s) img.at(s, e) = rf.row(e)[s];
  }
  return img;
}

bool has_negative(const Image& img) {
  return std::any_of(img.pixels.begin(), img.pixels.end(), [](float v) { return v < 0.0f; });
}

void save_image(const fs::path& out, const std::string& stem, const Image& img) {
  write_tensor(out / (stem + ".patk"), to_tensor(img));
  write_pgm(out / (stem + ".pgm"), to_gray8(img, has_negative(img)));
}

GroundTruthImage make_object(std::uint64_t seed, std::optional<std::uint64_t> aug_seed,
                             const PipelineConfig& cfg) {
  BranchingConfig pcfg = cfg.phantom;
  pcfg.grid = cfg.simulation;
  GroundTruthImage obj = generate_branching_phantom(seed, pcfg);
  if (aug_seed) obj = augment(obj, random_augmentation(*aug_seed));
  return obj;
}

DasOptions das_options(const PipelineConfig& cfg, bool zero_fill) {
  DasOptions o;
  o.model = cfg.model;
  o.zero_fill = zero_fill;
  return o;
}

std::string format_alpha_table(const std::vector<std::pair<double, double>>& rows) {
  std::string s = "alpha\tsSSIM\n";
  char buf[64];
  for (const auto& [a, v] : rows) {
    std::snprintf(buf, sizeof buf, "%.6g\t%.4f\n", a, v);
    s += buf;
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photoacoustic reconstruction toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--threads", g.threads, "Worker threads (default: all cores)")
      ->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", g.quiet, "Only print errors");

  // phantom
  auto* ph = app.add_subcommand("phantom", "Generate a branching phantom and its ground truth");
  std::string ph_out;
  std::uint64_t ph_seed = 1;
  std::optional<std::uint64_t> ph_aug;
  ph->add_option("--out", ph_out, "Output directory")->required();
  ph->add_option("--seed", ph_seed, "Phantom seed");
  ph->add_option("--augment-seed", ph_aug, "Apply a seeded random augmentation");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate the RF record of an object");
  std::string sim_out, sim_object;
  std::uint64_t sim_seed = 1;
  std::optional<double> sim_snr;
  bool sim_noisy = false;
  std::uint64_t sim_noise_seed = 0;
  sim->add_option("--out", sim_out, "Output directory")->required();
  auto* sim_obj_opt = sim->add_option("--object", sim_object, "Object tensor on the simulation grid")
                          ->check(CLI::ExistingFile);
  sim->add_option("--seed", sim_seed, "Phantom seed when no object is given")
      ->excludes(sim_obj_opt);
  sim->add_flag("--noisy", sim_noisy, "Add noise at the configured SNR");
  sim->add_option("--snr", sim_snr, "Noise SNR (implies --noisy)")->check(CLI::PositiveNumber);
  sim->add_option("--noise-seed", sim_noise_seed, "Noise seed");

  // beamform
  auto* bf = app.add_subcommand("beamform", "Delay-and-sum beamforming onto the crop grid");
  std::string bf_out, bf_rf, bf_kind = "dmBF";
  bool bf_zero_fill = false;
  bf->add_option("--out", bf_out, "Output directory")->required();
  bf->add_option("--rf", bf_rf, "RF tensor")->required()->check(CLI::ExistingFile);
  bf->add_option("--kind", bf_kind, "mBF or dmBF");
  bf->add_flag("--zero-fill", bf_zero_fill, "Treat out-of-record delays as zero");

  // deconv
  auto* dc = app.add_subcommand("deconv", "Model-based L2 deconvolution (FISTA)");
  std::string dc_out, dc_rf, dc_truth, dc_penalty;
  std::optional<double> dc_alpha;
  std::optional<int> dc_iters;
  bool dc_sweep = false, dc_nonneg = false;
  int dc_snapshot = 0;
  dc->add_option("--out", dc_out, "Output directory")->required();
  dc->add_option("--rf", dc_rf, "RF tensor")->required()->check(CLI::ExistingFile);
  dc->add_option("--alpha", dc_alpha, "Regularization weight")->check(CLI::NonNegativeNumber);
  dc->add_option("--penalty", dc_penalty, "l2_squared or l2_norm");
  dc->add_option("--max-iters", dc_iters, "Iteration cap")->check(CLI::PositiveNumber);
  dc->add_flag("--nonnegative", dc_nonneg, "Project onto x >= 0");
  auto* sweep_flag = dc->add_flag("--sweep", dc_sweep, "Pick alpha by a 5-point sSSIM sweep");
  dc->add_option("--truth", dc_truth, "Ground truth for the sweep")
      ->check(CLI::ExistingFile)
      ->needs(sweep_flag);
  dc->add_option("--snapshot-every", dc_snapshot, "Dump the iterate every N iterations")
      ->check(CLI::NonNegativeNumber);

  // metrics
  auto* mt = app.add_subcommand("metrics", "NCC, SSIM and sSSIM of predictions against truth");
  std::string mt_out;
  std::vector<std::string> mt_pred, mt_truth;
  mt->add_option("--out", mt_out, "Output directory")->required();
  mt->add_option("--pred", mt_pred, "Prediction tensors")->required()->check(CLI::ExistingFile);
  mt->add_option("--truth", mt_truth, "Ground-truth tensors, one per prediction")
      ->required()
      ->check(CLI::ExistingFile);

  // register
  auto* rg = app.add_subcommand("register", "Similarity registration of two images");
  std::string rg_out, rg_ref, rg_mov;
  rg->add_option("--out", rg_out, "Output directory")->required();
  rg->add_option("--reference", rg_ref, "Reference image")->required()->check(CLI::ExistingFile);
  rg->add_option("--moving", rg_mov, "Image to align")->required()->check(CLI::ExistingFile);

  // dataset
  auto* ds = app.add_subcommand("dataset", "Build a paired training dataset");
  std::string ds_out, ds_kind, ds_prov;
  std::optional<std::size_t> ds_train, ds_val, ds_test;
  std::optional<std::uint64_t> ds_seed;
  bool ds_force = false, ds_no_aug = false;
  ds->add_option("--out", ds_out, "Dataset root")->required();
  ds->add_option("--n-train", ds_train, "Training pairs")->check(CLI::PositiveNumber);
  ds->add_option("--n-val", ds_val, "Validation pairs")->check(CLI::PositiveNumber);
  ds->add_option("--n-test", ds_test, "Test pairs")->check(CLI::PositiveNumber);
  ds->add_option("--seed", ds_seed, "Dataset seed");
  ds->add_option("--input-kind", ds_kind, "mBF or dmBF");
  ds->add_option("--provenance", ds_prov, "clean or noisy");
  ds->add_flag("--no-augment", ds_no_aug, "Disable augmentation");
  ds->add_flag("--force", ds_force, "Rebuild into a non-empty directory");

  // uncertainty
  auto* un = app.add_subcommand("uncertainty", "Pixelwise mean/std of a stack of predictions");
  std::string un_out, un_stack, un_truth;
  std::size_t un_acq = 0;
  std::uint64_t un_seed = 1, un_noise_seed = 0;
  double un_q = 0.05;
  un->add_option("--out", un_out, "Output directory")->required();
  auto* stack_opt =
      un->add_option("--stack", un_stack, "n x H x W tensor of predictions")->check(CLI::ExistingFile);
  un->add_option("--acquisitions", un_acq,
                 "Instead of --stack: beamform this many noisy acquisitions of one phantom")
      ->excludes(stack_opt);
  un->add_option("--seed", un_seed, "Phantom seed for --acquisitions");
  un->add_option("--noise-seed", un_noise_seed, "Base noise seed for --acquisitions");
  un->add_option("--truth", un_truth, "Ground truth, enables the error map")
      ->check(CLI::ExistingFile);
  un->add_option("--q", un_q, "Top fraction for the overlap score")->check(CLI::Range(1e-6, 0.5));

  // panel
  auto* pn = app.add_subcommand("panel", "Tile up to 4 images side by side");
  std::string pn_out;
  std::vector<std::string> pn_inputs;
  pn->add_option("--out", pn_out, "Output directory")->required();
  pn->add_option("--inputs", pn_inputs, "Image tensors")
      ->required()
      ->expected(1, 4)
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig rc = g.config_path.empty() ? parse_run_config("{}") : load_run_config(g.config_path);
    if (g.threads > 0) rc.threads = g.threads;
    if (rc.threads > 0) set_thread_count(rc.threads);
    PipelineConfig& cfg = rc.pipeline;

    if (*ph) {
      const fs::path out = prepare_out(ph_out);
      const GroundTruthImage obj = make_object(ph_seed, ph_aug, cfg);
      const auto [r0, c0] = cfg.crop_offset();
      const GroundTruthImage target =
          prepare_ground_truth(crop(obj, r0, c0, cfg.crop_rows, cfg.crop_cols), cfg.gt_threshold);
      save_image(out, "phantom", obj);
      save_image(out, "target", target);
      info(g, "wrote " + (out / "phantom.patk").string() + " and " + (out / "target.patk").string());
    } else if (*sim) {
      const fs::path out = prepare_out(sim_out);
      const GroundTruthImage obj =
          sim_object.empty() ? make_object(sim_seed, std::nullopt, cfg) : load_image(sim_object, cfg);
      if (!(obj.grid == cfg.simulation)) {
        throw InvalidArgument("object must be on the " + std::to_string(cfg.simulation.rows) +
                              " x " + std::to_string(cfg.simulation.cols) + " simulation grid");
      }
      const PropagationOperator op(cfg.simulation, cfg.probe, cfg.medium, cfg.model);
      RFData rf = synthesize_rf(obj, op);
      if (sim_noisy || sim_snr) rf = add_noise(rf, sim_snr.value_or(rc.noise_snr), sim_noise_seed);
      write_tensor(out / "rf.patk", rf_tensor(rf));
      write_pgm(out / "rf.pgm", to_gray8(rf_image(rf), true));
      info(g, "wrote " + (out / "rf.patk").string() + " (" + std::to_string(rf.n_elements) +
                  " x " + std::to_string(rf.n_samples) + ")");
    } else if (*bf) {
      const fs::path out = prepare_out(bf_out);
      const RFData rf = load_rf(bf_rf, cfg.probe);
      const BeamformKind kind = parse_beamform_kind(bf_kind);
      const DasOptions opts = das_options(cfg, bf_zero_fill);
      const BeamformedImage img = kind == BeamformKind::mbf
                                      ? das(rf, cfg.crop_grid(), cfg.probe, cfg.medium, opts)
                                      : das_envelope(rf, cfg.crop_grid(), cfg.probe, cfg.medium, opts);
      save_image(out, "beamformed", img.image);
      info(g, "wrote " + (out / "beamformed.patk").string() + " (" + to_string(kind) + ")");
    } else if (*dc) {
      const fs::path out = prepare_out(dc_out);
      FistaConfig fc = rc.fista;
      if (dc_alpha) fc.alpha = *dc_alpha;
      if (!dc_penalty.empty()) fc.penalty = parse_penalty(dc_penalty);
      if (dc_iters) fc.max_iters = *dc_iters;
      if (dc_nonneg) fc.nonnegative = true;
      validate(fc);
      if (dc_sweep && dc_truth.empty()) throw InvalidArgument("--sweep needs --truth");
      const RFData rf = load_rf(dc_rf, cfg.probe);
      const PropagationOperator op(cfg.crop_grid(), cfg.probe, cfg.medium, cfg.model);
      if (fc.lipschitz <= 0.0) fc.lipschitz = estimate_lipschitz(op, fc.power_iters, fc.seed);

      if (dc_sweep) {
        const Image truth = load_image(dc_truth, cfg);
        const double base = std::sqrt(fc.lipschitz);
        std::vector<std::pair<double, double>> table;
        std::optional<Deconvolution> best;
        double best_score = -2.0;
        for (int k = 0; k < 5; ++k) {
          FistaConfig trial = fc;
          trial.alpha = base * std::pow(10.0, -3.0 + 0.5 * k);
          Deconvolution d = fista_solve(rf, op, trial);
          const double score = evaluate_pair(d.image, truth).sssim;
          table.emplace_back(trial.alpha, score);
          if (score > best_score) {
            best_score = score;
            fc.alpha = trial.alpha;
            best = std::move(d);
          }
        }
        const std::string text = format_alpha_table(table);
        write_text(out / "sweep.tsv", text);
        if (!g.quiet) std::cout << text;
        save_image(out, "deconv", best->image);
        write_text(out / "report.json", to_json(best->report));
      } else {
        if (dc_snapshot > 0) {
          fs::create_directories(out / "snapshots");
          const Grid grid = cfg.crop_grid();
          fc.snapshot_every = dc_snapshot;
          fc.on_snapshot = [out, grid](int it, std::span<const float> x) {
            char name[32];
            std::snprintf(name, sizeof name, "iter_%05d.patk", it);
            write_tensor(out / "snapshots" / name,
                         Tensor{{static_cast<std::uint32_t>(grid.rows),
                                 static_cast<std::uint32_t>(grid.cols)},
                                std::vector<float>(x.begin(), x.end())});
          };
        }
        const Deconvolution d = fista_solve(rf, op, fc);
        save_image(out, "deconv", d.image);
        write_text(out / "report.json", to_json(d.report));
      }
      info(g, "wrote " + (out / "deconv.patk").string() + " (alpha " + std::to_string(fc.alpha) + ")");
    } else if (*mt) {
      const fs::path out = prepare_out(mt_out);
      if (mt_pred.size() != mt_truth.size()) {
        throw InvalidArgument("--pred and --truth need the same number of files");
      }
      std::vector<std::string> labels;
      std::vector<PairScores> scores;
      for (std::size_t i = 0; i < mt_pred.size(); ++i) {
        const Image pred = load_image(mt_pred[i], cfg);
        const Image truth = load_image(mt_truth[i], cfg);
        labels.push_back(fs::path(mt_pred[i]).filename().string());
        scores.push_back(evaluate_pair(pred, truth));
      }
      const MetricReport report = make_report(std::move(labels), std::move(scores));
      write_text(out / "metrics.json", to_json(report));
      if (!g.quiet) std::cout << to_table(report);
    } else if (*rg) {
      const fs::path out = prepare_out(rg_out);
      const Image ref = load_image(rg_ref, cfg);
      const Image mov = load_image(rg_mov, cfg);
      const RegistrationResult r = register_similarity(ref, mov);
      save_image(out, "registered", apply_transform(mov, r.transform));
      write_text(out / "registration.json", to_json(r));
      info(g, to_json(r));
    } else if (*ds) {
      DatasetConfig dcfg = rc.dataset;
      if (ds_train) dcfg.n_train = *ds_train;
      if (ds_val) dcfg.n_val = *ds_val;
      if (ds_test) dcfg.n_test = *ds_test;
      if (ds_seed) dcfg.seed = *ds_seed;
      if (!ds_kind.empty()) dcfg.input_kind = parse_beamform_kind(ds_kind);
      if (!ds_prov.empty()) {
        dcfg.provenance = ds_prov == "clean" ? Provenance::simulated : parse_provenance(ds_prov);
      }
      if (ds_no_aug) dcfg.augment = false;
      const Manifest m = build_dataset(dcfg, cfg, ds_out, ds_force);
      info(g, "wrote " + std::to_string(m.pairs.size()) + " pairs to " + ds_out +
                  ", manifest hash " + manifest_hash(m));
    } else if (*un) {
      const fs::path out = prepare_out(un_out);
      UncertaintyMaps maps;
      if (!un_stack.empty()) {
        const Tensor t = read_tensor(un_stack);
        if (t.shape.size() != 3) throw FormatError(un_stack + ": expected an n x H x W tensor");
        const Grid crop = cfg.crop_grid();
        const Grid grid = t.shape[1] == crop.rows && t.shape[2] == crop.cols
                              ? crop
                              : Grid::centered(t.shape[1], t.shape[2], cfg.simulation.pitch,
                                               crop.center_x(), crop.center_z());
        maps = aggregate(t, grid);
      } else if (un_acq > 0) {
        const GroundTruthImage obj = make_object(un_seed, std::nullopt, cfg);
        const PropagationOperator op(cfg.simulation, cfg.probe, cfg.medium, cfg.model);
        const std::vector<RFData> records =
            noise_variability(obj, op, rc.noise_snr, un_acq, un_noise_seed);
        std::vector<Image> stack;
        stack.reserve(records.size());
        for (const RFData& rf : records) {
          stack.push_back(max_normalized(
              das_envelope(rf, cfg.crop_grid(), cfg.probe, cfg.medium, das_options(cfg, false))
                  .image));
        }
        maps = aggregate(stack);
      } else {
        throw InvalidArgument("uncertainty needs --stack or --acquisitions");
      }
      nlohmann::json j{{"n", maps.n}, {"max_std", max_value(maps.std.pixels)}};
      if (!un_truth.empty()) {
        const Image truth = load_image(un_truth, cfg);
        maps.abs_error = abs_error_map(max_normalized(maps.mean), max_normalized(truth));
        save_image(out, "abs_error", *maps.abs_error);
        j["q"] = un_q;
        j["overlap_score"] = overlap_score(maps.std, *maps.abs_error, un_q);
      }
      save_image(out, "mean", maps.mean);
      save_image(out, "std", maps.std);
      write_colormap_ppm(out / "std.ppm", maps.std);
      write_text(out / "uncertainty.json", j.dump(2) + "\n");
      info(g, j.dump());
    } else if (*pn) {
      const fs::path out = prepare_out(pn_out);
      std::vector<Gray8> tiles;
      for (const auto& p : pn_inputs) {
        const Image img = max_normalized(load_image(p, cfg));
        tiles.push_back(to_gray8(img, has_negative(img)));
      }
      write_pgm(out / "panel.pgm", tile_horizontal(tiles));
      info(g, "wrote " + (out / "panel.pgm").string());
    }
  } catch (const ConfigError& e) {
    std::cerr << "patk: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "patk: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
