#include "patk/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <set>

#include <json.hpp>

#include "patk/error.hpp"
#include "patk/hash.hpp"
#include "patk/tensorio.hpp"

namespace patk {
namespace {

constexpr std::uint64_t kAugmentDrawsPerPhantom = 4;
constexpr std::uint64_t kMaxPhantomDraws = 64;

std::string pair_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu.patk", i);
  return buf;
}

}  // namespace

Grid PipelineConfig::crop_grid() const {
  const auto [r0, c0] = crop_offset();
  return simulation.sub(r0, c0, crop_rows, crop_cols);
}

std::pair<std::size_t, std::size_t> PipelineConfig::crop_offset() const {
  return center_offset(simulation, crop_rows, crop_cols);
}

PipelineConfig default_pipeline_config() {
  PipelineConfig cfg;
  cfg.simulation = Grid::centered(250, 250, 40e-6, 0.0, 10e-3);
  cfg.probe = covering(ProbeConfig{}, cfg.simulation, cfg.medium);
  cfg.phantom.grid = cfg.simulation;
  return cfg;
}

std::string to_string(BeamformKind k) { return k == BeamformKind::mbf ? "mBF" : "dmBF"; }

BeamformKind parse_beamform_kind(const std::string& s) {
  if (s == "mBF" || s == "mbf") return BeamformKind::mbf;
  if (s == "dmBF" || s == "dmbf") return BeamformKind::dmbf;
  throw InvalidArgument("unknown beamform kind '" + s + "' (expected mBF or dmBF)");
}

void validate(const DatasetConfig& cfg) {
  std::vector<std::string> bad;
  if (cfg.n_train < 1) bad.push_back("n_train must be >= 1");
  if (cfg.n_val < 1) bad.push_back("n_val must be >= 1");
  if (cfg.n_test < 1) bad.push_back("n_test must be >= 1");
  if (!(cfg.snr > 0.0)) bad.push_back("snr must be > 0");
  if (cfg.bandwidth_jitter < 0.0 || cfg.bandwidth_jitter >= 1.0) {
    bad.push_back("bandwidth_jitter must be in [0, 1)");
  }
  if (cfg.frequency_jitter < 0.0 || cfg.frequency_jitter >= 1.0) {
    bad.push_back("frequency_jitter must be in [0, 1)");
  }
  if (!bad.empty()) {
    std::string msg = "invalid dataset config:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw InvalidArgument(msg);
  }
}

Pair build_pair_from_object(const GroundTruthImage& object, const PairOptions& opts,
                            const PipelineConfig& cfg) {
  if (!(object.grid == cfg.simulation)) {
    throw InvalidArgument("object is not on the simulation grid");
  }
  ProbeConfig probe = cfg.probe;
  if (opts.provenance == Provenance::noisy) {
    std::mt19937_64 rng(derive_seed(opts.noise_seed, 0x6a17));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    probe.f_center *= 1.0 + opts.frequency_jitter * u(rng);
    probe.fractional_bandwidth *= 1.0 + opts.bandwidth_jitter * u(rng);
  }
  const PropagationOperator op(cfg.simulation, probe, cfg.medium, cfg.model);
  RFData rf = op.apply(object);
  if (opts.provenance == Provenance::noisy) rf = add_noise(rf, opts.snr, opts.noise_seed);

  const Grid window = cfg.crop_grid();
  DasOptions das_opts;
  das_opts.model = cfg.model;
  Pair pair;
  pair.input = opts.input_kind == BeamformKind::mbf
                   ? das(rf, window, cfg.probe, cfg.medium, das_opts)
                   : das_envelope(rf, window, cfg.probe, cfg.medium, das_opts);
  const float peak = max_abs(pair.input.image.pixels);
  if (peak > 0.0f) {
    for (float& v : pair.input.image.pixels) v /= peak;
  }
  const auto [r0, c0] = cfg.crop_offset();
  pair.target = prepare_ground_truth(crop(object, r0, c0, cfg.crop_rows, cfg.crop_cols),
                                     cfg.gt_threshold);
  return pair;
}

Pair build_pair(std::uint64_t phantom_seed, const AugmentSpec& aug, const PairOptions& opts,
                const PipelineConfig& cfg) {
  BranchingConfig pcfg = cfg.phantom;
  pcfg.grid = cfg.simulation;
  const GroundTruthImage phantom = generate_branching_phantom(phantom_seed, pcfg);
  return build_pair_from_object(augment(phantom, aug), opts, cfg);
}

AugmentSpec random_augmentation(std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AugmentSpec a;
  a.rotation = 2.0 * std::numbers::pi * u(rng);
  const double m = u(rng);
  a.mirror = m < 1.0 / 3.0 ? Mirror::none : m < 2.0 / 3.0 ? Mirror::horizontal : Mirror::vertical;
  const double shear = 0.6 * u(rng) - 0.3;
  if (u(rng) < 0.5) {
    a.shear_x = shear;
  } else {
    a.shear_z = shear;
  }
  a.radial_scale = std::exp(std::log(0.8) + (std::log(1.25) - std::log(0.8)) * u(rng));
  return a;
}

std::string probe_config_hash(const PipelineConfig& cfg) {
  const auto& p = cfg.probe;
  const nlohmann::json j{{"n_elements", p.n_elements},
                         {"pitch", p.pitch},
                         {"f_center", p.f_center},
                         {"fractional_bandwidth", p.fractional_bandwidth},
                         {"fs", p.fs},
                         {"n_samples", p.n_samples},
                         {"t0", p.t0},
                         {"c", cfg.medium.c},
                         {"spreading_exponent", cfg.model.spreading_exponent},
                         {"acceptance_deg", cfg.model.acceptance_deg}};
  return hex64(fnv1a64(j.dump()));
}

std::string grid_config_hash(const PipelineConfig& cfg) {
  const auto& g = cfg.simulation;
  const nlohmann::json j{{"rows", g.rows},        {"cols", g.cols},
                         {"pitch", g.pitch},      {"x0", g.x0},
                         {"z0", g.z0},            {"crop_rows", cfg.crop_rows},
                         {"crop_cols", cfg.crop_cols}};
  return hex64(fnv1a64(j.dump()));
}

Manifest build_dataset(const DatasetConfig& dcfg, const PipelineConfig& cfg,
                       const std::filesystem::path& root, bool force) {
  namespace fs = std::filesystem;
  validate(dcfg);
  if (fs::exists(root) && !fs::is_empty(root)) {
    if (!force) {
      throw IoError("output directory " + root.string() + " is not empty (use --force to rebuild)");
    }
    fs::remove_all(root / "inputs");
    fs::remove_all(root / "targets");
    fs::remove(root / "manifest");
  }
  fs::create_directories(root / "inputs");
  fs::create_directories(root / "targets");

  const std::size_t n_trainval = dcfg.n_train + dcfg.n_val;
  const std::size_t total = n_trainval + dcfg.n_test;

  // Phantom ids: train/val and test come from separate streams; a collision
  // (astronomically unlikely) is skipped so the sets stay disjoint.
  std::vector<std::uint64_t> phantom_ids(total);
  std::set<std::uint64_t> trainval_ids;
  for (std::size_t i = 0; i < n_trainval; ++i) {
    phantom_ids[i] = derive_seed(dcfg.seed, 2 * i);
    trainval_ids.insert(phantom_ids[i]);
  }
  std::uint64_t stream = 0;
  for (std::size_t i = n_trainval; i < total; ++i) {
    do {
      phantom_ids[i] = derive_seed(dcfg.seed, 2 * stream + 1);
      ++stream;
    } while (trainval_ids.count(phantom_ids[i]) != 0);
  }

  Manifest m;
  m.schema_version = kManifestSchemaVersion;
  m.probe_config_hash = probe_config_hash(cfg);
  m.grid_config_hash = grid_config_hash(cfg);
  m.input_kind = to_string(dcfg.input_kind);
  m.pitch_m = cfg.simulation.pitch;
  m.rows = cfg.crop_rows;
  m.cols = cfg.crop_cols;
  const auto [r0, c0] = cfg.crop_offset();
  m.pairs.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    auto& p = m.pairs[i];
    p.input = "inputs/" + pair_name(i);
    p.target = "targets/" + pair_name(i);
    p.split = i < dcfg.n_train ? Split::train : i < n_trainval ? Split::val : Split::test;
    p.provenance = dcfg.provenance;
    p.phantom_id = phantom_ids[i];
    p.crop_offset_mm = {static_cast<double>(c0) * cfg.simulation.pitch * 1e3,
                        static_cast<double>(r0) * cfg.simulation.pitch * 1e3};
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto n = static_cast<long>(total);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      const auto idx = static_cast<std::size_t>(i);
      const std::uint64_t pair_seed = derive_seed(dcfg.seed ^ 0x5eed5eedULL, idx);
      PairOptions opts;
      opts.input_kind = dcfg.input_kind;
      opts.provenance = dcfg.provenance;
      opts.snr = dcfg.snr;
      opts.bandwidth_jitter = dcfg.bandwidth_jitter;
      opts.frequency_jitter = dcfg.frequency_jitter;
      opts.noise_seed = pair_seed;
      BranchingConfig pcfg = cfg.phantom;
      pcfg.grid = cfg.simulation;
      // Draws that leave the crop window empty are rejected: first the
      // augmentation is redrawn, then the phantom itself.
      GroundTruthImage object;
      std::uint64_t draw = 1;
      for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt == kMaxPhantomDraws) {
          throw InvalidArgument("no phantom with structure inside the crop window after " +
                                std::to_string(kMaxPhantomDraws) + " draws");
        }
        const std::uint64_t id =
            attempt == 0 ? phantom_ids[idx] : derive_seed(phantom_ids[idx], attempt);
        const GroundTruthImage phantom = generate_branching_phantom(id, pcfg);
        bool found = false;
        for (std::uint64_t k = 0; k < (dcfg.augment ? kAugmentDrawsPerPhantom : 1); ++k) {
          object = dcfg.augment ? augment(phantom, random_augmentation(derive_seed(pair_seed, draw++)))
                                : phantom;
          const GroundTruthImage window = prepare_ground_truth(
              crop(object, r0, c0, cfg.crop_rows, cfg.crop_cols), cfg.gt_threshold);
          if (max_value(window.pixels) > 0.0f) {
            found = true;
            break;
          }
        }
        if (found) {
          m.pairs[idx].phantom_id = id;
          break;
        }
      }
      const Pair pair = build_pair_from_object(object, opts, cfg);
      write_tensor(root / m.pairs[idx].input, to_tensor(pair.input.image));
      write_tensor(root / m.pairs[idx].target, to_tensor(pair.target));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::set<std::uint64_t> used;
  for (const auto& p : m.pairs) {
    if (p.split != Split::test) used.insert(p.phantom_id);
  }
  for (const auto& p : m.pairs) {
    if (p.split == Split::test && used.count(p.phantom_id) != 0) {
      throw InvalidArgument("phantom seed collision between test and train/val splits");
    }
  }

  write_manifest(root / "manifest", m);
  validate_manifest(m, root);
  return m;
}

}  // namespace patk
