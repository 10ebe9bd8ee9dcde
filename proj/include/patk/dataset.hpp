#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "patk/acoustics.hpp"
#include "patk/beamform.hpp"
#include "patk/manifest.hpp"
#include "patk/phantom.hpp"

namespace patk {

/// Physical setup shared by every pipeline stage: the large simulated area,
/// the centred reconstruction window, probe, medium and phantom generator.
struct PipelineConfig {
  Grid simulation;              ///< 10 x 10 mm by default
  std::size_t crop_rows = 128;
  std::size_t crop_cols = 128;
  ProbeConfig probe;            ///< n_samples sized to cover `simulation`
  Medium medium;
  AcousticModel model;
  BranchingConfig phantom;      ///< its grid is `simulation`
  double gt_threshold = kDefaultGroundTruthThreshold;

  Grid crop_grid() const;
  std::pair<std::size_t, std::size_t> crop_offset() const;
};

PipelineConfig default_pipeline_config();

std::string to_string(BeamformKind k);  ///< "mBF" / "dmBF"
BeamformKind parse_beamform_kind(const std::string& s);

struct DatasetConfig {
  std::size_t n_train = 200;
  std::size_t n_val = 40;
  std::size_t n_test = 15;
  BeamformKind input_kind = BeamformKind::mbf;
  Provenance provenance = Provenance::simulated;
  double snr = 60.0;                ///< noisy provenance only
  double bandwidth_jitter = 0.05;   ///< noisy provenance: +- relative
  double frequency_jitter = 0.02;   ///< noisy provenance: +- relative
  std::uint64_t seed = 1;
  bool augment = true;
};

void validate(const DatasetConfig& cfg);

/// Per-pair settings beyond the phantom: the provenance decides whether the
/// response is jittered and noise added, both seeded by `noise_seed`.
struct PairOptions {
  BeamformKind input_kind = BeamformKind::mbf;
  Provenance provenance = Provenance::simulated;
  double snr = 60.0;
  double bandwidth_jitter = 0.05;
  double frequency_jitter = 0.02;
  std::uint64_t noise_seed = 0;
};

struct Pair {
  BeamformedImage input;   ///< on the crop grid, scaled to max |value| = 1
  GroundTruthImage target; ///< on the crop grid, thresholded and max-normalized
};

/// Simulates the full area of `object`, beamforms the centred window and crops
/// the matching target.
Pair build_pair_from_object(const GroundTruthImage& object, const PairOptions& opts,
                            const PipelineConfig& cfg);

/// generate -> augment -> build_pair_from_object. Deterministic.
Pair build_pair(std::uint64_t phantom_seed, const AugmentSpec& aug, const PairOptions& opts,
                const PipelineConfig& cfg);

/// Seeded random augmentation: rotation, mirror, one shear axis, radial scale.
AugmentSpec random_augmentation(std::uint64_t seed);

/// Canonical text of the probe/medium/model and of the grids, hashed into the
/// manifest.
std::string probe_config_hash(const PipelineConfig& cfg);
std::string grid_config_hash(const PipelineConfig& cfg);

/// Writes `<root>/manifest`, `<root>/inputs/NNNN.patk` and
/// `<root>/targets/NNNN.patk`. Test phantoms never share a seed with train or
/// val phantoms. Refuses a non-empty `root` unless `force`.
Manifest build_dataset(const DatasetConfig& dcfg, const PipelineConfig& cfg,
                       const std::filesystem::path& root, bool force = false);

}  // namespace patk
