#pragma once

#include <filesystem>
#include <string>

#include "patk/dataset.hpp"
#include "patk/invert.hpp"

namespace patk {

/// Everything a CLI run needs, read from one JSON document. Absent keys keep
/// their defaults; unknown keys and invalid values are errors.
struct RunConfig {
  PipelineConfig pipeline = default_pipeline_config();
  FistaConfig fista;
  DatasetConfig dataset;
  double noise_snr = 60.0;
  int threads = 0;  ///< 0: runtime default
};

/// Parses and validates. Throws ConfigError listing every invalid field.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON of a config (round-trips through parse_run_config).
std::string to_json(const RunConfig& cfg);

}  // namespace patk
