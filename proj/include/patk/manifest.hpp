#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace patk {

enum class Split { train, val, test };
enum class Provenance { simulated, noisy };

std::string to_string(Split s);
std::string to_string(Provenance p);
Split parse_split(const std::string& s);
Provenance parse_provenance(const std::string& s);

struct ManifestPair {
  std::string input;   ///< relative to the manifest directory
  std::string target;  ///< relative to the manifest directory
  Split split = Split::train;
  Provenance provenance = Provenance::simulated;
  std::uint64_t phantom_id = 0;
  std::array<double, 2> crop_offset_mm{0.0, 0.0};  ///< (x, z) of the crop within the simulated area

  bool operator==(const ManifestPair&) const = default;
};

/// Index of a paired dataset, serialized as pretty-printed JSON.
struct Manifest {
  int schema_version = 1;
  std::string probe_config_hash;
  std::string grid_config_hash;
  std::string input_kind;  ///< "mBF" or "dmBF"
  double pitch_m = 0.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<ManifestPair> pairs;

  std::size_t count(Split s) const;
  bool operator==(const Manifest&) const = default;
};

inline constexpr int kManifestSchemaVersion = 1;

std::string to_text(const Manifest& m);
Manifest parse_manifest(const std::string& text);

void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

/// Checks that referenced files exist relative to `root` and that no file is
/// shared between splits. Throws FormatError listing every problem found.
void validate_manifest(const Manifest& m, const std::filesystem::path& root);

/// FNV-1a hash of the serialized manifest.
std::string manifest_hash(const Manifest& m);

}  // namespace patk
