#include "patk/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "patk/error.hpp"
#include "patk/hash.hpp"

namespace patk {

using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

std::string to_string(Provenance p) {
  return p == Provenance::simulated ? "simulated" : "noisy";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw FormatError("unknown split tag '" + s + "'");
}

Provenance parse_provenance(const std::string& s) {
  if (s == "simulated") return Provenance::simulated;
  if (s == "noisy") return Provenance::noisy;
  throw FormatError("unknown provenance tag '" + s + "'");
}

std::size_t Manifest::count(Split s) const {
  std::size_t n = 0;
  for (const auto& p : pairs) n += p.split == s ? 1 : 0;
  return n;
}

std::string to_text(const Manifest& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["probe_config_hash"] = m.probe_config_hash;
  j["grid_config_hash"] = m.grid_config_hash;
  j["input_kind"] = m.input_kind;
  j["pitch_m"] = m.pitch_m;
  j["shape"] = {m.rows, m.cols};
  json pairs = json::array();
  for (const auto& p : m.pairs) {
    pairs.push_back({{"input", p.input},
                     {"target", p.target},
                     {"split", to_string(p.split)},
                     {"provenance", to_string(p.provenance)},
                     {"phantom_id", p.phantom_id},
                     {"crop_offset_mm", {p.crop_offset_mm[0], p.crop_offset_mm[1]}}});
  }
  j["pairs"] = std::move(pairs);
  return j.dump(2) + "\n";
}

Manifest parse_manifest(const std::string& text) {
  try {
    const json j = json::parse(text);
    Manifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kManifestSchemaVersion) {
      throw FormatError("unsupported manifest schema version " + std::to_string(m.schema_version));
    }
    m.probe_config_hash = j.at("probe_config_hash").get<std::string>();
    m.grid_config_hash = j.at("grid_config_hash").get<std::string>();
    m.input_kind = j.at("input_kind").get<std::string>();
    m.pitch_m = j.at("pitch_m").get<double>();
    m.rows = j.at("shape").at(0).get<std::size_t>();
    m.cols = j.at("shape").at(1).get<std::size_t>();
    for (const auto& e : j.at("pairs")) {
      ManifestPair p;
      p.input = e.at("input").get<std::string>();
      p.target = e.at("target").get<std::string>();
      p.split = parse_split(e.at("split").get<std::string>());
      p.provenance = parse_provenance(e.at("provenance").get<std::string>());
      p.phantom_id = e.at("phantom_id").get<std::uint64_t>();
      p.crop_offset_mm = {e.at("crop_offset_mm").at(0).get<double>(),
                          e.at("crop_offset_mm").at(1).get<double>()};
      m.pairs.push_back(std::move(p));
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_text(m);
  if (!out) throw IoError("write failed for " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

void validate_manifest(const Manifest& m, const std::filesystem::path& root) {
  std::vector<std::string> problems;
  std::map<std::string, Split> owner;
  for (const auto& p : m.pairs) {
    for (const auto& rel : {p.input, p.target}) {
      if (!std::filesystem::exists(root / rel)) problems.push_back("missing file " + rel);
      auto [it, inserted] = owner.emplace(rel, p.split);
      if (!inserted) {
        problems.push_back("file " + rel + " referenced more than once (" +
                           to_string(it->second) + ", " + to_string(p.split) + ")");
      }
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid manifest:";
    for (const auto& s : problems) msg += "\n  " + s;
    throw FormatError(msg);
  }
}

std::string manifest_hash(const Manifest& m) { return hex64(fnv1a64(to_text(m))); }

}  // namespace patk
