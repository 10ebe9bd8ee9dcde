#include <gtest/gtest.h>

#include <fstream>

#include "oracles.hpp"
#include "patk/error.hpp"
#include "patk/manifest.hpp"

using namespace patk;

namespace {

Manifest sample_manifest() {
  Manifest m;
  m.probe_config_hash = "00000000deadbeef";
  m.grid_config_hash = "0123456789abcdef";
  m.input_kind = "mBF";
  m.pitch_m = 40e-6;
  m.rows = 4;
  m.cols = 4;
  for (int i = 0; i < 3; ++i) {
    ManifestPair p;
    p.input = "inputs/000" + std::to_string(i) + ".patk";
    p.target = "targets/000" + std::to_string(i) + ".patk";
    p.split = i == 0 ? Split::train : i == 1 ? Split::val : Split::test;
    p.provenance = i == 2 ? Provenance::noisy : Provenance::simulated;
    p.phantom_id = 1000u + static_cast<unsigned>(i);
    p.crop_offset_mm = {1.0, 2.5};
    m.pairs.push_back(p);
  }
  return m;
}

void touch(const std::filesystem::path& p) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p) << "x";
}

}  // namespace

TEST(Manifest, TextRoundTrip) {
  const Manifest m = sample_manifest();
  const Manifest back = parse_manifest(to_text(m));
  EXPECT_EQ(back.pairs, m.pairs);
  EXPECT_EQ(back.probe_config_hash, m.probe_config_hash);
  EXPECT_EQ(back.rows, m.rows);
  EXPECT_EQ(to_text(back), to_text(m));
  EXPECT_EQ(manifest_hash(back), manifest_hash(m));
}

TEST(Manifest, HashTracksContent) {
  Manifest a = sample_manifest();
  Manifest b = a;
  b.pairs[1].phantom_id += 1;
  EXPECT_NE(manifest_hash(a), manifest_hash(b));
  EXPECT_EQ(manifest_hash(a).size(), 16u);
}

TEST(Manifest, ValidateChecksFiles) {
  const auto dir = oracle::temp_dir("manifest_files");
  Manifest m = sample_manifest();
  for (const auto& p : m.pairs) {
    touch(dir / p.input);
    touch(dir / p.target);
  }
  EXPECT_NO_THROW(validate_manifest(m, dir));
  std::filesystem::remove(dir / m.pairs[2].target);
  EXPECT_THROW(validate_manifest(m, dir), FormatError);
}

TEST(Manifest, ValidateRejectsSharedFiles) {
  const auto dir = oracle::temp_dir("manifest_shared");
  Manifest m = sample_manifest();
  m.pairs[2].input = m.pairs[0].input;
  for (const auto& p : m.pairs) {
    touch(dir / p.input);
    touch(dir / p.target);
  }
  EXPECT_THROW(validate_manifest(m, dir), FormatError);
}

TEST(Manifest, RejectsMalformedText) {
  EXPECT_THROW(parse_manifest("not json"), FormatError);
  std::string text = to_text(sample_manifest());
  const auto pos = text.find("\"val\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 5, "\"dev\"");
  EXPECT_THROW(parse_manifest(text), FormatError);
}

TEST(Manifest, FileRoundTrip) {
  const auto dir = oracle::temp_dir("manifest_rt");
  const Manifest m = sample_manifest();
  write_manifest(dir / "manifest", m);
  EXPECT_EQ(read_manifest(dir / "manifest").pairs, m.pairs);
}
