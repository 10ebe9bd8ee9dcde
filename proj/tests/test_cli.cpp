#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(PATK_CLI_PATH) + " -q " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void small_config(const fs::path& p) {
  std::ofstream(p) << R"({"simulation": {"rows": 72, "cols": 72},
                          "crop": {"rows": 48, "cols": 48},
                          "probe": {"n_elements": 24}})";
}

}  // namespace

TEST(Cli, PanelWidthsAdd) {
  const auto dir = oracle::temp_dir("cli_panel");
  small_config(dir / "c.json");
  const std::string cfg = "--config " + (dir / "c.json").string();
  ASSERT_EQ(run(cfg + " phantom --seed 2 --out " + (dir / "ph").string()), 0);
  ASSERT_EQ(run(cfg + " panel --out " + (dir / "pn").string() + " --inputs " +
                (dir / "ph" / "target.patk").string() + " " + (dir / "ph" / "target.patk").string()),
            0);
  const std::string pgm = slurp(dir / "pn" / "panel.pgm");
  EXPECT_EQ(pgm.rfind("P5\n96 48\n255\n", 0), 0u);
  EXPECT_EQ(pgm.size(), std::string("P5\n96 48\n255\n").size() + 96u * 48u);
}

TEST(Cli, ExitCodes) {
  const auto dir = oracle::temp_dir("cli_exit");
  EXPECT_NE(run(""), 0);
  EXPECT_NE(run("nonsense"), 0);
  EXPECT_NE(run("beamform --out " + dir.string() + " --rf " + (dir / "missing.patk").string()), 0);
  std::ofstream(dir / "bad.json") << R"({"probe": {"n_elements": 0}})";
  EXPECT_EQ(run("--config " + (dir / "bad.json").string() + " phantom --out " + dir.string()), 3);
  std::ofstream(dir / "junk.patk") << "not a tensor";
  EXPECT_EQ(run("beamform --out " + (dir / "o").string() + " --rf " + (dir / "junk.patk").string()), 1);
}

TEST(Cli, SimulateBeamformDeterministic) {
  const auto dir = oracle::temp_dir("cli_det");
  small_config(dir / "c.json");
  const std::string cfg = "--config " + (dir / "c.json").string();
  for (const char* run_dir : {"a", "b"}) {
    const fs::path out = dir / run_dir;
    ASSERT_EQ(run(cfg + " simulate --seed 4 --snr 60 --noise-seed 3 --out " + (out / "sim").string()), 0);
    ASSERT_EQ(run(cfg + " beamform --rf " + (out / "sim" / "rf.patk").string() + " --out " +
                  (out / "bf").string()),
              0);
  }
  EXPECT_EQ(slurp(dir / "a" / "sim" / "rf.patk"), slurp(dir / "b" / "sim" / "rf.patk"));
  EXPECT_EQ(slurp(dir / "a" / "bf" / "beamformed.patk"), slurp(dir / "b" / "bf" / "beamformed.patk"));
  EXPECT_FALSE(slurp(dir / "a" / "bf" / "beamformed.pgm").empty());
}
