#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "patk/error.hpp"
#include "patk/phantom.hpp"
#include "patk/register.hpp"

using namespace patk;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Image reference(std::uint64_t seed) {
  BranchingConfig c;
  c.grid = Grid::centered(96, 96, 40e-6, 0.0, 10e-3);
  c.width_max_px = 10.0;
  return gaussian_blur(generate_branching_phantom(seed, c), 1.0);
}

}  // namespace

TEST(Transform, IdentityIsExact) {
  const Image x = reference(1);
  EXPECT_EQ(apply_transform(x, SimilarityTransform{}).pixels, x.pixels);
}

TEST(Transform, InverseComposesToIdentity) {
  SimilarityTransform t{0.2, 3.0, -1.5, 1.1};
  const SimilarityTransform inv = inverse(t);
  const SimilarityTransform back = inverse(inv);
  EXPECT_NEAR(back.rotation, t.rotation, 1e-12);
  EXPECT_NEAR(back.tx, t.tx, 1e-12);
  EXPECT_NEAR(back.tz, t.tz, 1e-12);
  EXPECT_NEAR(back.scale, t.scale, 1e-12);
}

TEST(Transform, IntegerShiftMovesPixels) {
  const Image x = reference(2);
  SimilarityTransform t;
  t.tx = 2.0;
  t.tz = -3.0;
  const Image y = apply_transform(x, t);
  for (std::size_t r = 10; r < 80; r += 7)
    for (std::size_t c = 10; c < 80; c += 5) EXPECT_FLOAT_EQ(y.at(r - 3, c + 2), x.at(r, c));
}

TEST(Register, SelfIsIdentity) {
  const Image x = reference(3);
  const RegistrationResult r = register_similarity(x, x);
  EXPECT_NEAR(r.score, 1.0, 1e-9);
  EXPECT_NEAR(r.transform.rotation, 0.0, 0.125 * kDeg);
  EXPECT_NEAR(r.transform.tx, 0.0, 0.125);
  EXPECT_NEAR(r.transform.tz, 0.0, 0.125);
  EXPECT_NEAR(r.transform.scale, 1.0, 0.025 / 8);
}

TEST(Register, RecoversRotationAndShift) {
  const Image x = reference(4);
  const SimilarityTransform warp{5.0 * kDeg, 3.0, -2.0, 1.0};
  const Image moving = apply_transform(x, warp);
  const RegistrationResult r = register_similarity(x, moving);
  const SimilarityTransform expect = inverse(warp);
  EXPECT_NEAR(r.transform.rotation, expect.rotation, 0.5 * kDeg);
  EXPECT_NEAR(r.transform.tx, expect.tx, 0.5);
  EXPECT_NEAR(r.transform.tz, expect.tz, 0.5);
  EXPECT_GE(r.score, r.identity_score);
  EXPECT_GE(oracle::pearson(apply_transform(moving, r.transform).pixels, x.pixels), 0.9);
}

TEST(Register, NeverWorseThanIdentity) {
  std::mt19937_64 rng(5);
  for (std::uint64_t s = 0; s < 4; ++s) {
    const Image a = reference(10 + s), b = reference(20 + s);
    const RegistrationResult r = register_similarity(a, b);
    EXPECT_GE(r.score, r.identity_score);
    EXPECT_NEAR(r.score, warped_correlation(a, b, r.transform), 1e-12);
  }
}

TEST(Register, ShapeMismatchAndConstantReference) {
  const Image x = reference(6);
  EXPECT_THROW(register_similarity(x, Image(Grid::centered(10, 10, 1e-4, 0, 0.01))), InvalidArgument);
  EXPECT_THROW(register_similarity(Image(x.grid, 1.0f), x), InvalidArgument);
}
