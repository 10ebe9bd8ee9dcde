#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "patk/error.hpp"
#include "patk/tensorio.hpp"

using patk::Tensor;

namespace {

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& p, const std::vector<std::uint8_t>& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

}  // namespace

TEST(TensorIo, TwoByTwoHandEncoded) {
  const auto dir = oracle::temp_dir("tensor_2x2");
  patk::write_tensor(dir / "t.patk", Tensor{{2, 2}, {1.0f, 2.0f, 3.0f, 4.0f}});
  const auto bytes = slurp(dir / "t.patk");
  ASSERT_EQ(bytes.size(), 31u);

  // IEEE-754 single: 1.0 = 0x3f800000, 2.0 = 0x40000000, 3.0 = 0x40400000, 4.0 = 0x40800000
  std::vector<std::uint8_t> expected{'P', 'A', 'T', 'K', 1, 0, 2};
  put_le32(expected, 2);
  put_le32(expected, 2);
  for (std::uint32_t bits : {0x3f800000u, 0x40000000u, 0x40400000u, 0x40800000u}) {
    put_le32(expected, bits);
  }
  EXPECT_EQ(bytes, expected);
}

TEST(TensorIo, EmptyShapeRejected) {
  const auto dir = oracle::temp_dir("tensor_empty");
  EXPECT_THROW(patk::write_tensor(dir / "t.patk", Tensor{{}, {}}), patk::InvalidArgument);
  EXPECT_THROW(patk::write_tensor(dir / "t.patk", Tensor{{2, 0}, {}}), patk::InvalidArgument);
}

TEST(TensorIo, BadMagic) {
  const auto dir = oracle::temp_dir("tensor_magic");
  auto bytes = patk::encode_tensor(Tensor{{1}, {5.0f}});
  std::memcpy(bytes.data(), "XXXX", 4);
  spit(dir / "t.patk", bytes);
  try {
    patk::read_tensor(dir / "t.patk");
    FAIL() << "expected a format error";
  } catch (const patk::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
}

TEST(TensorIo, TruncatedPayload) {
  const auto dir = oracle::temp_dir("tensor_trunc");
  auto bytes = patk::encode_tensor(Tensor{{2, 2}, {1, 2, 3, 4}});
  bytes.resize(bytes.size() - 3);
  spit(dir / "t.patk", bytes);
  try {
    patk::read_tensor(dir / "t.patk");
    FAIL() << "expected a format error";
  } catch (const patk::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
  }
}

TEST(TensorIo, TrailingBytesAndBadVersionRejected) {
  auto bytes = patk::encode_tensor(Tensor{{1}, {5.0f}});
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(patk::decode_tensor(longer), patk::FormatError);
  auto wrong = bytes;
  wrong[4] = 2;
  EXPECT_THROW(patk::decode_tensor(wrong), patk::FormatError);
}

TEST(TensorIo, RoundTrip128) {
  const auto dir = oracle::temp_dir("tensor_rt");
  Tensor t{{128, 128}, oracle::normal_vector(128 * 128, 9)};
  patk::write_tensor(dir / "t.patk", t);
  EXPECT_EQ(patk::read_tensor(dir / "t.patk"), t);
}

TEST(TensorIo, RoundTripRandomShapesUpToRank4) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> rank(1, 4), extent(1, 7);
  std::uniform_int_distribution<std::uint32_t> bits;
  for (int trial = 0; trial < 200; ++trial) {
    Tensor t;
    const int r = rank(rng);
    std::size_t n = 1;
    for (int i = 0; i < r; ++i) {
      t.shape.push_back(static_cast<std::uint32_t>(extent(rng)));
      n *= t.shape.back();
    }
    t.data.resize(n);
    for (float& v : t.data) {
      // Arbitrary finite bit patterns, including subnormals and negative zero.
      std::uint32_t b = bits(rng);
      if (((b >> 23) & 0xff) == 0xff) b &= ~(1u << 30);
      std::memcpy(&v, &b, 4);
    }
    const auto bytes = patk::encode_tensor(t);
    EXPECT_EQ(bytes.size(), 4 + 1 + 1 + 1 + 4 * t.shape.size() + 4 * n);
    const Tensor back = patk::decode_tensor(bytes);
    ASSERT_EQ(back.shape, t.shape);
    EXPECT_EQ(std::memcmp(back.data.data(), t.data.data(), 4 * n), 0);
    EXPECT_EQ(patk::encode_tensor(back), bytes);
  }
}

TEST(TensorIo, ImageConversion) {
  const patk::Grid g{3, 2, 1e-4, 0.0, 0.01};
  patk::Image img(g, std::vector<float>{1, 2, 3, 4, 5, 6});
  const Tensor t = patk::to_tensor(img);
  EXPECT_EQ(t.shape, (std::vector<std::uint32_t>{3, 2}));
  EXPECT_EQ(patk::to_image(t, g).pixels, img.pixels);
  EXPECT_THROW(patk::to_image(t, patk::Grid{2, 3, 1e-4, 0.0, 0.01}), patk::InvalidArgument);
}
