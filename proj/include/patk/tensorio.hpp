#pragma once

// Binary tensor container shared with external tooling. Layout, all
// little-endian:
//
//   offset 0   4 bytes   magic "PATK"
//   offset 4   u8        format version (1)
//   offset 5   u8        dtype code (0 = float32)
//   offset 6   u8        ndim (1..8)
//   offset 7   ndim x u32 shape
//   then       product(shape) x f32, row-major
//
// The layout is frozen; readers in other languages depend on it.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "patk/image.hpp"

namespace patk {

inline constexpr std::uint8_t kTensorVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 0;
inline constexpr std::size_t kMaxTensorDims = 8;

struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> data;

  std::size_t element_count() const;
  bool operator==(const Tensor&) const = default;
};

/// Encodes a tensor into its on-disk byte sequence.
std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

Tensor to_tensor(const Image& img);
/// Wraps a rank-2 tensor as an image on `grid`; shapes must agree.
Image to_image(const Tensor& t, const Grid& grid);

}  // namespace patk
