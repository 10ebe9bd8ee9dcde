#include "patk/tensorio.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "patk/error.hpp"

namespace patk {
namespace {

constexpr char kMagic[4] = {'P', 'A', 'T', 'K'};
constexpr std::size_t kFixedHeader = 7;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.shape.empty()) throw InvalidArgument("tensor shape is empty");
  if (t.shape.size() > kMaxTensorDims) {
    throw InvalidArgument("tensor has " + std::to_string(t.shape.size()) +
                          " dimensions; at most 8 are supported");
  }
  for (auto d : t.shape) {
    if (d == 0) throw InvalidArgument("tensor dimension of size 0");
  }
  if (t.element_count() != t.data.size()) {
    throw InvalidArgument("tensor data length does not match its shape");
  }

  std::vector<std::uint8_t> out;
  out.reserve(kFixedHeader + 4 * t.shape.size() + 4 * t.data.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kTensorVersion);
  out.push_back(kDtypeFloat32);
  out.push_back(static_cast<std::uint8_t>(t.shape.size()));
  for (auto d : t.shape) put_u32(out, d);
  for (float v : t.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Tensor decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kFixedHeader) throw FormatError("tensor header truncated");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic, not a PATK tensor");
  if (bytes[4] != kTensorVersion) {
    throw FormatError("unsupported tensor version " + std::to_string(bytes[4]));
  }
  if (bytes[5] != kDtypeFloat32) {
    throw FormatError("unsupported tensor dtype " + std::to_string(bytes[5]));
  }
  const std::size_t ndim = bytes[6];
  if (ndim == 0 || ndim > kMaxTensorDims) {
    throw FormatError("invalid tensor rank " + std::to_string(ndim));
  }
  if (bytes.size() < kFixedHeader + 4 * ndim) throw FormatError("tensor shape truncated");

  Tensor t;
  t.shape.resize(ndim);
  for (std::size_t i = 0; i < ndim; ++i) {
    t.shape[i] = get_u32(bytes.data() + kFixedHeader + 4 * i);
    if (t.shape[i] == 0) throw FormatError("tensor dimension of size 0");
  }
  const std::size_t offset = kFixedHeader + 4 * ndim;
  const std::size_t n = t.element_count();
  if (bytes.size() - offset < 4 * n) {
    throw FormatError("tensor payload truncated: expected " + std::to_string(4 * n) +
                      " bytes, found " + std::to_string(bytes.size() - offset));
  }
  if (bytes.size() - offset > 4 * n) throw FormatError("trailing bytes after tensor payload");
  t.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.data[i] = std::bit_cast<float>(get_u32(bytes.data() + offset + 4 * i));
  }
  return t;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_tensor(bytes);
}

Tensor to_tensor(const Image& img) {
  return Tensor{{static_cast<std::uint32_t>(img.rows()), static_cast<std::uint32_t>(img.cols())},
                img.pixels};
}

Image to_image(const Tensor& t, const Grid& grid) {
  if (t.shape.size() != 2 || t.shape[0] != grid.rows || t.shape[1] != grid.cols) {
    throw InvalidArgument("tensor shape does not match the configured grid " +
                          std::to_string(grid.rows) + "x" + std::to_string(grid.cols));
  }
  return Image(grid, t.data);
}

}  // namespace patk
