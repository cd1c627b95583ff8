// SPDX-License-Identifier: Apache-2.0

#include "crossview/feature_volume.h"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>

namespace crossview {
namespace {

constexpr char kMagic[4] = {'F', 'V', 'O', 'L'};
constexpr size_t kHeaderBytes = 16;
// Largest payload the reader accepts (in elements).
constexpr uint64_t kMaxElements = uint64_t{1} << 31;

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t GetU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

}  // namespace

std::vector<uint8_t> EncodeFeatureVolume(const FeatureVolume& volume) {
  std::vector<uint8_t> out;
  out.reserve(kHeaderBytes + volume.size() * 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  PutU32(out, static_cast<uint32_t>(volume.width()));
  PutU32(out, static_cast<uint32_t>(volume.height()));
  PutU32(out, static_cast<uint32_t>(volume.channels()));
  for (float v : volume.values()) PutU32(out, std::bit_cast<uint32_t>(v));
  return out;
}

FeatureVolume DecodeFeatureVolume(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic),
                                      bytes.begin())) {
    throw Error(ErrorCode::kBadMagic, "missing FVOL magic");
  }
  if (bytes.size() < kHeaderBytes) {
    throw Error(ErrorCode::kTruncatedFile, "header is incomplete");
  }
  const uint32_t w = GetU32(&bytes[4]);
  const uint32_t h = GetU32(&bytes[8]);
  const uint32_t c = GetU32(&bytes[12]);
  const uint64_t limit = std::numeric_limits<int>::max();
  if (w == 0 || h == 0 || c == 0 || w > limit || h > limit || c > limit) {
    throw Error(ErrorCode::kDimensionOverflow,
                "invalid dimensions " + std::to_string(w) + "x" +
                    std::to_string(h) + "x" + std::to_string(c));
  }
  const uint64_t n = uint64_t{w} * h;
  if (n > kMaxElements || n * c > kMaxElements) {
    throw Error(ErrorCode::kDimensionOverflow, "volume too large");
  }
  const uint64_t count = n * c;
  if (bytes.size() != kHeaderBytes + count * 4) {
    throw Error(ErrorCode::kTruncatedFile,
                "expected " + std::to_string(kHeaderBytes + count * 4) +
                    " bytes, found " + std::to_string(bytes.size()));
  }
  std::vector<float> values(count);
  for (uint64_t i = 0; i < count; ++i) {
    values[i] = std::bit_cast<float>(GetU32(&bytes[kHeaderBytes + 4 * i]));
  }
  return FeatureVolume(static_cast<int>(w), static_cast<int>(h),
                       static_cast<int>(c), std::move(values));
}

void WriteFeatureVolume(const FeatureVolume& volume,
                        const std::filesystem::path& path) {
  const auto bytes = EncodeFeatureVolume(volume);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

FeatureVolume ReadFeatureVolume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return DecodeFeatureVolume(bytes);
}

}  // namespace crossview
