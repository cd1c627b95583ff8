// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_RASTER_H_
#define CROSSVIEW_RASTER_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crossview {

enum class RasterRole { kGroundRgb, kGroundSeg, kSatRgb, kSatSeg, kGroundDepth };

std::string_view RoleName(RasterRole role);
std::optional<RasterRole> ParseRole(std::string_view name);
int RoleChannels(RasterRole role);
bool IsGroundRole(RasterRole role);
bool IsSegRole(RasterRole role);

// 8-bit image, row-major with interleaved channels.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, RasterRole role);
  Raster(int width, int height, RasterRole role, std::vector<uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  RasterRole role() const { return role_; }

  uint8_t at(int x, int y, int c) const {
    return pixels_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  uint8_t& at(int x, int y, int c) {
    return pixels_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  const std::vector<uint8_t>& pixels() const { return pixels_; }
  std::vector<uint8_t>& pixels() { return pixels_; }

  // Same pixels under another role; channel counts must agree.
  Raster WithRole(RasterRole role) const;

  bool operator==(const Raster& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 3;
  RasterRole role_ = RasterRole::kGroundRgb;
  std::vector<uint8_t> pixels_;
};

// Circular shift of columns to the right by `shift` (negative shifts left).
Raster RollColumns(const Raster& raster, int shift);

}  // namespace crossview

#endif  // CROSSVIEW_RASTER_H_
