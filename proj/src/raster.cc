// SPDX-License-Identifier: Apache-2.0

#include "crossview/raster.h"

#include <array>
#include <string>

#include "crossview/error.h"

namespace crossview {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownColor: return "UnknownColor";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kDimensionOverflow: return "DimensionOverflow";
    case ErrorCode::kNonSquareInput: return "NonSquareInput";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInputTooNarrow: return "InputTooNarrow";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kChannelOverflow: return "ChannelOverflow";
    case ErrorCode::kNonSquare: return "NonSquare";
    case ErrorCode::kEmptyRanks: return "EmptyRanks";
    case ErrorCode::kDatasetTooSmall: return "DatasetTooSmall";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
  }
  return "Error";
}

namespace {

constexpr std::array<std::pair<RasterRole, std::string_view>, 5> kRoleNames = {{
    {RasterRole::kGroundRgb, "ground_rgb"},
    {RasterRole::kGroundSeg, "ground_seg"},
    {RasterRole::kSatRgb, "sat_rgb"},
    {RasterRole::kSatSeg, "sat_seg"},
    {RasterRole::kGroundDepth, "ground_depth"},
}};

}  // namespace

std::string_view RoleName(RasterRole role) {
  for (const auto& [r, name] : kRoleNames) {
    if (r == role) return name;
  }
  return "unknown";
}

std::optional<RasterRole> ParseRole(std::string_view name) {
  for (const auto& [r, n] : kRoleNames) {
    if (n == name) return r;
  }
  return std::nullopt;
}

int RoleChannels(RasterRole role) {
  return role == RasterRole::kGroundDepth ? 1 : 3;
}

bool IsGroundRole(RasterRole role) {
  return role == RasterRole::kGroundRgb || role == RasterRole::kGroundSeg ||
         role == RasterRole::kGroundDepth;
}

bool IsSegRole(RasterRole role) {
  return role == RasterRole::kGroundSeg || role == RasterRole::kSatSeg;
}

Raster::Raster(int width, int height, RasterRole role)
    : width_(width), height_(height), channels_(RoleChannels(role)),
      role_(role),
      pixels_(static_cast<size_t>(width) * height * RoleChannels(role), 0) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "raster dimensions must be >= 1");
  }
}

Raster::Raster(int width, int height, RasterRole role,
               std::vector<uint8_t> pixels)
    : width_(width), height_(height), channels_(RoleChannels(role)),
      role_(role), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "raster dimensions must be >= 1");
  }
  if (pixels_.size() != static_cast<size_t>(width) * height * channels_) {
    throw Error(ErrorCode::kShapeMismatch,
                "pixel buffer length " + std::to_string(pixels_.size()) +
                    " != " + std::to_string(width) + "x" +
                    std::to_string(height) + "x" + std::to_string(channels_));
  }
}

Raster Raster::WithRole(RasterRole role) const {
  if (RoleChannels(role) != channels_) {
    throw Error(ErrorCode::kShapeMismatch, "role channel count differs");
  }
  Raster out = *this;
  out.role_ = role;
  return out;
}

Raster RollColumns(const Raster& raster, int shift) {
  const int w_total = raster.width();
  const int s = ((shift % w_total) + w_total) % w_total;
  Raster out(raster.width(), raster.height(), raster.role());
  const int ch = raster.channels();
  for (int y = 0; y < raster.height(); ++y) {
    for (int x = 0; x < w_total; ++x) {
      const int dst = (x + s) % w_total;
      for (int c = 0; c < ch; ++c) out.at(dst, y, c) = raster.at(x, y, c);
    }
  }
  return out;
}

}  // namespace crossview
