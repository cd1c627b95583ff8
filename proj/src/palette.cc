// SPDX-License-Identifier: Apache-2.0

#include "crossview/palette.h"

#include <set>
#include <sstream>

#include "crossview/error.h"

namespace crossview {

SegPalette::SegPalette(PaletteKind kind, std::vector<PaletteEntry> entries)
    : kind_(kind), entries_(std::move(entries)) {
  std::set<Rgb> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.color).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate palette color for class " + e.class_name);
    }
  }
  if (entries_.empty() || entries_.size() > 255) {
    throw Error(ErrorCode::kInvalidArgument, "palette size out of range");
  }
}

const SegPalette& SegPalette::Satellite() {
  static const SegPalette palette(PaletteKind::kSatellite,
                                  {
                                      {"high_vegetation", {0, 255, 0}},
                                      {"buildings", {0, 0, 255}},
                                      {"low_vegetation", {0, 255, 255}},
                                      {"roads", {255, 255, 255}},
                                      {"cars", {255, 255, 0}},
                                      {"clutter", {255, 0, 0}},
                                  });
  return palette;
}

const SegPalette& SegPalette::Ground() {
  static const SegPalette palette(PaletteKind::kGround,
                                  {
                                      {"sky", {70, 130, 180}},
                                      {"road", {128, 64, 128}},
                                      {"sidewalk", {244, 35, 232}},
                                      {"building", {70, 70, 70}},
                                      {"vegetation", {107, 142, 35}},
                                      {"terrain", {152, 251, 152}},
                                      {"vehicle", {0, 0, 142}},
                                      {"clutter", {220, 20, 60}},
                                  });
  return palette;
}

int SegPalette::IndexOf(const std::string& class_name) const {
  for (int i = 0; i < size(); ++i) {
    if (entries_[i].class_name == class_name) return i;
  }
  return -1;
}

int SegPalette::Lookup(const Rgb& color) const {
  for (int i = 0; i < size(); ++i) {
    if (entries_[i].color == color) return i;
  }
  return -1;
}

ClassGrid DecodeMask(const Raster& mask, const SegPalette& palette) {
  if (!IsSegRole(mask.role()) || mask.channels() != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "decode_mask expects a 3-channel segmentation raster");
  }
  ClassGrid grid;
  grid.width = mask.width();
  grid.height = mask.height();
  grid.classes.resize(static_cast<size_t>(grid.width) * grid.height);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const Rgb color = {mask.at(x, y, 0), mask.at(x, y, 1), mask.at(x, y, 2)};
      const int index = palette.Lookup(color);
      if (index < 0) {
        std::ostringstream msg;
        msg << "pixel (" << x << ", " << y << ") has color ("
            << int(color[0]) << ", " << int(color[1]) << ", "
            << int(color[2]) << ")";
        throw Error(ErrorCode::kUnknownColor, msg.str());
      }
      grid.classes[static_cast<size_t>(y) * grid.width + x] =
          static_cast<uint8_t>(index);
    }
  }
  return grid;
}

Raster EncodeMask(const ClassGrid& grid, const SegPalette& palette,
                  RasterRole role) {
  Raster out(grid.width, grid.height, role);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      const Rgb& color = palette.color(grid.at(x, y));
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = color[c];
    }
  }
  return out;
}

}  // namespace crossview
