// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_PALETTE_H_
#define CROSSVIEW_PALETTE_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "crossview/raster.h"

namespace crossview {

using Rgb = std::array<uint8_t, 3>;

enum class PaletteKind { kSatellite, kGround };

struct PaletteEntry {
  std::string class_name;
  Rgb color;
};

// Ordered class-index <-> color table for color-coded segmentation masks.
class SegPalette {
 public:
  SegPalette(PaletteKind kind, std::vector<PaletteEntry> entries);

  // high vegetation, buildings, low vegetation, roads, cars, clutter.
  static const SegPalette& Satellite();
  // sky, road, sidewalk, building, vegetation, terrain, vehicle, clutter.
  static const SegPalette& Ground();

  PaletteKind kind() const { return kind_; }
  int size() const { return static_cast<int>(entries_.size()); }
  const PaletteEntry& entry(int index) const { return entries_.at(index); }
  const Rgb& color(int index) const { return entries_.at(index).color; }
  int IndexOf(const std::string& class_name) const;
  // -1 when the color is not in the palette.
  int Lookup(const Rgb& color) const;

 private:
  PaletteKind kind_;
  std::vector<PaletteEntry> entries_;
};

struct ClassGrid {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> classes;  // row-major

  uint8_t at(int x, int y) const {
    return classes[static_cast<size_t>(y) * width + x];
  }
  bool operator==(const ClassGrid&) const = default;
};

// Throws Error(kUnknownColor) naming the first offending pixel.
ClassGrid DecodeMask(const Raster& mask, const SegPalette& palette);
Raster EncodeMask(const ClassGrid& grid, const SegPalette& palette,
                  RasterRole role);

}  // namespace crossview

#endif  // CROSSVIEW_PALETTE_H_
