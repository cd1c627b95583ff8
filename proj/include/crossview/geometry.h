// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_GEOMETRY_H_
#define CROSSVIEW_GEOMETRY_H_

#include <cstdint>
#include <random>
#include <vector>

#include "crossview/raster.h"

namespace crossview {

enum class Sampling { kBilinear, kNearest };

struct PolarSpec {
  int width = 512;   // azimuth bins, multiple of 4
  int height = 128;  // radial bins
  Sampling sampling = Sampling::kBilinear;

  void Validate() const;
};

// Aerial-to-panorama warp. Output column w looks along azimuth 2*pi*w/W,
// measured clockwise from image-up; row h samples radius
// (S/2) * (H - h) / H from the image center, so row 0 is the outer rim.
// Source coordinates treat pixel i as covering [i, i + 1).
Raster PolarTransform(const Raster& aerial, const PolarSpec& spec);

// Unrounded bilinear warp, values in [0, 255]; same layout as the raster.
std::vector<double> PolarTransformReal(const Raster& aerial,
                                       const PolarSpec& spec);

// floor(pano_width * fov / 360).
int FovCropWidth(int pano_width, double fov_degrees);

// Columns start_col, start_col + 1, ... (cyclic) of the panorama.
Raster FovCrop(const Raster& pano, double fov_degrees, int start_col);

struct RollResult {
  Raster raster;
  int shift = 0;
};

// Uniform circular column shift in [0, width).
RollResult RandomRoll(const Raster& pano, std::mt19937_64& rng);

// Bilinear resampling with half-pixel centers; results round half up.
Raster Resize(const Raster& raster, int width, int height);

// Nearest-neighbor resampling with half-pixel centers (for masks).
Raster ResizeNearest(const Raster& raster, int width, int height);

// Rotates a square raster clockwise by 90 degrees.
Raster RotateClockwise90(const Raster& raster);

// Unbiased integer in [0, n) from a 64-bit engine (portable, unlike
// std::uniform_int_distribution).
uint64_t UniformIndex(std::mt19937_64& rng, uint64_t n);
// Uniform double in [0, 1).
double UniformUnit(std::mt19937_64& rng);

}  // namespace crossview

#endif  // CROSSVIEW_GEOMETRY_H_
