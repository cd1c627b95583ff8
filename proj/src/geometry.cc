// SPDX-License-Identifier: Apache-2.0

#include "crossview/geometry.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crossview/error.h"

namespace crossview {
namespace {

struct Direction {
  double sin;
  double cos;
};

// sin/cos of 2*pi*w/W built from the first quadrant so that quarter turns
// map to exact sign flips and swaps.
Direction AzimuthDirection(int w, int width) {
  const int quarter = width / 4;
  const int quadrant = w / quarter;
  const int rem = w % quarter;
  const double phi = 2.0 * std::numbers::pi * rem / width;
  const double s0 = std::sin(phi);
  const double c0 = std::cos(phi);
  switch (quadrant) {
    case 0: return {s0, c0};
    case 1: return {c0, -s0};
    case 2: return {-s0, -c0};
    default: return {-c0, s0};
  }
}

int Sign(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

// Pixel index along one axis for a point at `offset` from the image center
// S/2. Points on a pixel boundary go to the side `tie` points to.
int NearestIndex(double offset, int size, int tie) {
  int index;
  if (size % 2 == 0) {
    const double f = std::floor(offset);
    index = size / 2 + static_cast<int>(f);
    if (f == offset && tie < 0) index -= 1;
  } else {
    const double f = std::floor(offset);
    const int k = size / 2;
    if (offset - f == 0.5) {
      index = k + static_cast<int>(f) + (tie > 0 ? 1 : 0);
    } else {
      index = k + static_cast<int>(std::round(offset));
    }
  }
  return std::clamp(index, 0, size - 1);
}

double BilinearAt(const Raster& src, double x, double y, int c) {
  x = std::clamp(x, 0.0, static_cast<double>(src.width() - 1));
  y = std::clamp(y, 0.0, static_cast<double>(src.height() - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, src.width() - 1);
  const int y1 = std::min(y0 + 1, src.height() - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1 - fx) * src.at(x0, y0, c) + fx * src.at(x1, y0, c);
  const double bottom = (1 - fx) * src.at(x0, y1, c) + fx * src.at(x1, y1, c);
  return (1 - fy) * top + fy * bottom;
}

uint8_t RoundHalfUp(double v) {
  return static_cast<uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

void CheckAerial(const Raster& aerial, const PolarSpec& spec) {
  spec.Validate();
  if (aerial.width() != aerial.height()) {
    throw Error(ErrorCode::kNonSquareInput,
                "aerial raster is " + std::to_string(aerial.width()) + "x" +
                    std::to_string(aerial.height()));
  }
  if (aerial.width() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "aerial raster smaller than 2x2");
  }
}

}  // namespace

void PolarSpec::Validate() const {
  if (width < 4 || width % 4 != 0 || height < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "polar target must have width >= 4, divisible by 4, and "
                "height >= 2");
  }
}

std::vector<double> PolarTransformReal(const Raster& aerial,
                                       const PolarSpec& spec) {
  CheckAerial(aerial, spec);
  const int size = aerial.width();
  const int ch = aerial.channels();
  const double center = size / 2.0;
  std::vector<double> out(static_cast<size_t>(spec.width) * spec.height * ch);
  for (int w = 0; w < spec.width; ++w) {
    const Direction dir = AzimuthDirection(w, spec.width);
    for (int h = 0; h < spec.height; ++h) {
      const double radius =
          static_cast<double>(size) * (spec.height - h) / (2.0 * spec.height);
      const double x = center + radius * dir.sin - 0.5;
      const double y = center - radius * dir.cos - 0.5;
      for (int c = 0; c < ch; ++c) {
        out[(static_cast<size_t>(h) * spec.width + w) * ch + c] =
            BilinearAt(aerial, x, y, c);
      }
    }
  }
  return out;
}

Raster PolarTransform(const Raster& aerial, const PolarSpec& spec) {
  CheckAerial(aerial, spec);
  Raster out(spec.width, spec.height, aerial.role());
  if (spec.sampling == Sampling::kBilinear) {
    const auto real = PolarTransformReal(aerial, spec);
    for (size_t i = 0; i < real.size(); ++i) {
      out.pixels()[i] = RoundHalfUp(real[i]);
    }
    return out;
  }
  const int size = aerial.width();
  for (int w = 0; w < spec.width; ++w) {
    const Direction dir = AzimuthDirection(w, spec.width);
    // Boundary points are nudged clockwise along the azimuth, then toward
    // the center; both nudges commute with quarter turns.
    const int tie_x = Sign(dir.cos) != 0 ? Sign(dir.cos) : -Sign(dir.sin);
    const int tie_y = Sign(dir.sin) != 0 ? Sign(dir.sin) : Sign(dir.cos);
    for (int h = 0; h < spec.height; ++h) {
      const double radius =
          static_cast<double>(size) * (spec.height - h) / (2.0 * spec.height);
      const int sx = NearestIndex(radius * dir.sin, size, tie_x);
      const int sy = NearestIndex(-(radius * dir.cos), size, tie_y);
      for (int c = 0; c < aerial.channels(); ++c) {
        out.at(w, h, c) = aerial.at(sx, sy, c);
      }
    }
  }
  return out;
}

int FovCropWidth(int pano_width, double fov_degrees) {
  if (!(fov_degrees > 0.0) || fov_degrees > 360.0) {
    throw Error(ErrorCode::kInvalidArgument, "FoV must lie in (0, 360]");
  }
  const int width =
      static_cast<int>(std::floor(pano_width * fov_degrees / 360.0));
  if (width < 1) {
    throw Error(ErrorCode::kInvalidArgument, "FoV crop would be empty");
  }
  return width;
}

Raster FovCrop(const Raster& pano, double fov_degrees, int start_col) {
  if (start_col < 0 || start_col >= pano.width()) {
    throw Error(ErrorCode::kInvalidArgument, "crop start column out of range");
  }
  const int width = FovCropWidth(pano.width(), fov_degrees);
  Raster out(width, pano.height(), pano.role());
  for (int y = 0; y < pano.height(); ++y) {
    for (int x = 0; x < width; ++x) {
      const int src = (start_col + x) % pano.width();
      for (int c = 0; c < pano.channels(); ++c) {
        out.at(x, y, c) = pano.at(src, y, c);
      }
    }
  }
  return out;
}

uint64_t UniformIndex(std::mt19937_64& rng, uint64_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty range");
  const uint64_t limit = rng.max() - rng.max() % n;
  uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

double UniformUnit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

RollResult RandomRoll(const Raster& pano, std::mt19937_64& rng) {
  const int shift = static_cast<int>(UniformIndex(rng, pano.width()));
  return {RollColumns(pano, shift), shift};
}

Raster Resize(const Raster& raster, int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "resize target must be >= 1");
  }
  if (width == raster.width() && height == raster.height()) return raster;
  Raster out(width, height, raster.role());
  const double scale_x = static_cast<double>(raster.width()) / width;
  const double scale_y = static_cast<double>(raster.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double sy = (y + 0.5) * scale_y - 0.5;
    for (int x = 0; x < width; ++x) {
      const double sx = (x + 0.5) * scale_x - 0.5;
      for (int c = 0; c < raster.channels(); ++c) {
        out.at(x, y, c) = RoundHalfUp(BilinearAt(raster, sx, sy, c));
      }
    }
  }
  return out;
}

Raster ResizeNearest(const Raster& raster, int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::kInvalidArgument, "resize target must be >= 1");
  }
  if (width == raster.width() && height == raster.height()) return raster;
  Raster out(width, height, raster.role());
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(
        raster.height() - 1,
        static_cast<int>((y + 0.5) * raster.height() / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(
          raster.width() - 1,
          static_cast<int>((x + 0.5) * raster.width() / width));
      for (int c = 0; c < raster.channels(); ++c) {
        out.at(x, y, c) = raster.at(sx, sy, c);
      }
    }
  }
  return out;
}

Raster RotateClockwise90(const Raster& raster) {
  if (raster.width() != raster.height()) {
    throw Error(ErrorCode::kNonSquareInput, "rotation needs a square raster");
  }
  const int s = raster.width();
  Raster out(s, s, raster.role());
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      for (int c = 0; c < raster.channels(); ++c) {
        out.at(x, y, c) = raster.at(y, s - 1 - x, c);
      }
    }
  }
  return out;
}

}  // namespace crossview
