// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "crossview/error.h"
#include "crossview/geometry.h"
#include "test_util.h"

namespace crossview {
namespace {

using testing::RandomRaster;

// Scalar reimplementation of the warp using plain sin/cos.
double PolarOracle(const Raster& src, int out_w, int out_h, int w, int h,
                   int c) {
  const int s = src.width();
  const double theta = 2.0 * std::numbers::pi * w / out_w;
  const double r = s * (out_h - h) / (2.0 * out_h);
  double x = s / 2.0 + r * std::sin(theta) - 0.5;
  double y = s / 2.0 - r * std::cos(theta) - 0.5;
  x = std::min(std::max(x, 0.0), s - 1.0);
  y = std::min(std::max(y, 0.0), s - 1.0);
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, s - 1);
  const int y1 = std::min(y0 + 1, s - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  return src.at(x0, y0, c) * (1 - fx) * (1 - fy) +
         src.at(x1, y0, c) * fx * (1 - fy) +
         src.at(x0, y1, c) * (1 - fx) * fy + src.at(x1, y1, c) * fx * fy;
}

double ResizeOracle(const Raster& src, int out_w, int out_h, int x, int y,
                    int c) {
  const double sx = std::clamp((x + 0.5) * src.width() / out_w - 0.5, 0.0,
                               src.width() - 1.0);
  const double sy = std::clamp((y + 0.5) * src.height() / out_h - 0.5, 0.0,
                               src.height() - 1.0);
  const int x0 = static_cast<int>(sx);
  const int y0 = static_cast<int>(sy);
  const int x1 = std::min(x0 + 1, src.width() - 1);
  const int y1 = std::min(y0 + 1, src.height() - 1);
  const double fx = sx - x0;
  const double fy = sy - y0;
  return src.at(x0, y0, c) * (1 - fx) * (1 - fy) +
         src.at(x1, y0, c) * fx * (1 - fy) +
         src.at(x0, y1, c) * (1 - fx) * fy + src.at(x1, y1, c) * fx * fy;
}

TEST(Polar, OutputShape) {
  std::mt19937_64 rng(1);
  const Raster sat = RandomRaster(rng, 100, 100, RasterRole::kSatRgb);
  const Raster pano = PolarTransform(sat, {});
  EXPECT_EQ(pano.width(), 512);
  EXPECT_EQ(pano.height(), 128);
  EXPECT_EQ(pano.channels(), 3);
}

TEST(Polar, ColumnZeroLooksNorth) {
  Raster sat(128, 128, RasterRole::kSatRgb);
  for (int y = 0; y < 64; ++y) {
    for (int c = 0; c < 3; ++c) {
      sat.at(63, y, c) = 200;
      sat.at(64, y, c) = 200;
    }
  }
  for (Sampling sampling : {Sampling::kBilinear, Sampling::kNearest}) {
    const Raster pano = PolarTransform(sat, {512, 128, sampling});
    for (int h = 0; h < 128; ++h) {
      EXPECT_EQ(pano.at(0, h, 0), 200) << "row " << h;
      EXPECT_EQ(pano.at(256, h, 0), 0) << "row " << h;
    }
  }
}

TEST(Polar, QuarterTurnIsQuarterRoll) {
  std::mt19937_64 rng(2);
  for (int size : {64, 65, 128, 129, 370}) {
    const Raster sat = RandomRaster(rng, size, size, RasterRole::kSatSeg);
    const PolarSpec spec{512, 128, Sampling::kNearest};
    const Raster rotated = PolarTransform(RotateClockwise90(sat), spec);
    const Raster rolled = RollColumns(PolarTransform(sat, spec), 128);
    EXPECT_EQ(rotated, rolled) << "size " << size;
  }
}

TEST(Polar, MatchesScalarOracle) {
  std::mt19937_64 rng(3);
  const Raster sat = RandomRaster(rng, 370, 370, RasterRole::kSatRgb);
  const PolarSpec spec{512, 128, Sampling::kBilinear};
  const auto real = PolarTransformReal(sat, spec);
  const Raster pano = PolarTransform(sat, spec);
  double worst = 0.0;
  for (int h = 0; h < 128; ++h) {
    for (int w = 0; w < 512; ++w) {
      for (int c = 0; c < 3; ++c) {
        const double want = PolarOracle(sat, 512, 128, w, h, c);
        const double got = real[(static_cast<size_t>(h) * 512 + w) * 3 + c];
        worst = std::max(worst, std::abs(want - got));
        ASSERT_LE(std::abs(want - pano.at(w, h, c)), 0.5 + 1e-9);
      }
    }
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Polar, RejectsNonSquare) {
  const Raster sat(10, 12, RasterRole::kSatRgb);
  try {
    PolarTransform(sat, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonSquareInput);
  }
}

TEST(Fov, WidthsForStandardFovs) {
  EXPECT_EQ(FovCropWidth(512, 360), 512);
  EXPECT_EQ(FovCropWidth(512, 180), 256);
  EXPECT_EQ(FovCropWidth(512, 90), 128);
  EXPECT_EQ(FovCropWidth(512, 70), 99);
}

TEST(Fov, FullCropIsIdentity) {
  std::mt19937_64 rng(4);
  const Raster pano = RandomRaster(rng, 512, 8, RasterRole::kGroundRgb);
  EXPECT_EQ(FovCrop(pano, 360, 0), pano);
}

TEST(Fov, CropWraps) {
  Raster pano(512, 1, RasterRole::kGroundDepth);
  for (int x = 0; x < 512; ++x) pano.at(x, 0, 0) = static_cast<uint8_t>(x);
  const Raster crop = FovCrop(pano, 180, 400);
  ASSERT_EQ(crop.width(), 256);
  for (int x = 0; x < 256; ++x) {
    EXPECT_EQ(crop.at(x, 0, 0), static_cast<uint8_t>((400 + x) % 512));
  }
}

TEST(Roll, ZeroAndInverse) {
  std::mt19937_64 rng(5);
  const Raster pano = RandomRaster(rng, 37, 5, RasterRole::kGroundRgb);
  EXPECT_EQ(RollColumns(pano, 0), pano);
  for (int shift : {1, 7, 36}) {
    EXPECT_EQ(RollColumns(RollColumns(pano, shift), 37 - shift), pano);
  }
}

TEST(Roll, ShiftsAreUniform) {
  std::mt19937_64 rng(6);
  constexpr int kWidth = 512;
  constexpr int kDraws = 10000;
  std::vector<int> counts(kWidth, 0);
  const Raster pano(kWidth, 1, RasterRole::kGroundDepth);
  for (int i = 0; i < kDraws; ++i) {
    const RollResult r = RandomRoll(pano, rng);
    ASSERT_GE(r.shift, 0);
    ASSERT_LT(r.shift, kWidth);
    ++counts[r.shift];
  }
  const double p = 1.0 / kWidth;
  const double mean = kDraws * p;
  const double sigma = std::sqrt(kDraws * p * (1 - p));
  for (int s = 0; s < kWidth; ++s) {
    EXPECT_LE(std::abs(counts[s] - mean), 5 * sigma) << "shift " << s;
  }
}

TEST(Roll, RollMovesContent) {
  Raster pano(8, 1, RasterRole::kGroundDepth);
  pano.at(0, 0, 0) = 9;
  EXPECT_EQ(RollColumns(pano, 3).at(3, 0, 0), 9);
}

TEST(Resize, OwnSizeIsIdentity) {
  std::mt19937_64 rng(7);
  const Raster r = RandomRaster(rng, 19, 11, RasterRole::kGroundRgb);
  EXPECT_EQ(Resize(r, 19, 11), r);
  EXPECT_EQ(ResizeNearest(r, 19, 11), r);
}

TEST(Resize, CheckerboardRoundsHalfUp) {
  Raster r(2, 2, RasterRole::kGroundDepth);
  r.at(1, 0, 0) = 255;
  r.at(0, 1, 0) = 255;
  EXPECT_EQ(Resize(r, 1, 1).at(0, 0, 0), 128);
}

TEST(Resize, MatchesScalarOracle) {
  std::mt19937_64 rng(8);
  const Raster src = RandomRaster(rng, 1232, 224, RasterRole::kGroundRgb);
  const Raster out = Resize(src, 512, 128);
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 512; ++x) {
      for (int c = 0; c < 3; ++c) {
        ASSERT_LE(std::abs(ResizeOracle(src, 512, 128, x, y, c) -
                           out.at(x, y, c)),
                  1.0);
      }
    }
  }
}

TEST(Resize, NearestKeepsPaletteColors) {
  Raster mask(6, 2, RasterRole::kGroundSeg);
  for (int x = 3; x < 6; ++x) {
    for (int y = 0; y < 2; ++y) mask.at(x, y, 2) = 142;
  }
  const Raster out = ResizeNearest(mask, 4, 1);
  for (int x = 0; x < 4; ++x) {
    EXPECT_EQ(out.at(x, 0, 2), x < 2 ? 0 : 142);
  }
}

TEST(Random, UnitIntervalAndIndexRange) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = UniformUnit(rng);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(UniformIndex(rng, 3), 3u);
  }
}

TEST(Fov, FullCropEqualsRoll) {
  std::mt19937_64 rng(10);
  const Raster pano = RandomRaster(rng, 64, 3, RasterRole::kGroundRgb);
  for (int s : {0, 1, 17, 63}) {
    EXPECT_EQ(FovCrop(pano, 360, s), RollColumns(pano, -s));
  }
}

TEST(Fov, WidthMonotoneInFov) {
  int prev = 0;
  for (int fov = 1; fov <= 360; ++fov) {
    const int w = FovCropWidth(512, fov);
    EXPECT_GE(w, prev);
    prev = w;
  }
}

}  // namespace
}  // namespace crossview
