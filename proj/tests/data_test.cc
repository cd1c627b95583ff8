// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "crossview/error.h"
#include "crossview/feature_volume.h"
#include "crossview/fusion.h"
#include "crossview/geometry.h"
#include "crossview/manifest.h"
#include "crossview/matching.h"
#include "crossview/network.h"
#include "crossview/palette.h"
#include "crossview/png_io.h"
#include "crossview/synthetic.h"
#include "test_util.h"

namespace crossview {
namespace {

using testing::RandomVolume;
using testing::ReadBytes;
using testing::ScratchDir;

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no crossview::Error thrown";
  return ErrorCode::kUnknownColor;
}

TEST(Palette, GreenIsHighVegetation) {
  const auto& p = SegPalette::Satellite();
  EXPECT_EQ(p.Lookup({0, 255, 0}), 0);
  EXPECT_EQ(p.entry(0).class_name, "high_vegetation");
}

TEST(Palette, WhiteRasterDecodesToRoads) {
  Raster white(5, 3, RasterRole::kSatSeg);
  std::fill(white.pixels().begin(), white.pixels().end(), 255);
  const ClassGrid grid = DecodeMask(white, SegPalette::Satellite());
  for (uint8_t c : grid.classes) EXPECT_EQ(c, 3);
}

TEST(Palette, UnknownColorRejected) {
  Raster mask(2, 2, RasterRole::kSatSeg);
  mask.at(1, 1, 0) = 17;
  EXPECT_EQ(CodeOf([&] { DecodeMask(mask, SegPalette::Satellite()); }),
            ErrorCode::kUnknownColor);
}

TEST(Palette, EncodeDecodeRoundTrip) {
  std::mt19937_64 rng(3);
  for (const SegPalette* palette :
       {&SegPalette::Satellite(), &SegPalette::Ground()}) {
    const RasterRole role = palette->kind() == PaletteKind::kSatellite
                                ? RasterRole::kSatSeg
                                : RasterRole::kGroundSeg;
    for (int trial = 0; trial < 20; ++trial) {
      ClassGrid grid{13, 7, std::vector<uint8_t>(13 * 7)};
      std::uniform_int_distribution<int> cls(0, palette->size() - 1);
      for (auto& c : grid.classes) c = static_cast<uint8_t>(cls(rng));
      const Raster mask = EncodeMask(grid, *palette, role);
      EXPECT_EQ(DecodeMask(mask, *palette), grid);
      EXPECT_EQ(EncodeMask(DecodeMask(mask, *palette), *palette, role), mask);
    }
  }
}

TEST(FeatureVolumeFile, MinimalVolumeLayout) {
  FeatureVolume v(1, 1, 1, {0.5f});
  const auto bytes = EncodeFeatureVolume(v);
  ASSERT_EQ(bytes.size(), 20u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FVOL");
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(bytes[4 + 4 * i], 1);
    EXPECT_EQ(bytes[5 + 4 * i], 0);
  }
  // 0.5f == 0x3F000000, little endian.
  EXPECT_EQ(bytes[16], 0x00);
  EXPECT_EQ(bytes[17], 0x00);
  EXPECT_EQ(bytes[18], 0x00);
  EXPECT_EQ(bytes[19], 0x3F);
}

TEST(FeatureVolumeFile, RandomRoundTripIsBitExact) {
  std::mt19937_64 rng(11);
  const FeatureVolume v = RandomVolume(rng, 64, 4, 16, -1e3, 1e3);
  const auto dir = ScratchDir("fvol");
  WriteFeatureVolume(v, dir / "v.fvol");
  const FeatureVolume back = ReadFeatureVolume(dir / "v.fvol");
  ASSERT_TRUE(back.SameShape(v));
  EXPECT_EQ(std::memcmp(back.data(), v.data(), v.size() * sizeof(float)), 0);
}

TEST(FeatureVolumeFile, RejectsMalformedInput) {
  auto bytes = EncodeFeatureVolume(FeatureVolume(64, 4, 16));
  auto zero_width = bytes;
  zero_width[4] = zero_width[5] = 0;
  EXPECT_EQ(CodeOf([&] { DecodeFeatureVolume(zero_width); }),
            ErrorCode::kDimensionOverflow);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(CodeOf([&] { DecodeFeatureVolume(bad_magic); }),
            ErrorCode::kBadMagic);
  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_EQ(CodeOf([&] { DecodeFeatureVolume(truncated); }),
            ErrorCode::kTruncatedFile);
}

TEST(Png, RoundTripPreservesPixels) {
  std::mt19937_64 rng(5);
  const auto dir = ScratchDir("png");
  for (RasterRole role : {RasterRole::kSatRgb, RasterRole::kGroundDepth}) {
    const Raster r = testing::RandomRaster(rng, 31, 17, role);
    WritePng(r, dir / "r.png");
    EXPECT_EQ(ReadPng(dir / "r.png", role), r);
  }
}

TEST(Manifest, JsonRoundTrip) {
  DatasetManifest m;
  m.seed = 42;
  m.records.push_back({"a", Split::kTrain,
                       {{RasterRole::kGroundRgb, "images/a.ground_rgb.png"},
                        {RasterRole::kSatRgb, "images/a.sat_rgb.png"}}});
  m.records.push_back({"b", Split::kTest,
                       {{RasterRole::kGroundRgb, "images/b.ground_rgb.png"},
                        {RasterRole::kSatRgb, "images/b.sat_rgb.png"}}});
  const DatasetManifest back = ManifestFromJson(ManifestToJson(m), "/base");
  ASSERT_EQ(back.records.size(), 2u);
  EXPECT_EQ(back.seed, m.seed);
  EXPECT_EQ(back.records[1].id, "b");
  EXPECT_EQ(back.records[1].split, Split::kTest);
  EXPECT_EQ(back.Resolve(back.records[0], RasterRole::kSatRgb),
            std::filesystem::path("/base/images/a.sat_rgb.png"));
  EXPECT_EQ(back.SplitRecords(Split::kTest).size(), 1u);
}

TEST(Manifest, DuplicateIdsRejected) {
  DatasetManifest m;
  m.records.push_back({"a", Split::kTrain, {}});
  m.records.push_back({"a", Split::kTest, {}});
  EXPECT_EQ(CodeOf([&] { m.Validate(false); }), ErrorCode::kInvalidArgument);
}

TEST(Synthetic, SameSeedGivesIdenticalFiles) {
  SyntheticOptions options;
  options.seed = 7;
  options.n_samples = 4;
  const ModelConfig config = ModelConfig::ForVariant(Variant::kQuad);
  const auto a = ScratchDir("synth_a");
  const auto b = ScratchDir("synth_b");
  const DatasetManifest ma = GenerateSyntheticDataset(options, config, a);
  GenerateSyntheticDataset(options, config, b);
  EXPECT_EQ(ReadBytes(a / "manifest.json"), ReadBytes(b / "manifest.json"));
  int files = 0;
  for (const auto& rec : ma.records) {
    for (const auto& [role, rel] : rec.paths) {
      EXPECT_EQ(ReadBytes(a / rel), ReadBytes(b / rel)) << rel;
      ++files;
    }
  }
  EXPECT_EQ(files, 16);
}

TEST(Synthetic, MasksDecodeAndSamplesValidate) {
  SyntheticOptions options;
  options.seed = 9;
  options.n_samples = 6;
  const ModelConfig config = ModelConfig::ForVariant(Variant::kQuintuple);
  for (int i = 0; i < options.n_samples; ++i) {
    const RasterSet set = GenerateSyntheticSample(options, i, config);
    ASSERT_EQ(set.size(), 5u);
    EXPECT_NO_THROW(DecodeMask(set.at(RasterRole::kGroundSeg),
                               SegPalette::Ground()));
    EXPECT_NO_THROW(DecodeMask(set.at(RasterRole::kSatSeg),
                               SegPalette::Satellite()));
    Sample sample{"x", Split::kTrain, set};
    EXPECT_NO_THROW(ValidateSample(sample));
  }
}

TEST(Synthetic, GroundMaskIsNearestWarpOfSatelliteMask) {
  SyntheticOptions options;
  options.seed = 2;
  options.n_samples = 2;
  const ModelConfig config = ModelConfig::ForVariant(Variant::kQuad);
  const RasterSet set = GenerateSyntheticSample(options, 1, config);
  const Raster warped =
      PolarTransform(set.at(RasterRole::kSatSeg),
                     {config.pano_width, config.pano_height, Sampling::kNearest});
  const ClassGrid sat = DecodeMask(warped, SegPalette::Satellite());
  const ClassGrid grd =
      DecodeMask(set.at(RasterRole::kGroundSeg), SegPalette::Ground());
  ASSERT_EQ(sat.classes.size(), grd.classes.size());
  for (size_t i = 0; i < sat.classes.size(); ++i) {
    ASSERT_EQ(SatelliteToGroundClass(sat.classes[i]), grd.classes[i]);
  }
}

TEST(Synthetic, GroundNoiseIsBounded) {
  SyntheticOptions options;
  options.seed = 4;
  options.n_samples = 2;
  const ModelConfig config = ModelConfig::ForVariant(Variant::kDuo);
  const RasterSet set = GenerateSyntheticSample(options, 0, config);
  const Raster clean =
      PolarTransform(set.at(RasterRole::kSatRgb),
                     {config.pano_width, config.pano_height, Sampling::kBilinear});
  const Raster& noisy = set.at(RasterRole::kGroundRgb);
  int differing = 0;
  for (size_t i = 0; i < clean.pixels().size(); ++i) {
    const int d = std::abs(int(clean.pixels()[i]) - int(noisy.pixels()[i]));
    ASSERT_LE(d, options.noise_level);
    differing += d != 0;
  }
  EXPECT_GT(differing, 0);
}

TEST(Synthetic, OwnSatelliteCorrelatesBestAtZeroShift) {
  SyntheticOptions options;
  options.seed = 12;
  options.n_samples = 8;
  const ModelConfig config = ModelConfig::ForVariant(Variant::kDuo);
  const PolarSpec spec{config.pano_width, config.pano_height,
                       Sampling::kBilinear};
  for (int i = 0; i < options.n_samples; ++i) {
    const RasterSet set = GenerateSyntheticSample(options, i, config);
    // Identity extractor: pixels themselves are the features.
    auto centered = [](FeatureVolume v) {
      double mean = 0;
      for (float x : v.values()) mean += x;
      mean /= v.size();
      for (float& x : v.values()) x -= static_cast<float>(mean);
      return L2Normalize(v);
    };
    const FeatureVolume aerial = centered(
        ToRealGrid<float>(PolarTransform(set.at(RasterRole::kSatRgb), spec)));
    const FeatureVolume ground =
        centered(ToRealGrid<float>(set.at(RasterRole::kGroundRgb)));
    const auto scores = CyclicCorrelation(aerial, ground);
    EXPECT_EQ(EstimateOrientation(scores), 0) << "sample " << i;
  }
}

}  // namespace
}  // namespace crossview
