// SPDX-License-Identifier: Apache-2.0

#include "crossview/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "crossview/error.h"
#include "crossview/geometry.h"
#include "crossview/png_io.h"

namespace crossview {
namespace {

// Satellite palette indices.
constexpr int kHighVegetation = 0;
constexpr int kBuildings = 1;
constexpr int kLowVegetation = 2;
constexpr int kRoads = 3;
constexpr int kCars = 4;
constexpr int kClutter = 5;

// Natural-looking base colors per satellite class.
constexpr std::array<std::array<int, 3>, 6> kBaseColors = {{
    {40, 105, 45},    // high vegetation
    {165, 95, 75},    // buildings
    {125, 170, 85},   // low vegetation
    {105, 105, 110},  // roads
    {200, 40, 40},    // cars
    {175, 160, 125},  // clutter
}};

std::mt19937_64 SampleRng(uint64_t seed, int index, uint32_t stream) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(index), stream};
  return std::mt19937_64(seq);
}

int UniformInt(std::mt19937_64& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(UniformIndex(rng, static_cast<uint64_t>(hi - lo + 1)));
}

double UniformReal(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * UniformUnit(rng);
}

struct Scene {
  ClassGrid classes;
  std::vector<std::array<int, 3>> tint;  // per-pixel region tint
};

Scene BuildScene(uint64_t seed, int index, int size) {
  std::mt19937_64 rng = SampleRng(seed, index, 1);
  Scene scene;
  scene.classes.width = scene.classes.height = size;
  const size_t n = static_cast<size_t>(size) * size;
  scene.classes.classes.assign(n, kLowVegetation);
  scene.tint.assign(n, {0, 0, 0});

  auto random_tint = [&](int amplitude) {
    return std::array<int, 3>{UniformInt(rng, -amplitude, amplitude),
                              UniformInt(rng, -amplitude, amplitude),
                              UniformInt(rng, -amplitude, amplitude)};
  };
  auto paint = [&](int cls, const std::array<int, 3>& tint, auto&& inside) {
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        if (inside(x + 0.5, y + 0.5)) {
          const size_t i = static_cast<size_t>(y) * size + x;
          scene.classes.classes[i] = static_cast<uint8_t>(cls);
          scene.tint[i] = tint;
        }
      }
    }
  };

  // Background field tint varies per scene.
  const auto field = random_tint(25);
  std::fill(scene.tint.begin(), scene.tint.end(), field);

  const int trees = UniformInt(rng, 3, 8);
  for (int t = 0; t < trees; ++t) {
    const double cx = UniformReal(rng, 0, size);
    const double cy = UniformReal(rng, 0, size);
    const double r = UniformReal(rng, size * 0.05, size * 0.15);
    paint(kHighVegetation, random_tint(20), [&](double x, double y) {
      return (x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r;
    });
  }

  const int buildings = UniformInt(rng, 2, 6);
  for (int b = 0; b < buildings; ++b) {
    const double cx = UniformReal(rng, 0, size);
    const double cy = UniformReal(rng, 0, size);
    const double hw = UniformReal(rng, size * 0.05, size * 0.14);
    const double hh = UniformReal(rng, size * 0.05, size * 0.14);
    const double angle = UniformReal(rng, 0, std::numbers::pi);
    const double ca = std::cos(angle), sa = std::sin(angle);
    paint(kBuildings, random_tint(45), [&](double x, double y) {
      const double dx = x - cx, dy = y - cy;
      const double u = dx * ca + dy * sa;
      const double v = -dx * sa + dy * ca;
      return std::abs(u) < hw && std::abs(v) < hh;
    });
  }

  const int roads = UniformInt(rng, 1, 3);
  for (int r = 0; r < roads; ++r) {
    const double angle = UniformReal(rng, 0, std::numbers::pi);
    const double offset = UniformReal(rng, -size * 0.35, size * 0.35);
    const double half = UniformReal(rng, size * 0.03, size * 0.06);
    const double nx = std::cos(angle), ny = std::sin(angle);
    const auto tint = random_tint(15);
    paint(kRoads, tint, [&](double x, double y) {
      const double d = (x - size / 2.0) * nx + (y - size / 2.0) * ny - offset;
      return std::abs(d) < half;
    });
    const int cars = UniformInt(rng, 0, 3);
    for (int c = 0; c < cars; ++c) {
      const double t = UniformReal(rng, -size * 0.45, size * 0.45);
      const double cx = size / 2.0 + offset * nx - t * ny;
      const double cy = size / 2.0 + offset * ny + t * nx;
      const double len = size * 0.025, wid = size * 0.012;
      paint(kCars, random_tint(60), [&](double x, double y) {
        const double dx = x - cx, dy = y - cy;
        const double along = -dx * ny + dy * nx;
        const double across = dx * nx + dy * ny;
        return std::abs(along) < len && std::abs(across) < wid;
      });
    }
  }

  const int clutter = UniformInt(rng, 0, 3);
  for (int c = 0; c < clutter; ++c) {
    const double cx = UniformReal(rng, 0, size);
    const double cy = UniformReal(rng, 0, size);
    const double r = UniformReal(rng, size * 0.02, size * 0.05);
    paint(kClutter, random_tint(30), [&](double x, double y) {
      return (x - cx) * (x - cx) + (y - cy) * (y - cy) < r * r;
    });
  }
  return scene;
}

uint8_t Clamp8(int v) { return static_cast<uint8_t>(std::clamp(v, 0, 255)); }

}  // namespace

int SatelliteToGroundClass(int satellite_class) {
  // high vegetation, buildings, low vegetation, roads, cars, clutter
  static constexpr std::array<int, 6> kMap = {4, 3, 5, 1, 6, 7};
  return kMap.at(satellite_class);
}

ClassGrid GenerateSceneClasses(uint64_t seed, int index, int sat_size) {
  return BuildScene(seed, index, sat_size).classes;
}

RasterSet GenerateSyntheticSample(const SyntheticOptions& options, int index,
                                  const ModelConfig& config) {
  const int size = options.sat_size;
  const Scene scene = BuildScene(options.seed, index, size);
  const SegPalette& sat_palette = SegPalette::Satellite();
  const SegPalette& ground_palette = SegPalette::Ground();

  RasterSet out;
  Raster sat_rgb(size, size, RasterRole::kSatRgb);
  std::mt19937_64 texture = SampleRng(options.seed, index, 2);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const size_t i = static_cast<size_t>(y) * size + x;
      const int cls = scene.classes.classes[i];
      const int grain = UniformInt(texture, -10, 10);
      for (int c = 0; c < 3; ++c) {
        sat_rgb.at(x, y, c) =
            Clamp8(kBaseColors[cls][c] + scene.tint[i][c] + grain);
      }
    }
  }
  const Raster sat_seg =
      EncodeMask(scene.classes, sat_palette, RasterRole::kSatSeg);

  const PolarSpec rgb_spec{config.pano_width, config.pano_height,
                           Sampling::kBilinear};
  const PolarSpec seg_spec{config.pano_width, config.pano_height,
                           Sampling::kNearest};
  Raster ground_rgb = PolarTransform(sat_rgb, rgb_spec).WithRole(
      RasterRole::kGroundRgb);
  std::mt19937_64 noise = SampleRng(options.seed, index, 3);
  for (uint8_t& v : ground_rgb.pixels()) {
    v = Clamp8(v + UniformInt(noise, -options.noise_level,
                              options.noise_level));
  }

  const Raster warped_seg = PolarTransform(sat_seg, seg_spec);
  const ClassGrid warped = DecodeMask(warped_seg, sat_palette);
  ClassGrid ground_classes = warped;
  for (auto& c : ground_classes.classes) {
    c = static_cast<uint8_t>(SatelliteToGroundClass(c));
  }
  Raster ground_seg =
      EncodeMask(ground_classes, ground_palette, RasterRole::kGroundSeg);

  out.emplace(RasterRole::kSatRgb, std::move(sat_rgb));
  out.emplace(RasterRole::kSatSeg, sat_seg);
  out.emplace(RasterRole::kGroundRgb, std::move(ground_rgb));
  out.emplace(RasterRole::kGroundSeg, std::move(ground_seg));

  bool want_depth = false;
  for (const auto& s : config.streams) {
    want_depth |= s.modality == Modality::kDepth;
  }
  if (want_depth) {
    // Nearer for tall structures, farther toward the rim (row 0).
    Raster depth(config.pano_width, config.pano_height,
                 RasterRole::kGroundDepth);
    for (int h = 0; h < config.pano_height; ++h) {
      const double radial =
          static_cast<double>(config.pano_height - h) / config.pano_height;
      for (int w = 0; w < config.pano_width; ++w) {
        double factor = 1.0;
        switch (warped.at(w, h)) {
          case kBuildings: factor = 0.55; break;
          case kCars: factor = 0.4; break;
          case kHighVegetation: factor = 0.75; break;
          default: break;
        }
        depth.at(w, h, 0) = Clamp8(static_cast<int>(
            std::floor(255.0 * radial * factor + 0.5)));
      }
    }
    out.emplace(RasterRole::kGroundDepth, std::move(depth));
  }
  return out;
}

DatasetManifest GenerateSyntheticDataset(const SyntheticOptions& options,
                                         const ModelConfig& config,
                                         const std::filesystem::path& out_dir) {
  if (options.n_samples < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need at least 2 samples");
  }
  if (options.sat_size < 64) {
    throw Error(ErrorCode::kInvalidArgument, "sat_size must be >= 64");
  }
  int n_test = options.n_test >= 0
                   ? options.n_test
                   : static_cast<int>(std::floor(options.n_samples *
                                                 options.test_fraction));
  n_test = std::clamp(n_test, 0, options.n_samples);

  std::filesystem::create_directories(out_dir / "images");
  DatasetManifest manifest;
  manifest.seed = options.seed;
  manifest.base_dir = out_dir;
  for (int i = 0; i < options.n_samples; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "s%05d", i);
    ManifestRecord record;
    record.id = id;
    record.split = i >= options.n_samples - n_test ? Split::kTest : Split::kTrain;
    const RasterSet rasters = GenerateSyntheticSample(options, i, config);
    for (const auto& [role, raster] : rasters) {
      const std::filesystem::path rel =
          std::filesystem::path("images") /
          (record.id + "." + std::string(RoleName(role)) + ".png");
      WritePng(raster, out_dir / rel);
      record.paths[role] = rel;
    }
    manifest.records.push_back(std::move(record));
  }
  WriteManifest(manifest, out_dir / "manifest.json");
  return manifest;
}

}  // namespace crossview
