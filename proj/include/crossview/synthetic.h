// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_SYNTHETIC_H_
#define CROSSVIEW_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>

#include "crossview/manifest.h"
#include "crossview/model_config.h"
#include "crossview/palette.h"
#include "crossview/pipeline.h"

namespace crossview {

struct SyntheticOptions {
  uint64_t seed = 0;
  int n_samples = 0;
  int sat_size = 128;
  // Fraction of samples assigned to the test split (the last ones).
  double test_fraction = 1.0 / 3.0;
  // Number of test samples; overrides test_fraction when >= 0.
  int n_test = -1;
  // Ground uniform pixel noise amplitude in 8-bit levels.
  int noise_level = 8;
};

// Scene class map for one sample, in satellite palette indices.
ClassGrid GenerateSceneClasses(uint64_t seed, int index, int sat_size);

// All rasters of one synthetic sample. Ground rasters have the config's
// panorama size; the depth raster is present only if the config has a
// depth stream.
RasterSet GenerateSyntheticSample(const SyntheticOptions& options, int index,
                                  const ModelConfig& config);

// Writes <out_dir>/images/<id>.<role>.png and <out_dir>/manifest.json.
// Byte-identical output for identical arguments.
DatasetManifest GenerateSyntheticDataset(const SyntheticOptions& options,
                                         const ModelConfig& config,
                                         const std::filesystem::path& out_dir);

// Satellite class index -> ground class index.
int SatelliteToGroundClass(int satellite_class);

}  // namespace crossview

#endif  // CROSSVIEW_SYNTHETIC_H_
