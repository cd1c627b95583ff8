// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_MANIFEST_H_
#define CROSSVIEW_MANIFEST_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crossview/raster.h"

namespace crossview {

enum class Split { kTrain, kTest };

struct ManifestRecord {
  std::string id;
  Split split = Split::kTrain;
  // Modality role -> path. Relative paths are resolved against the manifest
  // directory.
  std::map<RasterRole, std::filesystem::path> paths;
};

struct DatasetManifest {
  std::vector<ManifestRecord> records;
  std::optional<uint64_t> seed;
  // Directory that relative record paths are resolved against.
  std::filesystem::path base_dir;

  std::filesystem::path Resolve(const ManifestRecord& record,
                                RasterRole role) const;
  std::vector<const ManifestRecord*> SplitRecords(Split split) const;
  // Checks id uniqueness and (optionally) that every path exists.
  void Validate(bool check_paths) const;
};

std::string ManifestToJson(const DatasetManifest& manifest);
DatasetManifest ManifestFromJson(const std::string& text,
                                 const std::filesystem::path& base_dir);
void WriteManifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);
DatasetManifest ReadManifest(const std::filesystem::path& path);

// One loaded sample: a raster for every role the record lists.
struct Sample {
  std::string id;
  Split split = Split::kTrain;
  std::map<RasterRole, Raster> rasters;

  const Raster& raster(RasterRole role) const;
  bool has(RasterRole role) const { return rasters.count(role) != 0; }
};

// Loads the listed rasters and checks the ground/satellite size invariants.
Sample LoadSample(const DatasetManifest& manifest, const ManifestRecord& record,
                  const std::vector<RasterRole>& roles);
void ValidateSample(const Sample& sample);

}  // namespace crossview

#endif  // CROSSVIEW_MANIFEST_H_
