// SPDX-License-Identifier: Apache-2.0

#include "crossview/manifest.h"

#include <fstream>
#include <set>
#include <sstream>

#include "crossview/error.h"
#include "crossview/png_io.h"
#include "json.hpp"

namespace crossview {

using nlohmann::json;

std::filesystem::path DatasetManifest::Resolve(const ManifestRecord& record,
                                               RasterRole role) const {
  const auto it = record.paths.find(role);
  if (it == record.paths.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample " + record.id + " has no " +
                    std::string(RoleName(role)) + " raster");
  }
  if (it->second.is_absolute()) return it->second;
  return base_dir / it->second;
}

std::vector<const ManifestRecord*> DatasetManifest::SplitRecords(
    Split split) const {
  std::vector<const ManifestRecord*> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(&r);
  }
  return out;
}

void DatasetManifest::Validate(bool check_paths) const {
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate sample id " + r.id);
    }
    if (!check_paths) continue;
    for (const auto& [role, _] : r.paths) {
      const auto path = Resolve(r, role);
      if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::kIo, "missing file " + path.string());
      }
    }
  }
}

std::string ManifestToJson(const DatasetManifest& manifest) {
  json records = json::array();
  for (const auto& r : manifest.records) {
    json paths = json::object();
    for (const auto& [role, path] : r.paths) {
      paths[std::string(RoleName(role))] = path.generic_string();
    }
    records.push_back({{"id", r.id},
                       {"split", r.split == Split::kTrain ? "train" : "test"},
                       {"paths", paths}});
  }
  json doc = {{"records", records}};
  doc["seed"] = manifest.seed ? json(*manifest.seed) : json(nullptr);
  return doc.dump(2) + "\n";
}

DatasetManifest ManifestFromJson(const std::string& text,
                                 const std::filesystem::path& base_dir) {
  DatasetManifest manifest;
  manifest.base_dir = base_dir;
  try {
    const json doc = json::parse(text);
    if (doc.contains("seed") && !doc["seed"].is_null()) {
      manifest.seed = doc["seed"].get<uint64_t>();
    }
    for (const auto& rec : doc.at("records")) {
      ManifestRecord r;
      r.id = rec.at("id").get<std::string>();
      const std::string split = rec.at("split").get<std::string>();
      if (split == "train") {
        r.split = Split::kTrain;
      } else if (split == "test") {
        r.split = Split::kTest;
      } else {
        throw Error(ErrorCode::kInvalidArgument,
                    "unknown split '" + split + "' for " + r.id);
      }
      for (const auto& [name, path] : rec.at("paths").items()) {
        const auto role = ParseRole(name);
        if (!role) {
          throw Error(ErrorCode::kInvalidArgument,
                      "unknown modality '" + name + "' for " + r.id);
        }
        r.paths[*role] = path.get<std::string>();
      }
      manifest.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed manifest: ") + e.what());
  }
  manifest.Validate(false);
  return manifest;
}

void WriteManifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  out << ManifestToJson(manifest);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

DatasetManifest ReadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ManifestFromJson(buffer.str(), path.parent_path());
}

const Raster& Sample::raster(RasterRole role) const {
  const auto it = rasters.find(role);
  if (it == rasters.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample " + id + " lacks " + std::string(RoleName(role)));
  }
  return it->second;
}

void ValidateSample(const Sample& sample) {
  const Raster* ground = nullptr;
  const Raster* sat = nullptr;
  for (const auto& [role, raster] : sample.rasters) {
    if (raster.channels() != RoleChannels(role)) {
      throw Error(ErrorCode::kShapeMismatch,
                  sample.id + ": wrong channel count for " +
                      std::string(RoleName(role)));
    }
    const Raster*& ref = IsGroundRole(role) ? ground : sat;
    if (ref == nullptr) {
      ref = &raster;
    } else if (ref->width() != raster.width() ||
               ref->height() != raster.height()) {
      throw Error(ErrorCode::kShapeMismatch,
                  sample.id + ": rasters of one viewpoint differ in size");
    }
  }
  if (sat != nullptr && sat->width() != sat->height()) {
    throw Error(ErrorCode::kNonSquareInput,
                sample.id + ": satellite rasters must be square");
  }
}

Sample LoadSample(const DatasetManifest& manifest, const ManifestRecord& record,
                  const std::vector<RasterRole>& roles) {
  Sample sample;
  sample.id = record.id;
  sample.split = record.split;
  for (RasterRole role : roles) {
    sample.rasters.emplace(role, ReadPng(manifest.Resolve(record, role), role));
  }
  ValidateSample(sample);
  return sample;
}

}  // namespace crossview
