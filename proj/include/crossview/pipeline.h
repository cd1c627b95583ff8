// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_PIPELINE_H_
#define CROSSVIEW_PIPELINE_H_

#include <map>
#include <string>
#include <vector>

#include "crossview/feature_volume.h"
#include "crossview/manifest.h"
#include "crossview/model_config.h"
#include "crossview/network.h"
#include "crossview/raster.h"

namespace crossview {

using RasterSet = std::map<RasterRole, Raster>;

// Satellite rasters polar-warped to the panorama geometry (bilinear for
// RGB, nearest for masks so colors stay in the palette); ground rasters
// resized to it (nearest for masks).
RasterSet PrepareRasters(const Sample& sample, const ModelConfig& config);

// Ground rasters cropped to `fov_degrees` starting at `start_col`; satellite
// rasters are passed through unchanged.
RasterSet CropGround(const RasterSet& rasters, double fov_degrees,
                     int start_col);

template <typename T>
struct ViewpointTrace {
  std::vector<int> stream_indices;  // into config.streams, primary first
  std::vector<ForwardTrace<T>> traces;
  BasicVolume<T> fused;
  BasicVolume<T> features;  // fused / ||fused||_F
};

// Forward every stream of the viewpoint, fuse per config.fusion, normalize.
template <typename T>
ViewpointTrace<T> UnifiedFeaturesTraced(const Parameters& params,
                                        const ModelConfig& config,
                                        const RasterSet& rasters,
                                        Viewpoint viewpoint);

template <typename T>
BasicVolume<T> UnifiedFeatures(const Parameters& params,
                               const ModelConfig& config,
                               const RasterSet& rasters, Viewpoint viewpoint) {
  return std::move(
      UnifiedFeaturesTraced<T>(params, config, rasters, viewpoint).features);
}

// Adds d(features)/d(params) * upstream into grads.
template <typename T>
void UnifiedFeaturesBackward(const Parameters& params,
                             const ModelConfig& config,
                             const ViewpointTrace<T>& trace,
                             const BasicVolume<T>& upstream,
                             Parameters& grads);

}  // namespace crossview

#endif  // CROSSVIEW_PIPELINE_H_
