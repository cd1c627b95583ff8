// SPDX-License-Identifier: Apache-2.0

#include "crossview/pipeline.h"

#include "crossview/error.h"
#include "crossview/fusion.h"
#include "crossview/geometry.h"

namespace crossview {

RasterSet PrepareRasters(const Sample& sample, const ModelConfig& config) {
  RasterSet out;
  const PolarSpec rgb_spec{config.pano_width, config.pano_height,
                           Sampling::kBilinear};
  const PolarSpec seg_spec{config.pano_width, config.pano_height,
                           Sampling::kNearest};
  for (const auto& stream : config.streams) {
    const RasterRole role = stream.role();
    const Raster& raster = sample.raster(role);
    switch (role) {
      case RasterRole::kSatRgb:
        out.emplace(role, PolarTransform(raster, rgb_spec));
        break;
      case RasterRole::kSatSeg:
        out.emplace(role, PolarTransform(raster, seg_spec));
        break;
      case RasterRole::kGroundSeg:
        out.emplace(role, ResizeNearest(raster, config.pano_width,
                                        config.pano_height));
        break;
      default:
        out.emplace(role,
                    Resize(raster, config.pano_width, config.pano_height));
    }
  }
  return out;
}

RasterSet CropGround(const RasterSet& rasters, double fov_degrees,
                     int start_col) {
  RasterSet out;
  for (const auto& [role, raster] : rasters) {
    if (IsGroundRole(role)) {
      out.emplace(role, FovCrop(raster, fov_degrees, start_col));
    } else {
      out.emplace(role, raster);
    }
  }
  return out;
}

template <typename T>
ViewpointTrace<T> UnifiedFeaturesTraced(const Parameters& params,
                                        const ModelConfig& config,
                                        const RasterSet& rasters,
                                        Viewpoint viewpoint) {
  if (params.streams.size() != config.streams.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "parameters do not match the stream list");
  }
  ViewpointTrace<T> trace;
  trace.stream_indices = config.StreamIndices(viewpoint);
  std::vector<BasicVolume<T>> outputs;
  for (int s : trace.stream_indices) {
    const RasterRole role = config.streams[s].role();
    const auto it = rasters.find(role);
    if (it == rasters.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "missing " + std::string(RoleName(role)) + " raster");
    }
    trace.traces.push_back(
        ForwardTraced(config, params.streams[s], ToRealGrid<T>(it->second)));
    outputs.push_back(trace.traces.back().output());
  }
  if (config.fusion == FusionMode::kPartialSum) {
    std::vector<BasicVolume<T>> aux(outputs.begin() + 1, outputs.end());
    trace.fused = FusePartialSum(outputs[0], aux);
  } else {
    trace.fused = FuseConcat(outputs);
  }
  trace.features = L2Normalize(trace.fused);
  return trace;
}

template <typename T>
void UnifiedFeaturesBackward(const Parameters& params,
                             const ModelConfig& config,
                             const ViewpointTrace<T>& trace,
                             const BasicVolume<T>& upstream,
                             Parameters& grads) {
  const BasicVolume<T> g_fused = L2NormalizeBackward(trace.fused, upstream);
  int offset = 0;
  for (size_t k = 0; k < trace.stream_indices.size(); ++k) {
    const int s = trace.stream_indices[k];
    const BasicVolume<T>& out = trace.traces[k].output();
    BasicVolume<T> g_stream;
    if (config.fusion == FusionMode::kPartialSum) {
      g_stream = SliceChannels(g_fused, 0, out.channels());
    } else {
      g_stream = SliceChannels(g_fused, offset, out.channels());
      offset += out.channels();
    }
    BackwardTraced(config, params.streams[s], trace.traces[k], g_stream,
                   grads.streams[s], /*need_input_grad=*/false);
  }
}

#define CROSSVIEW_INSTANTIATE(T)                                            \
  template ViewpointTrace<T> UnifiedFeaturesTraced<T>(                      \
      const Parameters&, const ModelConfig&, const RasterSet&, Viewpoint);  \
  template void UnifiedFeaturesBackward<T>(                                 \
      const Parameters&, const ModelConfig&, const ViewpointTrace<T>&,      \
      const BasicVolume<T>&, Parameters&);

CROSSVIEW_INSTANTIATE(float)
CROSSVIEW_INSTANTIATE(double)

#undef CROSSVIEW_INSTANTIATE

}  // namespace crossview
