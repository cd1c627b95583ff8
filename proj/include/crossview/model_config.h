// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_MODEL_CONFIG_H_
#define CROSSVIEW_MODEL_CONFIG_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crossview/raster.h"

namespace crossview {

enum class Modality { kRgb, kSeg, kDepth };
enum class Viewpoint { kGround, kSatellite };
enum class FusionMode { kPartialSum, kConcat };
enum class LayerKind { kConv, kMaxPool, kRelu };
enum class WidthPadding { kWrap, kZero };
enum class HeightPadding { kZero, kValid };
enum class Variant { kDuo, kTripleSat, kTripleGrd, kQuad, kQuintuple };

std::string_view ModalityName(Modality m);
std::string_view ViewpointName(Viewpoint v);
std::string_view FusionName(FusionMode f);
std::string_view VariantName(Variant v);
std::optional<Variant> ParseVariant(std::string_view name);
std::optional<FusionMode> ParseFusion(std::string_view name);

struct LayerSpec {
  LayerKind kind = LayerKind::kConv;
  int kernel_h = 3;
  int kernel_w = 3;
  int stride_h = 1;
  int stride_w = 1;
  WidthPadding width_padding = WidthPadding::kWrap;
  HeightPadding height_padding = HeightPadding::kZero;
  // Conv only. 0 on the final conv means "use the stream's channel budget".
  int out_channels = 0;
  bool frozen = false;

  static LayerSpec Conv(int out_channels, int stride_h = 1, int stride_w = 1);
  static LayerSpec MaxPool();
  static LayerSpec Relu();
};

struct StreamConfig {
  Modality modality = Modality::kRgb;
  Viewpoint viewpoint = Viewpoint::kGround;
  int out_channels = 16;

  RasterRole role() const;
  std::string name() const;  // e.g. "ground_rgb"
  int in_channels() const { return modality == Modality::kDepth ? 1 : 3; }
};

struct ModelConfig {
  std::vector<StreamConfig> streams;
  std::vector<LayerSpec> layers;
  FusionMode fusion = FusionMode::kPartialSum;
  int freeze_depth = 2;
  double alpha = 10.0;
  // Input panorama geometry; satellite images are polar-warped to it and
  // ground images resized to it.
  int pano_width = 512;
  int pano_height = 128;
  // Streams of the same modality on both viewpoints start from identical
  // weights, the way branches initialized from one pretrained backbone do.
  bool tie_viewpoint_init = true;

  // 3 x (conv-relu-pool), then conv(2,1)-relu, conv(2,1)-relu, conv(1,1):
  // 512x128 -> 64x4.
  static std::vector<LayerSpec> DefaultLayers();
  static ModelConfig ForVariant(Variant variant,
                                FusionMode fusion = FusionMode::kPartialSum);

  int NumConvLayers() const;
  // Sets `frozen` on the first freeze_depth conv layers and clears the rest.
  void ApplyFreezeDepth();
  // Throws Error(kInvalidConfig) naming the violated invariant.
  void Validate() const;

  std::vector<int> StreamIndices(Viewpoint viewpoint) const;
  // Index of the rgb stream of a viewpoint.
  int PrimaryStream(Viewpoint viewpoint) const;
  std::vector<RasterRole> Roles() const;

  // Output (width, height) of the layer stack for an input size.
  std::pair<int, int> OutputSize(int in_width, int in_height) const;
};

std::string ModelConfigToJson(const ModelConfig& config);
ModelConfig ModelConfigFromJson(const std::string& text);

}  // namespace crossview

#endif  // CROSSVIEW_MODEL_CONFIG_H_
