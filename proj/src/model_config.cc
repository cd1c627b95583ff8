// SPDX-License-Identifier: Apache-2.0

#include "crossview/model_config.h"

#include <array>
#include <cmath>
#include <set>

#include "crossview/error.h"
#include "json.hpp"

namespace crossview {

using nlohmann::json;

namespace {

template <typename E, size_t N>
std::string_view NameOf(const std::array<std::pair<E, std::string_view>, N>&
                            table,
                        E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "unknown";
}

template <typename E, size_t N>
std::optional<E> Parse(const std::array<std::pair<E, std::string_view>, N>&
                           table,
                       std::string_view name) {
  for (const auto& [e, n] : table) {
    if (n == name) return e;
  }
  return std::nullopt;
}

constexpr std::array<std::pair<Modality, std::string_view>, 3> kModalities = {
    {{Modality::kRgb, "rgb"}, {Modality::kSeg, "seg"},
     {Modality::kDepth, "depth"}}};
constexpr std::array<std::pair<Viewpoint, std::string_view>, 2> kViewpoints = {
    {{Viewpoint::kGround, "ground"}, {Viewpoint::kSatellite, "satellite"}}};
constexpr std::array<std::pair<FusionMode, std::string_view>, 2> kFusions = {
    {{FusionMode::kPartialSum, "partial_sum"},
     {FusionMode::kConcat, "concat"}}};
constexpr std::array<std::pair<Variant, std::string_view>, 5> kVariants = {
    {{Variant::kDuo, "duo"},
     {Variant::kTripleSat, "triple_sat"},
     {Variant::kTripleGrd, "triple_grd"},
     {Variant::kQuad, "quad"},
     {Variant::kQuintuple, "quintuple"}}};
constexpr std::array<std::pair<LayerKind, std::string_view>, 3> kKinds = {
    {{LayerKind::kConv, "conv"}, {LayerKind::kMaxPool, "maxpool"},
     {LayerKind::kRelu, "relu"}}};
constexpr std::array<std::pair<WidthPadding, std::string_view>, 2>
    kWidthPaddings = {
        {{WidthPadding::kWrap, "wrap"}, {WidthPadding::kZero, "zero"}}};
constexpr std::array<std::pair<HeightPadding, std::string_view>, 2>
    kHeightPaddings = {
        {{HeightPadding::kZero, "zero"}, {HeightPadding::kValid, "valid"}}};

[[noreturn]] void Invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidConfig, what);
}

template <typename E, size_t N>
E ParseOrThrow(const std::array<std::pair<E, std::string_view>, N>& table,
               const json& value, const char* field) {
  const auto parsed = Parse(table, value.get<std::string>());
  if (!parsed) {
    Invalid(std::string("unknown ") + field + " '" +
            value.get<std::string>() + "'");
  }
  return *parsed;
}

}  // namespace

std::string_view ModalityName(Modality m) { return NameOf(kModalities, m); }
std::string_view ViewpointName(Viewpoint v) { return NameOf(kViewpoints, v); }
std::string_view FusionName(FusionMode f) { return NameOf(kFusions, f); }
std::string_view VariantName(Variant v) { return NameOf(kVariants, v); }
std::optional<Variant> ParseVariant(std::string_view name) {
  return Parse(kVariants, name);
}
std::optional<FusionMode> ParseFusion(std::string_view name) {
  if (name == "sum") return FusionMode::kPartialSum;
  return Parse(kFusions, name);
}

LayerSpec LayerSpec::Conv(int out_channels, int stride_h, int stride_w) {
  LayerSpec spec;
  spec.kind = LayerKind::kConv;
  spec.out_channels = out_channels;
  spec.stride_h = stride_h;
  spec.stride_w = stride_w;
  return spec;
}

LayerSpec LayerSpec::MaxPool() {
  LayerSpec spec;
  spec.kind = LayerKind::kMaxPool;
  spec.kernel_h = spec.kernel_w = 2;
  spec.stride_h = spec.stride_w = 2;
  return spec;
}

LayerSpec LayerSpec::Relu() {
  LayerSpec spec;
  spec.kind = LayerKind::kRelu;
  spec.kernel_h = spec.kernel_w = 1;
  return spec;
}

RasterRole StreamConfig::role() const {
  if (viewpoint == Viewpoint::kGround) {
    switch (modality) {
      case Modality::kRgb: return RasterRole::kGroundRgb;
      case Modality::kSeg: return RasterRole::kGroundSeg;
      case Modality::kDepth: return RasterRole::kGroundDepth;
    }
  }
  switch (modality) {
    case Modality::kRgb: return RasterRole::kSatRgb;
    case Modality::kSeg: return RasterRole::kSatSeg;
    case Modality::kDepth: break;
  }
  Invalid("satellite depth streams are not supported");
}

std::string StreamConfig::name() const {
  return std::string(viewpoint == Viewpoint::kGround ? "ground" : "sat") +
         "_" + std::string(ModalityName(modality));
}

std::vector<LayerSpec> ModelConfig::DefaultLayers() {
  return {
      LayerSpec::Conv(8),       LayerSpec::Relu(), LayerSpec::MaxPool(),
      LayerSpec::Conv(16),      LayerSpec::Relu(), LayerSpec::MaxPool(),
      LayerSpec::Conv(32),      LayerSpec::Relu(), LayerSpec::MaxPool(),
      LayerSpec::Conv(32, 2, 1), LayerSpec::Relu(),
      LayerSpec::Conv(32, 2, 1), LayerSpec::Relu(),
      LayerSpec::Conv(0, 1, 1),
  };
}

ModelConfig ModelConfig::ForVariant(Variant variant, FusionMode fusion) {
  ModelConfig config;
  config.fusion = fusion;
  config.layers = DefaultLayers();
  auto add = [&](Modality m, Viewpoint v, int channels) {
    config.streams.push_back({m, v, channels});
  };
  add(Modality::kRgb, Viewpoint::kGround, 16);
  add(Modality::kRgb, Viewpoint::kSatellite, 16);
  if (variant == Variant::kTripleGrd || variant == Variant::kQuad ||
      variant == Variant::kQuintuple) {
    add(Modality::kSeg, Viewpoint::kGround, 8);
  }
  if (variant == Variant::kTripleSat || variant == Variant::kQuad ||
      variant == Variant::kQuintuple) {
    add(Modality::kSeg, Viewpoint::kSatellite, 8);
  }
  if (variant == Variant::kQuintuple) {
    add(Modality::kDepth, Viewpoint::kGround, 8);
  }
  config.ApplyFreezeDepth();
  return config;
}

int ModelConfig::NumConvLayers() const {
  int n = 0;
  for (const auto& l : layers) n += l.kind == LayerKind::kConv;
  return n;
}

void ModelConfig::ApplyFreezeDepth() {
  int seen = 0;
  for (auto& l : layers) {
    if (l.kind != LayerKind::kConv) continue;
    l.frozen = seen < freeze_depth;
    ++seen;
  }
}

void ModelConfig::Validate() const {
  if (streams.empty()) Invalid("no streams configured");
  if (layers.empty()) Invalid("no layers configured");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) Invalid("alpha must be > 0");
  if (pano_width < 8 || pano_height < 1) Invalid("panorama size too small");
  std::set<std::pair<int, int>> seen;
  for (const auto& s : streams) {
    if (s.viewpoint == Viewpoint::kSatellite && s.modality == Modality::kDepth) {
      Invalid("satellite depth streams are not supported");
    }
    if (s.out_channels < 1) Invalid(s.name() + " needs out_channels >= 1");
    if (!seen.insert({static_cast<int>(s.modality),
                      static_cast<int>(s.viewpoint)})
             .second) {
      Invalid("duplicate stream " + s.name());
    }
  }
  for (Viewpoint v : {Viewpoint::kGround, Viewpoint::kSatellite}) {
    int rgb = -1;
    for (const auto& s : streams) {
      if (s.viewpoint == v && s.modality == Modality::kRgb) rgb = s.out_channels;
    }
    if (rgb < 0) {
      Invalid("exactly one rgb stream per viewpoint is required (missing " +
              std::string(ViewpointName(v)) + ")");
    }
    for (const auto& s : streams) {
      if (s.viewpoint == v && s.out_channels > rgb) {
        Invalid(s.name() + " has more channels than its viewpoint's rgb "
                           "stream");
      }
    }
  }
  int convs = 0;
  int frozen_prefix = 0;
  bool prefix = true;
  for (size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.stride_h < 1 || l.stride_h > 2 || l.stride_w < 1 || l.stride_w > 2) {
      Invalid("layer " + std::to_string(i) + " stride must be 1 or 2");
    }
    if (l.kind == LayerKind::kConv) {
      if (l.kernel_h != 3 || l.kernel_w != 3) {
        Invalid("layer " + std::to_string(i) + " conv kernel must be 3x3");
      }
      const bool last = NumConvLayers() == convs + 1;
      if (l.out_channels < 1 && !last) {
        Invalid("layer " + std::to_string(i) + " needs out_channels >= 1");
      }
      if (l.frozen && prefix) {
        ++frozen_prefix;
      } else {
        prefix = false;
        if (l.frozen) Invalid("frozen conv layers must form a leading prefix");
      }
      ++convs;
    } else if (l.kind == LayerKind::kMaxPool) {
      if (l.kernel_h != l.stride_h || l.kernel_w != l.stride_w) {
        Invalid("max pooling windows must equal their strides");
      }
    }
  }
  if (convs == 0) Invalid("the stack has no conv layer");
  if (freeze_depth < 0 || freeze_depth > convs) {
    Invalid("freeze_depth exceeds the number of conv layers");
  }
  if (frozen_prefix != freeze_depth) {
    Invalid("frozen flags disagree with freeze_depth");
  }
}

std::vector<int> ModelConfig::StreamIndices(Viewpoint viewpoint) const {
  std::vector<int> out;
  const int primary = PrimaryStream(viewpoint);
  out.push_back(primary);
  for (int i = 0; i < static_cast<int>(streams.size()); ++i) {
    if (i != primary && streams[i].viewpoint == viewpoint) out.push_back(i);
  }
  return out;
}

int ModelConfig::PrimaryStream(Viewpoint viewpoint) const {
  for (int i = 0; i < static_cast<int>(streams.size()); ++i) {
    if (streams[i].viewpoint == viewpoint &&
        streams[i].modality == Modality::kRgb) {
      return i;
    }
  }
  Invalid("no rgb stream for " + std::string(ViewpointName(viewpoint)));
}

std::vector<RasterRole> ModelConfig::Roles() const {
  std::vector<RasterRole> roles;
  for (const auto& s : streams) roles.push_back(s.role());
  return roles;
}

std::pair<int, int> ModelConfig::OutputSize(int in_width,
                                            int in_height) const {
  int w = in_width;
  int h = in_height;
  for (const auto& l : layers) {
    if (l.kind == LayerKind::kConv) {
      const int pad_h = l.height_padding == HeightPadding::kZero ? 1 : 0;
      if (h + 2 * pad_h < l.kernel_h) return {0, 0};
      h = (h + 2 * pad_h - l.kernel_h) / l.stride_h + 1;
      w = (w - 1) / l.stride_w + 1;
    } else if (l.kind == LayerKind::kMaxPool) {
      h /= l.stride_h;
      w /= l.stride_w;
    }
    if (w < 1 || h < 1) return {0, 0};
  }
  return {w, h};
}

std::string ModelConfigToJson(const ModelConfig& config) {
  json streams = json::array();
  for (const auto& s : config.streams) {
    streams.push_back({{"modality", ModalityName(s.modality)},
                       {"viewpoint", ViewpointName(s.viewpoint)},
                       {"out_channels", s.out_channels}});
  }
  json layers = json::array();
  for (const auto& l : config.layers) {
    layers.push_back({{"kind", NameOf(kKinds, l.kind)},
                      {"kernel", {l.kernel_h, l.kernel_w}},
                      {"stride", {l.stride_h, l.stride_w}},
                      {"width_padding", NameOf(kWidthPaddings, l.width_padding)},
                      {"height_padding",
                       NameOf(kHeightPaddings, l.height_padding)},
                      {"out_channels", l.out_channels},
                      {"frozen", l.frozen}});
  }
  json doc = {{"streams", streams},
              {"layers", layers},
              {"fusion", FusionName(config.fusion)},
              {"freeze_depth", config.freeze_depth},
              {"alpha", config.alpha},
              {"pano_width", config.pano_width},
              {"pano_height", config.pano_height},
              {"tie_viewpoint_init", config.tie_viewpoint_init}};
  return doc.dump();
}

ModelConfig ModelConfigFromJson(const std::string& text) {
  ModelConfig config;
  try {
    const json doc = json::parse(text);
    if (doc.contains("variant")) {
      const auto v = ParseVariant(doc["variant"].get<std::string>());
      if (!v) Invalid("unknown variant");
      config = ModelConfig::ForVariant(*v);
    } else {
      config.layers = ModelConfig::DefaultLayers();
    }
    if (doc.contains("fusion")) {
      const auto f = ParseFusion(doc["fusion"].get<std::string>());
      if (!f) Invalid("unknown fusion");
      config.fusion = *f;
    }
    if (doc.contains("streams")) {
      config.streams.clear();
      for (const auto& s : doc["streams"]) {
        StreamConfig stream;
        stream.modality = ParseOrThrow(kModalities, s.at("modality"),
                                       "modality");
        stream.viewpoint = ParseOrThrow(kViewpoints, s.at("viewpoint"),
                                        "viewpoint");
        stream.out_channels = s.at("out_channels").get<int>();
        config.streams.push_back(stream);
      }
    }
    bool explicit_frozen = false;
    if (doc.contains("layers")) {
      config.layers.clear();
      for (const auto& l : doc["layers"]) {
        LayerSpec spec;
        spec.kind = ParseOrThrow(kKinds, l.at("kind"), "layer kind");
        if (l.contains("kernel")) {
          spec.kernel_h = l["kernel"].at(0).get<int>();
          spec.kernel_w = l["kernel"].at(1).get<int>();
        } else if (spec.kind == LayerKind::kMaxPool) {
          spec.kernel_h = spec.kernel_w = 2;
        } else if (spec.kind == LayerKind::kRelu) {
          spec.kernel_h = spec.kernel_w = 1;
        }
        if (l.contains("stride")) {
          spec.stride_h = l["stride"].at(0).get<int>();
          spec.stride_w = l["stride"].at(1).get<int>();
        } else if (spec.kind == LayerKind::kMaxPool) {
          spec.stride_h = spec.stride_w = 2;
        }
        if (l.contains("width_padding")) {
          spec.width_padding =
              ParseOrThrow(kWidthPaddings, l["width_padding"], "padding");
        }
        if (l.contains("height_padding")) {
          spec.height_padding =
              ParseOrThrow(kHeightPaddings, l["height_padding"], "padding");
        }
        spec.out_channels = l.value("out_channels", 0);
        if (l.contains("frozen")) {
          spec.frozen = l["frozen"].get<bool>();
          explicit_frozen = true;
        }
        config.layers.push_back(spec);
      }
    }
    config.freeze_depth = doc.value("freeze_depth", config.freeze_depth);
    config.alpha = doc.value("alpha", config.alpha);
    config.pano_width = doc.value("pano_width", config.pano_width);
    config.pano_height = doc.value("pano_height", config.pano_height);
    config.tie_viewpoint_init =
        doc.value("tie_viewpoint_init", config.tie_viewpoint_init);
    if (!explicit_frozen) config.ApplyFreezeDepth();
  } catch (const json::exception& e) {
    Invalid(std::string("malformed model config: ") + e.what());
  }
  config.Validate();
  return config;
}

}  // namespace crossview
