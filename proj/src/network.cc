// SPDX-License-Identifier: Apache-2.0

#include "crossview/network.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string_view>

#include "crossview/error.h"
#include "crossview/geometry.h"

namespace crossview {
namespace {

uint64_t Fnv1a(std::string_view text) {
  uint64_t hash = 1469598103934665603ull;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  return hash;
}

int OutChannels(const ModelConfig& config, const LayerSpec& layer,
                int conv_index, int stream_channels) {
  const bool last = conv_index == config.NumConvLayers() - 1;
  return (last || layer.out_channels == 0) ? stream_channels
                                           : layer.out_channels;
}

struct ConvGeometry {
  int in_w, in_h, in_c;
  int out_w, out_h, out_c;
  int pad_h;
  // Source column per (ow, kx), or -1 for zero padding.
  std::vector<int> col;
};

ConvGeometry MakeConvGeometry(const LayerSpec& layer, const ConvParams& p,
                              int in_w, int in_h, int in_c) {
  if (in_c != p.in_channels) {
    throw Error(ErrorCode::kShapeMismatch,
                "conv expects " + std::to_string(p.in_channels) +
                    " input channels, got " + std::to_string(in_c));
  }
  ConvGeometry g;
  g.in_w = in_w;
  g.in_h = in_h;
  g.in_c = in_c;
  g.out_c = p.out_channels;
  g.pad_h = layer.height_padding == HeightPadding::kZero ? 1 : 0;
  if (in_h + 2 * g.pad_h < p.kernel_h) {
    throw Error(ErrorCode::kInputTooNarrow, "input too short for conv");
  }
  g.out_h = (in_h + 2 * g.pad_h - p.kernel_h) / layer.stride_h + 1;
  g.out_w = (in_w - 1) / layer.stride_w + 1;
  const int pad_w = p.kernel_w / 2;
  g.col.resize(static_cast<size_t>(g.out_w) * p.kernel_w);
  for (int ow = 0; ow < g.out_w; ++ow) {
    for (int kx = 0; kx < p.kernel_w; ++kx) {
      int iw = ow * layer.stride_w + kx - pad_w;
      if (layer.width_padding == WidthPadding::kWrap) {
        iw = ((iw % in_w) + in_w) % in_w;
      } else if (iw < 0 || iw >= in_w) {
        iw = -1;
      }
      g.col[static_cast<size_t>(ow) * p.kernel_w + kx] = iw;
    }
  }
  return g;
}

template <typename T>
BasicVolume<T> ConvForward(const LayerSpec& layer, const ConvParams& p,
                           const std::vector<T>& weights,
                           const std::vector<T>& bias,
                           const BasicVolume<T>& in) {
  const ConvGeometry g =
      MakeConvGeometry(layer, p, in.width(), in.height(), in.channels());
  BasicVolume<T> out(g.out_w, g.out_h, g.out_c);
  const int kh = p.kernel_h;
  const int kw = p.kernel_w;
  const int cin = g.in_c;
  const int cout = g.out_c;
  T* o = out.data();
  const T* x = in.data();
  const T* wt = weights.data();
  for (int oh = 0; oh < g.out_h; ++oh) {
    for (int ow = 0; ow < g.out_w; ++ow) {
      std::copy(bias.begin(), bias.end(),
                o + (static_cast<size_t>(oh) * g.out_w + ow) * cout);
    }
    for (int ky = 0; ky < kh; ++ky) {
      const int ih = oh * layer.stride_h + ky - g.pad_h;
      if (ih < 0 || ih >= g.in_h) continue;
      for (int ow = 0; ow < g.out_w; ++ow) {
        T* acc = o + (static_cast<size_t>(oh) * g.out_w + ow) * cout;
        for (int kx = 0; kx < kw; ++kx) {
          const int iw = g.col[static_cast<size_t>(ow) * kw + kx];
          if (iw < 0) continue;
          const T* px = x + (static_cast<size_t>(ih) * g.in_w + iw) * cin;
          const T* k = wt + (static_cast<size_t>(ky) * kw + kx) * cin * cout;
          for (int ic = 0; ic < cin; ++ic) {
            const T a = px[ic];
            const T* krow = k + static_cast<size_t>(ic) * cout;
            for (int oc = 0; oc < cout; ++oc) acc[oc] += a * krow[oc];
          }
        }
      }
    }
  }
  return out;
}

// Adds parameter gradients into grads and, if requested, returns the input
// gradient.
template <typename T>
void ConvBackward(const LayerSpec& layer, const ConvParams& p,
                  const std::vector<T>& weights, const BasicVolume<T>& in,
                  const BasicVolume<T>& gout, ConvParams* grads,
                  BasicVolume<T>* gin) {
  const ConvGeometry g =
      MakeConvGeometry(layer, p, in.width(), in.height(), in.channels());
  if (gout.width() != g.out_w || gout.height() != g.out_h ||
      gout.channels() != g.out_c) {
    throw Error(ErrorCode::kShapeMismatch, "conv upstream gradient shape");
  }
  const int kh = p.kernel_h;
  const int kw = p.kernel_w;
  const int cin = g.in_c;
  const int cout = g.out_c;
  std::vector<T> gw;
  std::vector<T> gb;
  if (grads != nullptr) {
    gw.assign(weights.size(), T(0));
    gb.assign(static_cast<size_t>(cout), T(0));
  }
  if (gin != nullptr) *gin = BasicVolume<T>(g.in_w, g.in_h, cin);
  const T* x = in.data();
  const T* wt = weights.data();
  for (int oh = 0; oh < g.out_h; ++oh) {
    if (grads != nullptr) {
      for (int ow = 0; ow < g.out_w; ++ow) {
        const T* go =
            gout.data() + (static_cast<size_t>(oh) * g.out_w + ow) * cout;
        for (int oc = 0; oc < cout; ++oc) gb[oc] += go[oc];
      }
    }
    for (int ky = 0; ky < kh; ++ky) {
      const int ih = oh * layer.stride_h + ky - g.pad_h;
      if (ih < 0 || ih >= g.in_h) continue;
      for (int ow = 0; ow < g.out_w; ++ow) {
        const T* go =
            gout.data() + (static_cast<size_t>(oh) * g.out_w + ow) * cout;
        for (int kx = 0; kx < kw; ++kx) {
          const int iw = g.col[static_cast<size_t>(ow) * kw + kx];
          if (iw < 0) continue;
          const size_t in_off = (static_cast<size_t>(ih) * g.in_w + iw) * cin;
          const size_t k_off = (static_cast<size_t>(ky) * kw + kx) * cin * cout;
          if (grads != nullptr) {
            const T* px = x + in_off;
            T* gk = gw.data() + k_off;
            for (int ic = 0; ic < cin; ++ic) {
              const T a = px[ic];
              T* grow = gk + static_cast<size_t>(ic) * cout;
              for (int oc = 0; oc < cout; ++oc) grow[oc] += a * go[oc];
            }
          }
          if (gin != nullptr) {
            T* gpx = gin->data() + in_off;
            const T* k = wt + k_off;
            for (int ic = 0; ic < cin; ++ic) {
              const T* krow = k + static_cast<size_t>(ic) * cout;
              T sum = 0;
              for (int oc = 0; oc < cout; ++oc) sum += krow[oc] * go[oc];
              gpx[ic] += sum;
            }
          }
        }
      }
    }
  }
  if (grads != nullptr) {
    for (size_t i = 0; i < gw.size(); ++i) grads->weights[i] += gw[i];
    for (size_t i = 0; i < gb.size(); ++i) grads->bias[i] += gb[i];
  }
}

template <typename T>
BasicVolume<T> MaxPoolForward(const LayerSpec& layer, const BasicVolume<T>& in,
                              std::vector<uint32_t>& argmax) {
  const int out_w = in.width() / layer.stride_w;
  const int out_h = in.height() / layer.stride_h;
  if (out_w < 1 || out_h < 1) {
    throw Error(ErrorCode::kInputTooNarrow, "input too small for pooling");
  }
  const int ch = in.channels();
  BasicVolume<T> out(out_w, out_h, ch);
  argmax.assign(out.size(), 0);
  for (int oh = 0; oh < out_h; ++oh) {
    for (int ow = 0; ow < out_w; ++ow) {
      for (int c = 0; c < ch; ++c) {
        size_t best = in.index(ow * layer.stride_w, oh * layer.stride_h, c);
        T best_v = in.values()[best];
        for (int ky = 0; ky < layer.kernel_h; ++ky) {
          for (int kx = 0; kx < layer.kernel_w; ++kx) {
            const size_t idx = in.index(ow * layer.stride_w + kx,
                                        oh * layer.stride_h + ky, c);
            if (in.values()[idx] > best_v) {
              best_v = in.values()[idx];
              best = idx;
            }
          }
        }
        const size_t o = out.index(ow, oh, c);
        out.values()[o] = best_v;
        argmax[o] = static_cast<uint32_t>(best);
      }
    }
  }
  return out;
}

template <typename T>
std::vector<T> CastVector(const std::vector<double>& v) {
  return std::vector<T>(v.begin(), v.end());
}

void CheckTrace(const ModelConfig& config, size_t activations) {
  if (activations != config.layers.size() + 1) {
    throw Error(ErrorCode::kShapeMismatch,
                "trace does not match the layer stack");
  }
}

}  // namespace

bool operator==(const ConvParams& a, const ConvParams& b) {
  return a.in_channels == b.in_channels && a.out_channels == b.out_channels &&
         a.kernel_h == b.kernel_h && a.kernel_w == b.kernel_w &&
         a.frozen == b.frozen && a.weights == b.weights && a.bias == b.bias;
}

StreamParams ZerosLike(const StreamParams& params) {
  StreamParams out = params;
  for (auto& conv : out.convs) {
    std::fill(conv.weights.begin(), conv.weights.end(), 0.0);
    std::fill(conv.bias.begin(), conv.bias.end(), 0.0);
  }
  return out;
}

Parameters Parameters::ZerosLike() const {
  Parameters out;
  for (const auto& s : streams) out.streams.push_back(crossview::ZerosLike(s));
  return out;
}

size_t Parameters::Count() const {
  size_t n = 0;
  for (const auto& s : streams) {
    for (const auto& c : s.convs) n += c.weights.size() + c.bias.size();
  }
  return n;
}

bool Parameters::AllFinite() const {
  for (const auto& s : streams) {
    for (const auto& c : s.convs) {
      for (double v : c.weights) {
        if (!std::isfinite(v)) return false;
      }
      for (double v : c.bias) {
        if (!std::isfinite(v)) return false;
      }
    }
  }
  return true;
}

bool Parameters::operator==(const Parameters& other) const {
  if (streams.size() != other.streams.size()) return false;
  for (size_t i = 0; i < streams.size(); ++i) {
    if (streams[i].convs.size() != other.streams[i].convs.size()) return false;
    for (size_t j = 0; j < streams[i].convs.size(); ++j) {
      if (!(streams[i].convs[j] == other.streams[i].convs[j])) return false;
    }
  }
  return true;
}

void Parameters::Axpy(double scale, const Parameters& other) {
  if (streams.size() != other.streams.size()) {
    throw Error(ErrorCode::kShapeMismatch, "parameter sets differ");
  }
  for (size_t i = 0; i < streams.size(); ++i) {
    auto& a = streams[i].convs;
    const auto& b = other.streams[i].convs;
    if (a.size() != b.size()) {
      throw Error(ErrorCode::kShapeMismatch, "parameter sets differ");
    }
    for (size_t j = 0; j < a.size(); ++j) {
      if (a[j].weights.size() != b[j].weights.size() ||
          a[j].bias.size() != b[j].bias.size()) {
        throw Error(ErrorCode::kShapeMismatch, "parameter blocks differ");
      }
      for (size_t k = 0; k < a[j].weights.size(); ++k) {
        a[j].weights[k] += scale * b[j].weights[k];
      }
      for (size_t k = 0; k < a[j].bias.size(); ++k) {
        a[j].bias[k] += scale * b[j].bias[k];
      }
    }
  }
}

void Parameters::Scale(double factor) {
  for (auto& s : streams) {
    for (auto& c : s.convs) {
      for (double& v : c.weights) v *= factor;
      for (double& v : c.bias) v *= factor;
    }
  }
}

Parameters BuildExtractor(const ModelConfig& config, uint64_t seed) {
  config.Validate();
  Parameters params;
  for (const auto& stream : config.streams) {
    const std::string key =
        config.tie_viewpoint_init ? std::string(ModalityName(stream.modality))
                                  : stream.name();
    const uint64_t h = Fnv1a(key);
    std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                      static_cast<uint32_t>(h), static_cast<uint32_t>(h >> 32)};
    std::mt19937_64 rng(seq);
    StreamParams sp;
    int in_c = stream.in_channels();
    int conv_index = 0;
    for (const auto& layer : config.layers) {
      if (layer.kind != LayerKind::kConv) continue;
      ConvParams conv;
      conv.in_channels = in_c;
      conv.out_channels =
          OutChannels(config, layer, conv_index, stream.out_channels);
      conv.kernel_h = layer.kernel_h;
      conv.kernel_w = layer.kernel_w;
      conv.frozen = layer.frozen;
      const int fan_in = conv.kernel_h * conv.kernel_w * conv.in_channels;
      const double bound = std::sqrt(6.0 / fan_in);
      conv.weights.resize(static_cast<size_t>(fan_in) * conv.out_channels);
      for (double& w : conv.weights) {
        w = bound * (2.0 * UniformUnit(rng) - 1.0);
      }
      conv.bias.assign(conv.out_channels, 0.0);
      sp.convs.push_back(std::move(conv));
      in_c = sp.convs.back().out_channels;
      ++conv_index;
    }
    params.streams.push_back(std::move(sp));
  }
  return params;
}

template <typename T>
BasicVolume<T> ToRealGrid(const Raster& raster) {
  BasicVolume<T> out(raster.width(), raster.height(), raster.channels());
  const auto& px = raster.pixels();
  for (size_t i = 0; i < px.size(); ++i) {
    out.values()[i] = static_cast<T>(px[i]) / T(255);
  }
  return out;
}

template <typename T>
ForwardTrace<T> ForwardTraced(const ModelConfig& config,
                              const StreamParams& params,
                              const BasicVolume<T>& input) {
  const auto [out_w, out_h] = config.OutputSize(input.width(), input.height());
  if (out_w < 1 || out_h < 1) {
    throw Error(ErrorCode::kInputTooNarrow,
                "input " + std::to_string(input.width()) + "x" +
                    std::to_string(input.height()) +
                    " vanishes in the layer stack");
  }
  ForwardTrace<T> trace;
  trace.activations.reserve(config.layers.size() + 1);
  trace.activations.push_back(input);
  size_t conv_index = 0;
  for (const auto& layer : config.layers) {
    const BasicVolume<T>& x = trace.activations.back();
    switch (layer.kind) {
      case LayerKind::kConv: {
        if (conv_index >= params.convs.size()) {
          throw Error(ErrorCode::kShapeMismatch,
                      "fewer conv blocks than conv layers");
        }
        const ConvParams& p = params.convs[conv_index++];
        trace.activations.push_back(ConvForward(
            layer, p, CastVector<T>(p.weights), CastVector<T>(p.bias), x));
        break;
      }
      case LayerKind::kRelu: {
        BasicVolume<T> y = x;
        for (T& v : y.values()) v = v > T(0) ? v : T(0);
        trace.activations.push_back(std::move(y));
        break;
      }
      case LayerKind::kMaxPool: {
        trace.pool_argmax.emplace_back();
        trace.activations.push_back(
            MaxPoolForward(layer, x, trace.pool_argmax.back()));
        break;
      }
    }
  }
  return trace;
}

template <typename T>
std::optional<BasicVolume<T>> BackwardTraced(
    const ModelConfig& config, const StreamParams& params,
    const ForwardTrace<T>& trace, const BasicVolume<T>& upstream,
    StreamParams& grads, bool need_input_grad) {
  CheckTrace(config, trace.activations.size());
  if (!upstream.SameShape(trace.output())) {
    throw Error(ErrorCode::kShapeMismatch,
                "upstream gradient does not match the forward output");
  }
  // Layers below the first trainable conv need no gradient unless the
  // caller wants the input gradient.
  int first_needed = 0;
  if (!need_input_grad) {
    first_needed = static_cast<int>(config.layers.size());
    size_t ci = 0;
    for (size_t i = 0; i < config.layers.size(); ++i) {
      if (config.layers[i].kind != LayerKind::kConv) continue;
      if (!params.convs[ci++].frozen) {
        first_needed = static_cast<int>(i);
        break;
      }
    }
  }
  int conv_index = config.NumConvLayers() - 1;
  int pool_index = static_cast<int>(trace.pool_argmax.size()) - 1;
  BasicVolume<T> grad = upstream;
  for (int i = static_cast<int>(config.layers.size()) - 1; i >= first_needed;
       --i) {
    const LayerSpec& layer = config.layers[i];
    const BasicVolume<T>& in = trace.activations[i];
    const bool want_input = need_input_grad || i > first_needed;
    switch (layer.kind) {
      case LayerKind::kConv: {
        const ConvParams& p = params.convs[conv_index];
        ConvParams* g = p.frozen ? nullptr : &grads.convs[conv_index];
        BasicVolume<T> gin;
        ConvBackward(layer, p, CastVector<T>(p.weights), in, grad, g,
                     want_input ? &gin : nullptr);
        grad = std::move(gin);
        --conv_index;
        break;
      }
      case LayerKind::kRelu: {
        if (want_input) {
          for (size_t k = 0; k < grad.size(); ++k) {
            if (!(in.values()[k] > T(0))) grad.values()[k] = T(0);
          }
        }
        break;
      }
      case LayerKind::kMaxPool: {
        if (want_input) {
          BasicVolume<T> gin(in.width(), in.height(), in.channels());
          const auto& argmax = trace.pool_argmax[pool_index];
          for (size_t k = 0; k < grad.size(); ++k) {
            gin.values()[argmax[k]] += grad.values()[k];
          }
          grad = std::move(gin);
        }
        --pool_index;
        break;
      }
    }
    if (!want_input) return std::nullopt;
  }
  if (!need_input_grad) return std::nullopt;
  return grad;
}

template <typename T>
BackwardResult<T> Backward(const ModelConfig& config,
                           const StreamParams& params,
                           const BasicVolume<T>& input,
                           const BasicVolume<T>& upstream) {
  const ForwardTrace<T> trace = ForwardTraced(config, params, input);
  BackwardResult<T> result;
  result.param_grads = ZerosLike(params);
  result.input_grad =
      *BackwardTraced(config, params, trace, upstream, result.param_grads,
                      /*need_input_grad=*/true);
  return result;
}

#define CROSSVIEW_INSTANTIATE(T)                                             \
  template BasicVolume<T> ToRealGrid<T>(const Raster&);                      \
  template ForwardTrace<T> ForwardTraced<T>(                                 \
      const ModelConfig&, const StreamParams&, const BasicVolume<T>&);       \
  template std::optional<BasicVolume<T>> BackwardTraced<T>(                  \
      const ModelConfig&, const StreamParams&, const ForwardTrace<T>&,       \
      const BasicVolume<T>&, StreamParams&, bool);                           \
  template BackwardResult<T> Backward<T>(const ModelConfig&,                 \
                                         const StreamParams&,                \
                                         const BasicVolume<T>&,              \
                                         const BasicVolume<T>&);

CROSSVIEW_INSTANTIATE(float)
CROSSVIEW_INSTANTIATE(double)

#undef CROSSVIEW_INSTANTIATE

}  // namespace crossview
