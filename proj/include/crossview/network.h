// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_NETWORK_H_
#define CROSSVIEW_NETWORK_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crossview/feature_volume.h"
#include "crossview/model_config.h"
#include "crossview/raster.h"

namespace crossview {

// Kernel layout [kh][kw][in][out]; the out channel is innermost.
struct ConvParams {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 3;
  int kernel_w = 3;
  bool frozen = false;
  std::vector<double> weights;
  std::vector<double> bias;

  size_t WeightIndex(int ky, int kx, int ic, int oc) const {
    return ((static_cast<size_t>(ky) * kernel_w + kx) * in_channels + ic) *
               out_channels + oc;
  }
};

struct StreamParams {
  std::vector<ConvParams> convs;
};

// One StreamParams per entry of ModelConfig::streams. Gradients use the same
// type.
struct Parameters {
  std::vector<StreamParams> streams;

  Parameters ZerosLike() const;
  size_t Count() const;
  bool AllFinite() const;
  bool operator==(const Parameters& other) const;
  // this += scale * other
  void Axpy(double scale, const Parameters& other);
  void Scale(double factor);
};

bool operator==(const ConvParams& a, const ConvParams& b);

// Uniform He-style init, U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)) with zero
// biases. Each stream draws from its own generator keyed on (seed, stream),
// so adding or removing a stream leaves the others unchanged.
Parameters BuildExtractor(const ModelConfig& config, uint64_t seed);

// Pixel values scaled to [0, 1].
template <typename T>
BasicVolume<T> ToRealGrid(const Raster& raster);

template <typename T>
struct ForwardTrace {
  // activations[0] is the input; activations[i + 1] is the output of layer i.
  std::vector<BasicVolume<T>> activations;
  // Per max-pool layer, the flat input index chosen for each output element.
  std::vector<std::vector<uint32_t>> pool_argmax;

  const BasicVolume<T>& output() const { return activations.back(); }
};

// Throws Error(kInputTooNarrow) if the stack would shrink the input to
// nothing.
template <typename T>
ForwardTrace<T> ForwardTraced(const ModelConfig& config,
                              const StreamParams& params,
                              const BasicVolume<T>& input);

template <typename T>
BasicVolume<T> Forward(const ModelConfig& config, const StreamParams& params,
                       const BasicVolume<T>& input) {
  return std::move(ForwardTraced(config, params, input).activations.back());
}

// Reverse-mode pass over a trace. Parameter gradients are added into
// `grads` (frozen layers receive none). With `need_input_grad == false` the
// pass stops at the first trainable layer and returns nullopt.
template <typename T>
std::optional<BasicVolume<T>> BackwardTraced(
    const ModelConfig& config, const StreamParams& params,
    const ForwardTrace<T>& trace, const BasicVolume<T>& upstream,
    StreamParams& grads, bool need_input_grad);

template <typename T>
struct BackwardResult {
  StreamParams param_grads;
  BasicVolume<T> input_grad;
};

template <typename T>
BackwardResult<T> Backward(const ModelConfig& config,
                           const StreamParams& params,
                           const BasicVolume<T>& input,
                           const BasicVolume<T>& upstream);

StreamParams ZerosLike(const StreamParams& params);

}  // namespace crossview

#endif  // CROSSVIEW_NETWORK_H_
