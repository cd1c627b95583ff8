// SPDX-License-Identifier: Apache-2.0

#include "crossview/fusion.h"

#include <cmath>

#include "crossview/error.h"

namespace crossview {

template <typename T>
BasicVolume<T> FusePartialSum(const BasicVolume<T>& primary,
                              const std::vector<BasicVolume<T>>& auxiliaries) {
  for (const auto& aux : auxiliaries) {
    if (aux.width() != primary.width() || aux.height() != primary.height()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "auxiliary volume width/height differ from the primary");
    }
    if (aux.channels() > primary.channels()) {
      throw Error(ErrorCode::kChannelOverflow,
                  "auxiliary has " + std::to_string(aux.channels()) +
                      " channels, primary only " +
                      std::to_string(primary.channels()));
    }
  }
  BasicVolume<T> out = primary;
  for (const auto& aux : auxiliaries) {
    for (int h = 0; h < primary.height(); ++h) {
      for (int w = 0; w < primary.width(); ++w) {
        for (int c = 0; c < aux.channels(); ++c) {
          out.at(w, h, c) += aux.at(w, h, c);
        }
      }
    }
  }
  return out;
}

template <typename T>
BasicVolume<T> FuseConcat(const std::vector<BasicVolume<T>>& volumes) {
  if (volumes.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "nothing to concatenate");
  }
  int channels = 0;
  for (const auto& v : volumes) {
    if (v.width() != volumes[0].width() || v.height() != volumes[0].height()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "concatenated volumes differ in width/height");
    }
    channels += v.channels();
  }
  BasicVolume<T> out(volumes[0].width(), volumes[0].height(), channels);
  for (int h = 0; h < out.height(); ++h) {
    for (int w = 0; w < out.width(); ++w) {
      int offset = 0;
      for (const auto& v : volumes) {
        for (int c = 0; c < v.channels(); ++c) {
          out.at(w, h, offset + c) = v.at(w, h, c);
        }
        offset += v.channels();
      }
    }
  }
  return out;
}

template <typename T>
BasicVolume<T> SliceChannels(const BasicVolume<T>& volume, int first,
                             int count) {
  if (first < 0 || count < 0 || first + count > volume.channels()) {
    throw Error(ErrorCode::kShapeMismatch, "channel slice out of range");
  }
  BasicVolume<T> out(volume.width(), volume.height(), count);
  for (int h = 0; h < volume.height(); ++h) {
    for (int w = 0; w < volume.width(); ++w) {
      for (int c = 0; c < count; ++c) out.at(w, h, c) = volume.at(w, h, first + c);
    }
  }
  return out;
}

template <typename T>
BasicVolume<T> L2Normalize(const BasicVolume<T>& volume) {
  const double norm = FrobeniusNorm(volume);
  BasicVolume<T> out = volume;
  if (norm == 0.0) return out;
  for (T& v : out.values()) v = static_cast<T>(v / norm);
  return out;
}

// y = x / |x|  =>  dx = (g - y (y . g)) / |x|
template <typename T>
BasicVolume<T> L2NormalizeBackward(const BasicVolume<T>& input,
                                   const BasicVolume<T>& upstream) {
  if (!input.SameShape(upstream)) {
    throw Error(ErrorCode::kShapeMismatch, "normalize gradient shape");
  }
  const double norm = FrobeniusNorm(input);
  BasicVolume<T> out(input.width(), input.height(), input.channels());
  if (norm == 0.0) return out;
  double dot = 0.0;
  for (size_t i = 0; i < input.size(); ++i) {
    dot += static_cast<double>(input.values()[i]) * upstream.values()[i];
  }
  dot /= norm;
  for (size_t i = 0; i < input.size(); ++i) {
    const double y = input.values()[i] / norm;
    out.values()[i] =
        static_cast<T>((upstream.values()[i] - y * dot) / norm);
  }
  return out;
}

#define CROSSVIEW_INSTANTIATE(T)                                             \
  template BasicVolume<T> FusePartialSum<T>(                                 \
      const BasicVolume<T>&, const std::vector<BasicVolume<T>>&);            \
  template BasicVolume<T> FuseConcat<T>(const std::vector<BasicVolume<T>>&); \
  template BasicVolume<T> SliceChannels<T>(const BasicVolume<T>&, int, int); \
  template BasicVolume<T> L2Normalize<T>(const BasicVolume<T>&);             \
  template BasicVolume<T> L2NormalizeBackward<T>(const BasicVolume<T>&,      \
                                                 const BasicVolume<T>&);

CROSSVIEW_INSTANTIATE(float)
CROSSVIEW_INSTANTIATE(double)

#undef CROSSVIEW_INSTANTIATE

}  // namespace crossview
