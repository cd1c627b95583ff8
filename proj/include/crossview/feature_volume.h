// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_FEATURE_VOLUME_H_
#define CROSSVIEW_FEATURE_VOLUME_H_

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "crossview/error.h"

namespace crossview {

// W x H x C grid of activations. Element (w, h, c) lives at
// (h * W + w) * C + c, i.e. channels are innermost.
template <typename T>
class BasicVolume {
 public:
  using value_type = T;

  BasicVolume() = default;
  BasicVolume(int width, int height, int channels)
      : width_(width), height_(height), channels_(channels),
        values_(static_cast<size_t>(width) * height * channels, T(0)) {}
  BasicVolume(int width, int height, int channels, std::vector<T> values)
      : width_(width), height_(height), channels_(channels),
        values_(std::move(values)) {
    if (values_.size() != static_cast<size_t>(width) * height * channels) {
      throw Error(ErrorCode::kShapeMismatch,
                  "volume payload does not match its dimensions");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  size_t size() const { return values_.size(); }

  size_t index(int w, int h, int c) const {
    return (static_cast<size_t>(h) * width_ + w) * channels_ + c;
  }
  T at(int w, int h, int c) const { return values_[index(w, h, c)]; }
  T& at(int w, int h, int c) { return values_[index(w, h, c)]; }

  const std::vector<T>& values() const { return values_; }
  std::vector<T>& values() { return values_; }
  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }

  bool SameShape(const BasicVolume& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  bool AllFinite() const {
    for (T v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  template <typename U>
  BasicVolume<U> Cast() const {
    return BasicVolume<U>(width_, height_, channels_,
                          std::vector<U>(values_.begin(), values_.end()));
  }

  bool operator==(const BasicVolume&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<T> values_;
};

using FeatureVolume = BasicVolume<float>;

template <typename T>
double FrobeniusNorm(const BasicVolume<T>& v) {
  double sum = 0.0;
  for (T x : v.values()) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

// Circularly shifts the width axis right by `shift` columns.
template <typename T>
BasicVolume<T> RollWidth(const BasicVolume<T>& v, int shift) {
  BasicVolume<T> out(v.width(), v.height(), v.channels());
  const int w_total = v.width();
  const int s = ((shift % w_total) + w_total) % w_total;
  for (int h = 0; h < v.height(); ++h) {
    for (int w = 0; w < w_total; ++w) {
      const int dst = (w + s) % w_total;
      for (int c = 0; c < v.channels(); ++c) out.at(dst, h, c) = v.at(w, h, c);
    }
  }
  return out;
}

// "FVOL" file: magic, u32 LE (W, H, C), then W*H*C float32 LE values.
void WriteFeatureVolume(const FeatureVolume& volume,
                        const std::filesystem::path& path);
FeatureVolume ReadFeatureVolume(const std::filesystem::path& path);

std::vector<uint8_t> EncodeFeatureVolume(const FeatureVolume& volume);
FeatureVolume DecodeFeatureVolume(const std::vector<uint8_t>& bytes);

}  // namespace crossview

#endif  // CROSSVIEW_FEATURE_VOLUME_H_
