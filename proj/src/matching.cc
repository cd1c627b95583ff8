// SPDX-License-Identifier: Apache-2.0

#include "crossview/matching.h"

#include <cmath>

#include "crossview/error.h"

namespace crossview {

template <typename T>
void CheckCorrelationShapes(const BasicVolume<T>& aerial,
                            const BasicVolume<T>& ground) {
  if (aerial.height() != ground.height() ||
      aerial.channels() != ground.channels() ||
      ground.width() > aerial.width() || ground.width() < 1) {
    throw Error(ErrorCode::kShapeMismatch,
                "aerial " + std::to_string(aerial.width()) + "x" +
                    std::to_string(aerial.height()) + "x" +
                    std::to_string(aerial.channels()) + " vs ground " +
                    std::to_string(ground.width()) + "x" +
                    std::to_string(ground.height()) + "x" +
                    std::to_string(ground.channels()));
  }
}

template <typename T>
CorrelationScores CyclicCorrelation(const BasicVolume<T>& aerial,
                                    const BasicVolume<T>& ground) {
  CheckCorrelationShapes(aerial, ground);
  const int wa = aerial.width();
  const int wg = ground.width();
  CorrelationScores scores(wa, 0.0);
  for (int i = 0; i < wa; ++i) {
    double sum = 0.0;
    for (int c = 0; c < ground.channels(); ++c) {
      for (int h = 0; h < ground.height(); ++h) {
        for (int w = 0; w < wg; ++w) {
          sum += static_cast<double>(aerial.at((i + w) % wa, h, c)) *
                 static_cast<double>(ground.at(w, h, c));
        }
      }
    }
    scores[i] = sum;
  }
  return scores;
}

int EstimateOrientation(const CorrelationScores& scores) {
  if (scores.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no correlation scores");
  }
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

template <typename T>
BasicVolume<T> CropAt(const BasicVolume<T>& aerial, int shift, int width) {
  if (width < 1 || width > aerial.width() || shift < 0 ||
      shift >= aerial.width()) {
    throw Error(ErrorCode::kShapeMismatch,
                "crop of width " + std::to_string(width) + " at " +
                    std::to_string(shift) + " from width " +
                    std::to_string(aerial.width()));
  }
  BasicVolume<T> out(width, aerial.height(), aerial.channels());
  for (int h = 0; h < aerial.height(); ++h) {
    for (int w = 0; w < width; ++w) {
      const int src = (shift + w) % aerial.width();
      for (int c = 0; c < aerial.channels(); ++c) {
        out.at(w, h, c) = aerial.at(src, h, c);
      }
    }
  }
  return out;
}

template <typename T>
void CropAtBackward(const BasicVolume<T>& crop_grad, int shift,
                    BasicVolume<T>& aerial_grad) {
  if (crop_grad.height() != aerial_grad.height() ||
      crop_grad.channels() != aerial_grad.channels() ||
      crop_grad.width() > aerial_grad.width()) {
    throw Error(ErrorCode::kShapeMismatch, "crop gradient shape");
  }
  for (int h = 0; h < crop_grad.height(); ++h) {
    for (int w = 0; w < crop_grad.width(); ++w) {
      const int dst = (shift + w) % aerial_grad.width();
      for (int c = 0; c < crop_grad.channels(); ++c) {
        aerial_grad.at(dst, h, c) += crop_grad.at(w, h, c);
      }
    }
  }
}

template <typename T>
MatchResult MatchPair(const BasicVolume<T>& aerial,
                      const BasicVolume<T>& ground) {
  const CorrelationScores scores = CyclicCorrelation(aerial, ground);
  MatchResult result;
  result.orientation = EstimateOrientation(scores);
  result.score = scores[result.orientation];
  const int wa = aerial.width();
  double sum = 0.0;
  for (int h = 0; h < ground.height(); ++h) {
    for (int w = 0; w < ground.width(); ++w) {
      const int src = (result.orientation + w) % wa;
      for (int c = 0; c < ground.channels(); ++c) {
        const double d = static_cast<double>(ground.at(w, h, c)) -
                         static_cast<double>(aerial.at(src, h, c));
        sum += d * d;
      }
    }
  }
  result.distance = std::sqrt(sum);
  return result;
}

#define CROSSVIEW_INSTANTIATE(T)                                              \
  template void CheckCorrelationShapes<T>(const BasicVolume<T>&,              \
                                          const BasicVolume<T>&);             \
  template CorrelationScores CyclicCorrelation<T>(const BasicVolume<T>&,      \
                                                  const BasicVolume<T>&);     \
  template BasicVolume<T> CropAt<T>(const BasicVolume<T>&, int, int);         \
  template void CropAtBackward<T>(const BasicVolume<T>&, int,                 \
                                  BasicVolume<T>&);                           \
  template MatchResult MatchPair<T>(const BasicVolume<T>&,                    \
                                    const BasicVolume<T>&);

CROSSVIEW_INSTANTIATE(float)
CROSSVIEW_INSTANTIATE(double)

#undef CROSSVIEW_INSTANTIATE

}  // namespace crossview
