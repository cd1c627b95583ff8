// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_MATCHING_H_
#define CROSSVIEW_MATCHING_H_

#include <vector>

#include "crossview/feature_volume.h"

namespace crossview {

// scores[i] = sum_c sum_h sum_w A((i + w) mod W_a, h, c) * G(w, h, c),
// accumulated in double in that (c, h, w) order.
using CorrelationScores = std::vector<double>;

struct MatchResult {
  int orientation = 0;  // aerial column where the ground window starts
  double score = 0.0;
  double distance = 0.0;  // || G - crop(A, orientation) ||_F
};

template <typename T>
void CheckCorrelationShapes(const BasicVolume<T>& aerial,
                            const BasicVolume<T>& ground);

template <typename T>
CorrelationScores CyclicCorrelation(const BasicVolume<T>& aerial,
                                    const BasicVolume<T>& ground);

// Lowest index attaining the maximum.
int EstimateOrientation(const CorrelationScores& scores);

// Columns shift, shift + 1, ..., shift + width - 1 (mod W_a).
template <typename T>
BasicVolume<T> CropAt(const BasicVolume<T>& aerial, int shift, int width);

// Scatters a gradient on a crop back onto the aerial columns it came from.
template <typename T>
void CropAtBackward(const BasicVolume<T>& crop_grad, int shift,
                    BasicVolume<T>& aerial_grad);

template <typename T>
MatchResult MatchPair(const BasicVolume<T>& aerial,
                      const BasicVolume<T>& ground);

}  // namespace crossview

#endif  // CROSSVIEW_MATCHING_H_
