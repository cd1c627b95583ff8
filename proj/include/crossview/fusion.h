// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_FUSION_H_
#define CROSSVIEW_FUSION_H_

#include <vector>

#include "crossview/feature_volume.h"

namespace crossview {

// Output has the primary's shape; channel c is primary[c] plus every
// auxiliary that has a channel c. Throws kChannelOverflow if an auxiliary
// is wider than the primary, kShapeMismatch on W/H disagreement.
template <typename T>
BasicVolume<T> FusePartialSum(const BasicVolume<T>& primary,
                              const std::vector<BasicVolume<T>>& auxiliaries);

// Channels stacked in input order.
template <typename T>
BasicVolume<T> FuseConcat(const std::vector<BasicVolume<T>>& volumes);

// Channels [first, first + count) of a volume.
template <typename T>
BasicVolume<T> SliceChannels(const BasicVolume<T>& volume, int first,
                             int count);

// Frobenius normalization and its vector-Jacobian product.
template <typename T>
BasicVolume<T> L2Normalize(const BasicVolume<T>& volume);
template <typename T>
BasicVolume<T> L2NormalizeBackward(const BasicVolume<T>& input,
                                   const BasicVolume<T>& upstream);

}  // namespace crossview

#endif  // CROSSVIEW_FUSION_H_
