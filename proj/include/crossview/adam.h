// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_ADAM_H_
#define CROSSVIEW_ADAM_H_

#include <cstdint>

#include "crossview/network.h"

namespace crossview {

struct AdamOptions {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  Parameters first_moment;
  Parameters second_moment;
  int64_t step = 0;

  static OptimizerState For(const Parameters& params);
};

// Bias-corrected Adam update. Frozen conv blocks are left untouched.
void AdamStep(Parameters& params, const Parameters& grads,
              OptimizerState& state, const AdamOptions& options);

// Sums micro-batch gradients and divides by their count when finished.
class GradientAccumulator {
 public:
  explicit GradientAccumulator(const Parameters& like);

  void Add(const Parameters& grads);
  int count() const { return count_; }
  // Mean of everything added since the last Reset.
  Parameters Mean() const;
  void Reset();

 private:
  Parameters sum_;
  int count_ = 0;
};

}  // namespace crossview

#endif  // CROSSVIEW_ADAM_H_
