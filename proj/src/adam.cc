// SPDX-License-Identifier: Apache-2.0

#include "crossview/adam.h"

#include <cmath>

#include "crossview/error.h"

namespace crossview {
namespace {

void CheckSameLayout(const Parameters& a, const Parameters& b) {
  bool ok = a.streams.size() == b.streams.size();
  for (size_t s = 0; ok && s < a.streams.size(); ++s) {
    ok = a.streams[s].convs.size() == b.streams[s].convs.size();
    for (size_t c = 0; ok && c < a.streams[s].convs.size(); ++c) {
      ok = a.streams[s].convs[c].weights.size() ==
               b.streams[s].convs[c].weights.size() &&
           a.streams[s].convs[c].bias.size() ==
               b.streams[s].convs[c].bias.size();
    }
  }
  if (!ok) {
    throw Error(ErrorCode::kShapeMismatch,
                "gradient layout does not match the parameters");
  }
}

void UpdateBlock(std::vector<double>& value, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v,
                 const AdamOptions& o, double bias1, double bias2) {
  for (size_t i = 0; i < value.size(); ++i) {
    m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * grad[i];
    v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    value[i] -= o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon);
  }
}

}  // namespace

OptimizerState OptimizerState::For(const Parameters& params) {
  return {params.ZerosLike(), params.ZerosLike(), 0};
}

void AdamStep(Parameters& params, const Parameters& grads,
              OptimizerState& state, const AdamOptions& options) {
  CheckSameLayout(params, grads);
  CheckSameLayout(params, state.first_moment);
  CheckSameLayout(params, state.second_moment);
  ++state.step;
  const double bias1 = 1.0 - std::pow(options.beta1, state.step);
  const double bias2 = 1.0 - std::pow(options.beta2, state.step);
  for (size_t s = 0; s < params.streams.size(); ++s) {
    for (size_t c = 0; c < params.streams[s].convs.size(); ++c) {
      ConvParams& p = params.streams[s].convs[c];
      if (p.frozen) continue;
      const ConvParams& g = grads.streams[s].convs[c];
      ConvParams& m = state.first_moment.streams[s].convs[c];
      ConvParams& v = state.second_moment.streams[s].convs[c];
      UpdateBlock(p.weights, g.weights, m.weights, v.weights, options, bias1,
                  bias2);
      UpdateBlock(p.bias, g.bias, m.bias, v.bias, options, bias1, bias2);
    }
  }
}

GradientAccumulator::GradientAccumulator(const Parameters& like)
    : sum_(like.ZerosLike()) {}

void GradientAccumulator::Add(const Parameters& grads) {
  sum_.Axpy(1.0, grads);
  ++count_;
}

Parameters GradientAccumulator::Mean() const {
  Parameters mean = sum_;
  if (count_ > 0) mean.Scale(1.0 / count_);
  return mean;
}

void GradientAccumulator::Reset() {
  sum_ = sum_.ZerosLike();
  count_ = 0;
}

}  // namespace crossview
