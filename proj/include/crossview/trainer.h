// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_TRAINER_H_
#define CROSSVIEW_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "crossview/adam.h"
#include "crossview/checkpoint.h"
#include "crossview/loss.h"
#include "crossview/manifest.h"
#include "crossview/model_config.h"
#include "crossview/pipeline.h"

namespace crossview {

struct TrainConfig {
  int epochs = 30;
  int effective_batch = 32;
  int micro_batch = 8;
  double learning_rate = 1e-5;
  uint64_t seed = 0;
  double fov_degrees = 360.0;
  Variant variant = Variant::kQuad;
  FusionMode fusion = FusionMode::kPartialSum;
  // Validation recall on the test split every this many epochs (0 = never).
  int validate_every = 5;

  void Validate() const;
};

std::string TrainConfigToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const std::string& text);

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;
  // Present on validation epochs.
  std::optional<double> r1, r5, r10, r1pct;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochMetrics> history;
};

// Loss and parameter gradients of one batch of prepared samples. The
// ground rasters must already be cropped to the training FoV.
template <typename T>
double BatchLossAndGradients(const Parameters& params,
                             const ModelConfig& config,
                             const std::vector<const RasterSet*>& batch,
                             const LossConfig& loss, Parameters* grads);

// Full training loop. Deterministic for fixed inputs regardless of the
// thread budget.
TrainResult Train(const ModelConfig& model_config,
                  const TrainConfig& train_config,
                  const DatasetManifest& manifest,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {});

// CSV: epoch,loss,r@1,r@5,r@10,r@1pct (empty cells off validation epochs).
std::string MetricsCsv(const std::vector<EpochMetrics>& history);

}  // namespace crossview

#endif  // CROSSVIEW_TRAINER_H_
