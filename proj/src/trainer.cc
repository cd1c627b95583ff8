// SPDX-License-Identifier: Apache-2.0

#include "crossview/trainer.h"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "crossview/error.h"
#include "crossview/evaluation.h"
#include "crossview/geometry.h"
#include "crossview/matching.h"
#include "crossview/parallel.h"
#include "json.hpp"

namespace crossview {

using nlohmann::json;

void TrainConfig::Validate() const {
  if (epochs < 0) throw Error(ErrorCode::kInvalidConfig, "epochs < 0");
  if (micro_batch < 2 || effective_batch < micro_batch ||
      effective_batch % micro_batch != 0) {
    throw Error(ErrorCode::kInvalidConfig,
                "micro_batch must be >= 2 and divide effective_batch");
  }
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "learning_rate must be > 0");
  }
  FovCropWidth(512, fov_degrees);
}

std::string TrainConfigToJson(const TrainConfig& c) {
  const json doc = {{"epochs", c.epochs},
                    {"effective_batch", c.effective_batch},
                    {"micro_batch", c.micro_batch},
                    {"learning_rate", c.learning_rate},
                    {"seed", c.seed},
                    {"fov_degrees", c.fov_degrees},
                    {"variant", VariantName(c.variant)},
                    {"fusion", FusionName(c.fusion)},
                    {"validate_every", c.validate_every}};
  return doc.dump(2);
}

TrainConfig TrainConfigFromJson(const std::string& text) {
  TrainConfig c;
  try {
    const json doc = json::parse(text);
    c.epochs = doc.value("epochs", c.epochs);
    c.effective_batch = doc.value("effective_batch", c.effective_batch);
    c.micro_batch = doc.value("micro_batch", c.micro_batch);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.seed = doc.value("seed", c.seed);
    c.fov_degrees = doc.value("fov_degrees", c.fov_degrees);
    c.validate_every = doc.value("validate_every", c.validate_every);
    if (doc.contains("variant")) {
      const auto v = ParseVariant(doc["variant"].get<std::string>());
      if (!v) throw Error(ErrorCode::kInvalidConfig, "unknown variant");
      c.variant = *v;
    }
    if (doc.contains("fusion")) {
      const auto f = ParseFusion(doc["fusion"].get<std::string>());
      if (!f) throw Error(ErrorCode::kInvalidConfig, "unknown fusion");
      c.fusion = *f;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("malformed train config: ") + e.what());
  }
  c.Validate();
  return c;
}

template <typename T>
double BatchLossAndGradients(const Parameters& params,
                             const ModelConfig& config,
                             const std::vector<const RasterSet*>& batch,
                             const LossConfig& loss, Parameters* grads) {
  const int n = static_cast<int>(batch.size());
  std::vector<ViewpointTrace<T>> ground(n), aerial(n);
  ParallelFor(n, [&](int i) {
    ground[i] =
        UnifiedFeaturesTraced<T>(params, config, *batch[i], Viewpoint::kGround);
    aerial[i] = UnifiedFeaturesTraced<T>(params, config, *batch[i],
                                         Viewpoint::kSatellite);
  });

  Matrix d(n, std::vector<double>(n));
  std::vector<std::vector<int>> orientation(n, std::vector<int>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const MatchResult m = MatchPair(aerial[j].features, ground[i].features);
      d[i][j] = m.distance;
      orientation[i][j] = m.orientation;
    }
  }
  const double value = TripletLoss(d, loss);
  if (grads == nullptr) return value;

  const Matrix dd = TripletLossGrad(d, loss);
  std::vector<BasicVolume<T>> g_ground, g_aerial;
  for (int i = 0; i < n; ++i) {
    const auto& f = ground[i].features;
    g_ground.emplace_back(f.width(), f.height(), f.channels());
    const auto& a = aerial[i].features;
    g_aerial.emplace_back(a.width(), a.height(), a.channels());
  }
  // dD/dG = (G - crop) / D, dD/dcrop = -(G - crop) / D; the orientation is
  // held fixed.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (dd[i][j] == 0.0 || d[i][j] == 0.0) continue;
      const BasicVolume<T>& g = ground[i].features;
      const BasicVolume<T> crop =
          CropAt(aerial[j].features, orientation[i][j], g.width());
      BasicVolume<T> crop_grad(g.width(), g.height(), g.channels());
      const double scale = dd[i][j] / d[i][j];
      for (size_t k = 0; k < g.size(); ++k) {
        const double diff =
            static_cast<double>(g.values()[k]) - crop.values()[k];
        g_ground[i].values()[k] += static_cast<T>(scale * diff);
        crop_grad.values()[k] = static_cast<T>(-scale * diff);
      }
      CropAtBackward(crop_grad, orientation[i][j], g_aerial[j]);
    }
  }

  // Per-sample gradients, reduced in index order.
  std::vector<Parameters> per_sample(n);
  ParallelFor(n, [&](int i) {
    per_sample[i] = params.ZerosLike();
    UnifiedFeaturesBackward(params, config, ground[i], g_ground[i],
                            per_sample[i]);
    UnifiedFeaturesBackward(params, config, aerial[i], g_aerial[i],
                            per_sample[i]);
  });
  for (int i = 0; i < n; ++i) grads->Axpy(1.0, per_sample[i]);
  return value;
}

template double BatchLossAndGradients<float>(const Parameters&,
                                             const ModelConfig&,
                                             const std::vector<const RasterSet*>&,
                                             const LossConfig&, Parameters*);
template double BatchLossAndGradients<double>(
    const Parameters&, const ModelConfig&, const std::vector<const RasterSet*>&,
    const LossConfig&, Parameters*);

namespace {

std::vector<RasterSet> LoadPrepared(const DatasetManifest& manifest,
                                    const std::vector<const ManifestRecord*>& records,
                                    const ModelConfig& config,
                                    std::vector<std::string>* ids) {
  std::vector<RasterSet> prepared(records.size());
  const auto roles = config.Roles();
  ParallelFor(static_cast<int>(records.size()), [&](int i) {
    prepared[i] =
        PrepareRasters(LoadSample(manifest, *records[i], roles), config);
  });
  if (ids != nullptr) {
    for (const auto* r : records) ids->push_back(r->id);
  }
  return prepared;
}

}  // namespace

TrainResult Train(const ModelConfig& model_config,
                  const TrainConfig& train_config,
                  const DatasetManifest& manifest,
                  const std::function<void(const EpochMetrics&)>& on_epoch) {
  model_config.Validate();
  train_config.Validate();
  const auto train_records = manifest.SplitRecords(Split::kTrain);
  if (static_cast<int>(train_records.size()) < train_config.effective_batch) {
    throw Error(ErrorCode::kDatasetTooSmall,
                std::to_string(train_records.size()) +
                    " training samples, effective batch is " +
                    std::to_string(train_config.effective_batch));
  }
  const std::vector<RasterSet> train_set =
      LoadPrepared(manifest, train_records, model_config, nullptr);
  std::vector<std::string> test_ids;
  std::vector<RasterSet> test_set;
  if (train_config.validate_every > 0) {
    test_set = LoadPrepared(manifest, manifest.SplitRecords(Split::kTest),
                            model_config, &test_ids);
  }

  TrainResult result;
  result.checkpoint.config = model_config;
  Parameters& params = result.checkpoint.params;
  params = BuildExtractor(model_config, train_config.seed);
  OptimizerState state = OptimizerState::For(params);
  AdamOptions adam;
  adam.learning_rate = train_config.learning_rate;
  const LossConfig loss{model_config.alpha, true};

  std::mt19937_64 rng(train_config.seed ^ 0x9e3779b97f4a7c15ull);
  const int n_train = static_cast<int>(train_set.size());
  const int steps = n_train / train_config.effective_batch;
  const int micro_per_step =
      train_config.effective_batch / train_config.micro_batch;
  std::vector<int> order(n_train);
  for (int i = 0; i < n_train; ++i) order[i] = i;

  GradientAccumulator accumulator(params);
  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    for (int i = n_train - 1; i > 0; --i) {
      std::swap(order[i], order[UniformIndex(rng, i + 1)]);
    }
    double loss_sum = 0.0;
    int loss_count = 0;
    for (int step = 0; step < steps; ++step) {
      accumulator.Reset();
      for (int m = 0; m < micro_per_step; ++m) {
        std::vector<RasterSet> cropped;
        for (int k = 0; k < train_config.micro_batch; ++k) {
          const int idx = order[step * train_config.effective_batch +
                                m * train_config.micro_batch + k];
          const int start = static_cast<int>(
              UniformIndex(rng, static_cast<uint64_t>(model_config.pano_width)));
          cropped.push_back(
              CropGround(train_set[idx], train_config.fov_degrees, start));
        }
        std::vector<const RasterSet*> batch;
        for (const auto& r : cropped) batch.push_back(&r);
        Parameters grads = params.ZerosLike();
        loss_sum += BatchLossAndGradients<float>(params, model_config, batch,
                                                 loss, &grads);
        ++loss_count;
        accumulator.Add(grads);
      }
      AdamStep(params, accumulator.Mean(), state, adam);
    }
    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
    if (train_config.validate_every > 0 &&
        epoch % train_config.validate_every == 0 && test_set.size() >= 2) {
      const auto reports =
          EvaluatePrepared(result.checkpoint, test_set, test_ids,
                           {train_config.fov_degrees}, RankingKey::kDistance,
                           train_config.seed);
      metrics.r1 = reports[0].r1();
      metrics.r5 = reports[0].r5();
      metrics.r10 = reports[0].r10();
      metrics.r1pct = reports[0].r1pct();
    }
    result.history.push_back(metrics);
    if (on_epoch) on_epoch(metrics);
  }
  return result;
}

std::string MetricsCsv(const std::vector<EpochMetrics>& history) {
  std::ostringstream out;
  out << "epoch,loss,r@1,r@5,r@10,r@1pct\n";
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return std::string(buf);
  };
  for (const auto& m : history) {
    char loss[32];
    std::snprintf(loss, sizeof(loss), "%.9g", m.loss);
    out << m.epoch << ',' << loss << ',' << cell(m.r1) << ',' << cell(m.r5)
        << ',' << cell(m.r10) << ',' << cell(m.r1pct) << '\n';
  }
  return out.str();
}

}  // namespace crossview
