// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "crossview/adam.h"
#include "crossview/checkpoint.h"
#include "crossview/error.h"
#include "crossview/pipeline.h"
#include "crossview/synthetic.h"
#include "crossview/trainer.h"
#include "test_util.h"

namespace crossview {
namespace {

using testing::RandomRaster;
using testing::ReadBytes;
using testing::ScratchDir;

Parameters Filled(const Parameters& like, double value) {
  Parameters p = like.ZerosLike();
  for (auto& s : p.streams) {
    for (auto& c : s.convs) {
      std::fill(c.weights.begin(), c.weights.end(), value);
      std::fill(c.bias.begin(), c.bias.end(), value);
    }
  }
  return p;
}

ModelConfig SmallConfig(Variant variant) {
  ModelConfig config = ModelConfig::ForVariant(variant);
  config.pano_width = 128;
  config.pano_height = 64;
  return config;
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ModelConfig config = ModelConfig::ForVariant(Variant::kDuo);
  config.freeze_depth = 0;
  config.ApplyFreezeDepth();
  const Parameters start = BuildExtractor(config, 1);
  Parameters params = start;
  OptimizerState state = OptimizerState::For(params);
  AdamOptions options;
  AdamStep(params, Filled(params, 1.0), state, options);
  EXPECT_EQ(state.step, 1);
  for (size_t s = 0; s < params.streams.size(); ++s) {
    for (size_t c = 0; c < params.streams[s].convs.size(); ++c) {
      const auto& now = params.streams[s].convs[c].weights;
      const auto& before = start.streams[s].convs[c].weights;
      for (size_t i = 0; i < now.size(); ++i) {
        EXPECT_NEAR(now[i] - before[i], -options.learning_rate, 1e-12);
      }
    }
  }
}

TEST(Adam, ZeroGradientLeavesParameters) {
  const ModelConfig config = ModelConfig::ForVariant(Variant::kDuo);
  Parameters params = BuildExtractor(config, 2);
  const Parameters start = params;
  OptimizerState state = OptimizerState::For(params);
  AdamStep(params, params.ZerosLike(), state, {});
  EXPECT_EQ(params, start);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, FrozenBlocksUntouched) {
  const ModelConfig config = ModelConfig::ForVariant(Variant::kDuo);
  Parameters params = BuildExtractor(config, 3);
  const Parameters start = params;
  OptimizerState state = OptimizerState::For(params);
  AdamStep(params, Filled(params, 1.0), state, {});
  for (size_t s = 0; s < params.streams.size(); ++s) {
    for (size_t c = 0; c < params.streams[s].convs.size(); ++c) {
      const bool same = params.streams[s].convs[c] == start.streams[s].convs[c];
      EXPECT_EQ(same, params.streams[s].convs[c].frozen);
    }
  }
}

TEST(Accumulator, IdenticalMicroBatchesEqualOneBatch) {
  const ModelConfig config = SmallConfig(Variant::kDuo);
  const Parameters params = BuildExtractor(config, 4);
  std::mt19937_64 rng(4);
  std::vector<RasterSet> sets(4);
  for (auto& s : sets) {
    for (RasterRole role : config.Roles()) {
      s.emplace(role, RandomRaster(rng, 128, 64, role));
    }
  }
  std::vector<const RasterSet*> batch;
  for (const auto& s : sets) batch.push_back(&s);
  Parameters g = params.ZerosLike();
  BatchLossAndGradients<float>(params, config, batch, {}, &g);

  GradientAccumulator acc(params);
  acc.Add(g);
  acc.Add(g);
  EXPECT_EQ(acc.count(), 2);
  EXPECT_EQ(acc.Mean(), g);

  Parameters a = params, b = params;
  OptimizerState sa = OptimizerState::For(a), sb = OptimizerState::For(b);
  AdamStep(a, acc.Mean(), sa, {});
  AdamStep(b, g, sb, {});
  EXPECT_EQ(a, b);
  acc.Reset();
  EXPECT_EQ(acc.count(), 0);
}

TEST(Accumulator, MeanOfDistinctGradients) {
  const Parameters like = BuildExtractor(ModelConfig::ForVariant(Variant::kDuo), 0);
  GradientAccumulator acc(like);
  acc.Add(Filled(like, 1.0));
  acc.Add(Filled(like, 3.0));
  EXPECT_EQ(acc.Mean(), Filled(like, 2.0));
}

TEST(Gradient, EndToEndMatchesFiniteDifferences) {
  ModelConfig config = ModelConfig::ForVariant(Variant::kQuad);
  config.pano_width = 64;
  config.pano_height = 32;
  config.freeze_depth = 0;
  config.ApplyFreezeDepth();
  const Parameters params = BuildExtractor(config, 5);
  std::mt19937_64 rng(5);
  std::vector<RasterSet> sets(4);
  for (auto& s : sets) {
    RasterSet full;
    for (RasterRole role : config.Roles()) {
      full.emplace(role, RandomRaster(rng, 64, 32, role));
    }
    s = CropGround(full, 180, static_cast<int>(rng() % 64));
  }
  std::vector<const RasterSet*> batch;
  for (const auto& s : sets) batch.push_back(&s);
  const LossConfig loss{10.0, true};
  Parameters grads = params.ZerosLike();
  BatchLossAndGradients<double>(params, config, batch, loss, &grads);

  // Small step: first-layer ReLU and pooling kinks sit within 1e-4.
  constexpr double kStep = 1e-6;
  double worst = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const size_t s = rng() % params.streams.size();
    const size_t c = rng() % params.streams[s].convs.size();
    Parameters plus = params, minus = params;
    const size_t i = rng() % plus.streams[s].convs[c].weights.size();
    plus.streams[s].convs[c].weights[i] += kStep;
    minus.streams[s].convs[c].weights[i] -= kStep;
    const double fd =
        (BatchLossAndGradients<double>(plus, config, batch, loss, nullptr) -
         BatchLossAndGradients<double>(minus, config, batch, loss, nullptr)) /
        (2 * kStep);
    const double an = grads.streams[s].convs[c].weights[i];
    worst = std::max(worst, std::abs(fd - an) /
                                std::max({std::abs(fd), std::abs(an), 1e-6}));
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(Gradient, ThreadCountDoesNotChangeResult) {
  const ModelConfig config = SmallConfig(Variant::kQuad);
  const Parameters params = BuildExtractor(config, 6);
  std::mt19937_64 rng(6);
  std::vector<RasterSet> sets(3);
  for (auto& s : sets) {
    for (RasterRole role : config.Roles()) {
      s.emplace(role, RandomRaster(rng, 128, 64, role));
    }
  }
  std::vector<const RasterSet*> batch;
  for (const auto& s : sets) batch.push_back(&s);
  Parameters one = params.ZerosLike(), many = params.ZerosLike();
  setenv("CROSSVIEW_THREADS", "1", 1);
  const double l1 = BatchLossAndGradients<float>(params, config, batch, {}, &one);
  setenv("CROSSVIEW_THREADS", "3", 1);
  const double l3 = BatchLossAndGradients<float>(params, config, batch, {}, &many);
  unsetenv("CROSSVIEW_THREADS");
  EXPECT_EQ(l1, l3);
  EXPECT_EQ(one, many);
}

class SmallTraining : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new std::filesystem::path(ScratchDir("training"));
    SyntheticOptions options;
    options.seed = 21;
    options.n_samples = 64;
    options.sat_size = 64;
    GenerateSyntheticDataset(options, SmallConfig(Variant::kQuad),
                             *dir_ / "data");
  }
  static void TearDownTestSuite() { delete dir_; }

  static TrainConfig Config(int epochs) {
    TrainConfig c;
    c.epochs = epochs;
    c.effective_batch = 16;
    c.micro_batch = 8;
    c.learning_rate = 1e-3;
    c.seed = 3;
    c.validate_every = 0;
    return c;
  }

  static std::filesystem::path* dir_;
};

std::filesystem::path* SmallTraining::dir_ = nullptr;

TEST_F(SmallTraining, LossDecreases) {
  const DatasetManifest manifest = ReadManifest(*dir_ / "data/manifest.json");
  const TrainResult r =
      Train(SmallConfig(Variant::kQuad), Config(10), manifest);
  ASSERT_EQ(r.history.size(), 10u);
  EXPECT_LT(r.history.back().loss, r.history.front().loss);
  // Averages of the first and last three epochs.
  const double head =
      (r.history[0].loss + r.history[1].loss + r.history[2].loss) / 3;
  const double tail =
      (r.history[7].loss + r.history[8].loss + r.history[9].loss) / 3;
  EXPECT_LT(tail, head);
  EXPECT_TRUE(r.checkpoint.params.AllFinite());
}

TEST_F(SmallTraining, SameSeedGivesIdenticalCheckpoints) {
  const DatasetManifest manifest = ReadManifest(*dir_ / "data/manifest.json");
  const TrainResult a = Train(SmallConfig(Variant::kQuad), Config(2), manifest);
  const TrainResult b = Train(SmallConfig(Variant::kQuad), Config(2), manifest);
  WriteCheckpoint(a.checkpoint, *dir_ / "a.fckp");
  WriteCheckpoint(b.checkpoint, *dir_ / "b.fckp");
  EXPECT_EQ(ReadBytes(*dir_ / "a.fckp"), ReadBytes(*dir_ / "b.fckp"));
  EXPECT_EQ(MetricsCsv(a.history), MetricsCsv(b.history));
}

TEST_F(SmallTraining, FrozenLayersKeepInitialValues) {
  const DatasetManifest manifest = ReadManifest(*dir_ / "data/manifest.json");
  const ModelConfig config = SmallConfig(Variant::kQuad);
  const TrainConfig tc = Config(2);
  const TrainResult r = Train(config, tc, manifest);
  const Parameters init = BuildExtractor(config, tc.seed);
  int frozen = 0, moved = 0;
  for (size_t s = 0; s < init.streams.size(); ++s) {
    for (size_t c = 0; c < init.streams[s].convs.size(); ++c) {
      const bool same = r.checkpoint.params.streams[s].convs[c] ==
                        init.streams[s].convs[c];
      if (init.streams[s].convs[c].frozen) {
        EXPECT_TRUE(same);
        ++frozen;
      } else {
        moved += !same;
      }
    }
  }
  EXPECT_EQ(frozen, 8);
  EXPECT_GT(moved, 0);
}

TEST_F(SmallTraining, TooFewSamplesRejected) {
  const DatasetManifest manifest = ReadManifest(*dir_ / "data/manifest.json");
  TrainConfig tc = Config(1);
  tc.effective_batch = 64;
  try {
    Train(SmallConfig(Variant::kQuad), tc, manifest);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDatasetTooSmall);
  }
}

TEST(Checkpoint, RoundTripIsExact) {
  const ModelConfig config =
      ModelConfig::ForVariant(Variant::kQuintuple, FusionMode::kConcat);
  const Checkpoint ckpt{config, BuildExtractor(config, 8)};
  const auto dir = ScratchDir("checkpoint");
  WriteCheckpoint(ckpt, dir / "c.fckp");
  const Checkpoint back = ReadCheckpoint(dir / "c.fckp");
  EXPECT_EQ(back.params, ckpt.params);
  EXPECT_EQ(ModelConfigToJson(back.config), ModelConfigToJson(config));
  WriteCheckpoint(back, dir / "d.fckp");
  EXPECT_EQ(ReadBytes(dir / "c.fckp"), ReadBytes(dir / "d.fckp"));
}

TEST(Checkpoint, CorruptFileRejected) {
  const auto dir = ScratchDir("checkpoint_bad");
  const ModelConfig config = ModelConfig::ForVariant(Variant::kDuo);
  WriteCheckpoint({config, BuildExtractor(config, 0)}, dir / "c.fckp");
  auto bytes = ReadBytes(dir / "c.fckp");
  bytes.resize(bytes.size() - 8);
  {
    std::ofstream out(dir / "t.fckp", std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
  EXPECT_THROW(ReadCheckpoint(dir / "t.fckp"), Error);
  bytes[0] = 'X';
  {
    std::ofstream out(dir / "m.fckp", std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
  EXPECT_THROW(ReadCheckpoint(dir / "m.fckp"), Error);
}

TEST(TrainConfigJson, RoundTripAndValidation) {
  TrainConfig c;
  c.epochs = 7;
  c.learning_rate = 3e-4;
  c.variant = Variant::kTripleGrd;
  c.fusion = FusionMode::kConcat;
  const TrainConfig back = TrainConfigFromJson(TrainConfigToJson(c));
  EXPECT_EQ(TrainConfigToJson(back), TrainConfigToJson(c));
  EXPECT_THROW(TrainConfigFromJson(R"({"micro_batch": 5})"), Error);
  EXPECT_THROW(TrainConfigFromJson(R"({"variant": "octet"})"), Error);
}

}  // namespace
}  // namespace crossview
