// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>

#include "crossview/checkpoint.h"
#include "crossview/error.h"
#include "crossview/evaluation.h"
#include "crossview/fusion.h"
#include "crossview/network.h"
#include "crossview/pipeline.h"
#include "crossview/synthetic.h"
#include "json.hpp"
#include "test_util.h"

namespace crossview {
namespace {

using testing::RandomVolume;

TEST(KForPercent, Anchors) {
  EXPECT_EQ(KForPercent(2215, 1), 23);
  EXPECT_EQ(KForPercent(100, 1), 1);
  EXPECT_EQ(KForPercent(1000, 1), 10);
  EXPECT_EQ(KForPercent(64, 1), 1);
  EXPECT_EQ(KForPercent(150, 1), 2);
  EXPECT_THROW(KForPercent(0, 1), Error);
}

TEST(RecallAtK, Examples) {
  EXPECT_EQ(RecallAtK({1, 1, 1}, 1), 1.0);
  EXPECT_EQ(RecallAtK({1, 2, 5, 11}, 10), 0.75);
  EXPECT_EQ(RecallAtK({1, 2, 5, 11}, 11), 1.0);
  EXPECT_EQ(RecallAtK({1, 2, 5, 11}, 100), 1.0);
  try {
    RecallAtK({}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyRanks);
  }
}

TEST(TrueMatchRanks, DirectionAndTies) {
  const Matrix d = {{0.1, 0.5, 0.2}, {0.3, 0.3, 0.9}, {0.4, 0.8, 0.6}};
  // Row 1 ties with candidate 0, which has the lower index.
  EXPECT_EQ(TrueMatchRanks(d, true), (std::vector<int>{1, 2, 2}));
  EXPECT_EQ(TrueMatchRanks(d, false), (std::vector<int>{3, 3, 2}));
}

TEST(Report, NullModelIsNearChance) {
  std::mt19937_64 rng(1);
  constexpr int kTrials = 100;
  constexpr int kN = 40;
  int hits = 0;
  for (int t = 0; t < kTrials; ++t) {
    std::vector<FeatureVolume> g, a;
    std::vector<std::string> ids;
    for (int i = 0; i < kN; ++i) {
      g.push_back(L2Normalize(RandomVolume(rng, 4, 2, 4)));
      a.push_back(L2Normalize(RandomVolume(rng, 16, 2, 4)));
      ids.push_back(std::to_string(i));
    }
    const RecallReport r =
        ReportFromFeatures(g, a, ids, RankingKey::kDistance, 90);
    hits += static_cast<int>(std::lround(r.r1() * kN));
  }
  const double n = kTrials * kN;
  const double p = 1.0 / kN;
  EXPECT_LE(std::abs(hits - n * p), 3 * std::sqrt(n * p * (1 - p)));
}

TEST(Report, IdentityPairsRankFirst) {
  SyntheticOptions options;
  options.seed = 5;
  options.n_samples = 24;
  options.noise_level = 0;
  options.sat_size = 96;
  ModelConfig config = ModelConfig::ForVariant(Variant::kDuo);
  config.pano_width = 256;
  const Parameters params = BuildExtractor(config, 5);
  std::vector<FeatureVolume> g, a;
  std::vector<std::string> ids;
  for (int i = 0; i < options.n_samples; ++i) {
    const RasterSet sample = GenerateSyntheticSample(options, i, config);
    Sample s{std::to_string(i), Split::kTest, sample};
    const RasterSet prepared = PrepareRasters(s, config);
    g.push_back(UnifiedFeatures<float>(params, config, prepared,
                                       Viewpoint::kGround));
    a.push_back(UnifiedFeatures<float>(params, config, prepared,
                                       Viewpoint::kSatellite));
    ids.push_back(s.id);
  }
  const RecallReport r =
      ReportFromFeatures(g, a, ids, RankingKey::kDistance, 360);
  EXPECT_GE(r.r1(), 0.9);
  EXPECT_EQ(r.k_values, (std::vector<int>{1, 5, 10, 1}));
  for (const auto& q : r.per_query) {
    if (q.rank == 1) EXPECT_EQ(q.orientation, 0);
  }
}

class EvaluateRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new std::filesystem::path(testing::ScratchDir("evaluate"));
    ModelConfig config = ModelConfig::ForVariant(Variant::kQuad);
    config.pano_width = 128;
    config.pano_height = 64;
    SyntheticOptions options;
    options.seed = 11;
    options.n_samples = 12;
    options.sat_size = 64;
    GenerateSyntheticDataset(options, config, *dir_ / "data");
    WriteCheckpoint({config, BuildExtractor(config, 11)}, *dir_ / "c.fckp");
  }
  static void TearDownTestSuite() { delete dir_; }

  static RunSpec Spec() {
    RunSpec spec;
    spec.checkpoint = *dir_ / "c.fckp";
    spec.manifest = *dir_ / "data/manifest.json";
    spec.test_fovs = {360, 180, 90, 70};
    spec.seed = 4;
    return spec;
  }

  static std::filesystem::path* dir_;
};

std::filesystem::path* EvaluateRun::dir_ = nullptr;

TEST_F(EvaluateRun, OneReportPerFov) {
  const auto reports = Evaluate(Spec());
  ASSERT_EQ(reports.size(), 4u);
  EXPECT_EQ(reports[3].test_fov, 70);
  for (const auto& r : reports) {
    EXPECT_EQ(r.n_queries, 4);
    EXPECT_EQ(r.per_query.size(), 4u);
  }
  const auto doc = nlohmann::json::parse(ReportsToJson(reports));
  EXPECT_EQ(doc.size(), 4u);
  const std::string table = FormatReportTable(reports);
  EXPECT_NE(table.find("r@1%"), std::string::npos);
}

TEST_F(EvaluateRun, DeterministicAcrossRunsAndThreads) {
  setenv("CROSSVIEW_THREADS", "1", 1);
  const std::string one = ReportsToJson(Evaluate(Spec()));
  setenv("CROSSVIEW_THREADS", "4", 1);
  const std::string four = ReportsToJson(Evaluate(Spec()));
  unsetenv("CROSSVIEW_THREADS");
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, ReportsToJson(Evaluate(Spec())));
}

TEST_F(EvaluateRun, ScoreKeyRanksDescending) {
  RunSpec spec = Spec();
  spec.ranking_key = RankingKey::kScore;
  spec.test_fovs = {360};
  const auto reports = Evaluate(spec);
  ASSERT_EQ(reports.size(), 1u);
  for (const auto& q : reports[0].per_query) {
    EXPECT_GE(q.rank, 1);
    EXPECT_LE(q.rank, 4);
  }
}

TEST_F(EvaluateRun, InvalidFovRejected) {
  RunSpec spec = Spec();
  spec.test_fovs = {0};
  EXPECT_THROW(Evaluate(spec), Error);
}

TEST(RecallAtK, NondecreasingInKAndPermutationInvariant) {
  std::mt19937_64 rng(2);
  std::vector<int> ranks(50);
  for (int& r : ranks) r = 1 + static_cast<int>(rng() % 50);
  double prev = 0;
  for (int k = 1; k <= 50; ++k) {
    const double r = RecallAtK(ranks, k);
    EXPECT_GE(r, prev);
    prev = r;
  }
  std::vector<int> shuffled = ranks;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  for (int k : {1, 5, 10}) EXPECT_EQ(RecallAtK(ranks, k), RecallAtK(shuffled, k));
}

}  // namespace
}  // namespace crossview
