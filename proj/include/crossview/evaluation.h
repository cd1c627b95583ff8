// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_EVALUATION_H_
#define CROSSVIEW_EVALUATION_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "crossview/checkpoint.h"
#include "crossview/feature_volume.h"
#include "crossview/loss.h"
#include "crossview/manifest.h"
#include "crossview/pipeline.h"

namespace crossview {

enum class RankingKey { kDistance, kScore };

// ceil(n * pct / 100).
int KForPercent(int n, double pct);

// Fraction of ranks <= k. Throws kEmptyRanks on an empty list.
double RecallAtK(const std::vector<int>& ranks, int k);

struct QueryResult {
  std::string id;
  int rank = 0;         // 1-based rank of the true aerial match
  int orientation = 0;  // estimated against the true aerial
};

struct RecallReport {
  double test_fov = 360.0;
  int n_queries = 0;
  int n_candidates = 0;
  std::vector<int> k_values;  // 1, 5, 10, K(1%)
  std::map<int, double> recalls;
  std::vector<QueryResult> per_query;

  double r1() const { return recalls.at(1); }
  double r5() const { return recalls.at(5); }
  double r10() const { return recalls.at(10); }
  double r1pct() const { return recalls.at(k_values.back()); }
};

// Rank of the true candidate in each row of a query x candidate matrix.
// Ascending for distances, descending for scores; ties go to the lower
// candidate index.
std::vector<int> TrueMatchRanks(const Matrix& keys, bool ascending);

// Builds a report from precomputed features; ground[i] pairs with aerial[i].
RecallReport ReportFromFeatures(const std::vector<FeatureVolume>& ground,
                                const std::vector<FeatureVolume>& aerial,
                                const std::vector<std::string>& ids,
                                RankingKey key, double test_fov);

struct RunSpec {
  std::filesystem::path checkpoint;
  std::filesystem::path manifest;
  double train_fov = 360.0;
  std::vector<double> test_fovs = {360.0};
  RankingKey ranking_key = RankingKey::kDistance;
  uint64_t seed = 0;
};

// Ranks every test-split aerial for each test-split ground query cropped to
// each FoV at a seeded random start column.
std::vector<RecallReport> Evaluate(const Checkpoint& checkpoint,
                                   const DatasetManifest& manifest,
                                   const std::vector<double>& test_fovs,
                                   RankingKey key, uint64_t seed);
std::vector<RecallReport> Evaluate(const RunSpec& spec);

// Same, over samples that are already loaded and prepared.
std::vector<RecallReport> EvaluatePrepared(
    const Checkpoint& checkpoint, const std::vector<RasterSet>& prepared,
    const std::vector<std::string>& ids, const std::vector<double>& test_fovs,
    RankingKey key, uint64_t seed);

std::string FormatReportTable(const std::vector<RecallReport>& reports);
std::string ReportsToJson(const std::vector<RecallReport>& reports);

}  // namespace crossview

#endif  // CROSSVIEW_EVALUATION_H_
