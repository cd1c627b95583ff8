// SPDX-License-Identifier: Apache-2.0

#include "crossview/evaluation.h"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "crossview/error.h"
#include "crossview/geometry.h"
#include "crossview/matching.h"
#include "crossview/parallel.h"
#include "json.hpp"

namespace crossview {

using nlohmann::json;

int KForPercent(int n, double pct) {
  if (n < 1 || !(pct > 0.0) || pct > 100.0) {
    throw Error(ErrorCode::kInvalidArgument, "k_for_percent needs n >= 1 and "
                                             "0 < pct <= 100");
  }
  // Exact for integral percentages; avoids 2215 * 1 / 100 drifting above an
  // integer boundary.
  const double k = std::ceil(n * pct / 100.0 - 1e-9);
  return std::max(1, static_cast<int>(k));
}

double RecallAtK(const std::vector<int>& ranks, int k) {
  if (ranks.empty()) throw Error(ErrorCode::kEmptyRanks, "no ranks");
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  int hits = 0;
  for (int r : ranks) hits += r <= k;
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

std::vector<int> TrueMatchRanks(const Matrix& keys, bool ascending) {
  std::vector<int> ranks;
  for (size_t i = 0; i < keys.size(); ++i) {
    const auto& row = keys[i];
    if (i >= row.size()) {
      throw Error(ErrorCode::kShapeMismatch, "query has no true candidate");
    }
    const double truth = row[i];
    int rank = 1;
    for (size_t j = 0; j < row.size(); ++j) {
      if (j == i) continue;
      const bool better = ascending ? row[j] < truth : row[j] > truth;
      if (better || (row[j] == truth && j < i)) ++rank;
    }
    ranks.push_back(rank);
  }
  return ranks;
}

RecallReport ReportFromFeatures(const std::vector<FeatureVolume>& ground,
                                const std::vector<FeatureVolume>& aerial,
                                const std::vector<std::string>& ids,
                                RankingKey key, double test_fov) {
  if (ground.size() != aerial.size() || ground.size() != ids.size() ||
      ground.empty()) {
    throw Error(ErrorCode::kShapeMismatch,
                "queries, candidates and ids must pair up");
  }
  const int n = static_cast<int>(ground.size());
  Matrix keys(n, std::vector<double>(n));
  std::vector<int> orientation(n);
  ParallelFor(n, [&](int i) {
    for (int j = 0; j < n; ++j) {
      const MatchResult m = MatchPair(aerial[j], ground[i]);
      keys[i][j] = key == RankingKey::kDistance ? m.distance : m.score;
      if (i == j) orientation[i] = m.orientation;
    }
  });
  const std::vector<int> ranks =
      TrueMatchRanks(keys, key == RankingKey::kDistance);

  RecallReport report;
  report.test_fov = test_fov;
  report.n_queries = n;
  report.n_candidates = n;
  report.k_values = {1, 5, 10, KForPercent(n, 1.0)};
  for (int k : report.k_values) report.recalls[k] = RecallAtK(ranks, k);
  for (int i = 0; i < n; ++i) {
    report.per_query.push_back({ids[i], ranks[i], orientation[i]});
  }
  return report;
}

std::vector<RecallReport> EvaluatePrepared(
    const Checkpoint& checkpoint, const std::vector<RasterSet>& prepared,
    const std::vector<std::string>& ids, const std::vector<double>& test_fovs,
    RankingKey key, uint64_t seed) {
  const ModelConfig& config = checkpoint.config;
  const int n = static_cast<int>(prepared.size());
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "empty test split");
  std::vector<FeatureVolume> aerial(n);
  ParallelFor(n, [&](int i) {
    aerial[i] = UnifiedFeatures<float>(checkpoint.params, config, prepared[i],
                                       Viewpoint::kSatellite);
  });
  std::vector<RecallReport> reports;
  for (double fov : test_fovs) {
    FovCropWidth(config.pano_width, fov);
    // One start column per query, from a stream that depends only on
    // (seed, fov).
    const auto fov_key = static_cast<uint32_t>(std::llround(fov * 1000.0));
    std::seed_seq seq{static_cast<uint32_t>(seed),
                      static_cast<uint32_t>(seed >> 32), fov_key};
    std::mt19937_64 rng(seq);
    std::vector<int> starts(n);
    for (int i = 0; i < n; ++i) {
      starts[i] = static_cast<int>(
          UniformIndex(rng, static_cast<uint64_t>(config.pano_width)));
    }
    std::vector<FeatureVolume> ground(n);
    ParallelFor(n, [&](int i) {
      ground[i] = UnifiedFeatures<float>(
          checkpoint.params, config, CropGround(prepared[i], fov, starts[i]),
          Viewpoint::kGround);
    });
    reports.push_back(ReportFromFeatures(ground, aerial, ids, key, fov));
  }
  return reports;
}

std::vector<RecallReport> Evaluate(const Checkpoint& checkpoint,
                                   const DatasetManifest& manifest,
                                   const std::vector<double>& test_fovs,
                                   RankingKey key, uint64_t seed) {
  const auto records = manifest.SplitRecords(Split::kTest);
  if (records.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "manifest has no test samples");
  }
  const auto roles = checkpoint.config.Roles();
  std::vector<RasterSet> prepared(records.size());
  std::vector<std::string> ids;
  for (const auto* r : records) ids.push_back(r->id);
  ParallelFor(static_cast<int>(records.size()), [&](int i) {
    prepared[i] = PrepareRasters(LoadSample(manifest, *records[i], roles),
                                 checkpoint.config);
  });
  return EvaluatePrepared(checkpoint, prepared, ids, test_fovs, key, seed);
}

std::vector<RecallReport> Evaluate(const RunSpec& spec) {
  for (double fov : spec.test_fovs) FovCropWidth(512, fov);
  FovCropWidth(512, spec.train_fov);
  return Evaluate(ReadCheckpoint(spec.checkpoint), ReadManifest(spec.manifest),
                  spec.test_fovs, spec.ranking_key, spec.seed);
}

std::string FormatReportTable(const std::vector<RecallReport>& reports) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %6s %9s %9s %9s %9s %6s\n", "FoV",
                "n", "r@1", "r@5", "r@10", "r@1%", "K(1%)");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof(line),
                  "%-8g %6d %8.2f%% %8.2f%% %8.2f%% %8.2f%% %6d\n",
                  r.test_fov, r.n_queries, 100.0 * r.r1(), 100.0 * r.r5(),
                  100.0 * r.r10(), 100.0 * r.r1pct(), r.k_values.back());
    out << line;
  }
  return out.str();
}

std::string ReportsToJson(const std::vector<RecallReport>& reports) {
  json doc = json::array();
  for (const auto& r : reports) {
    json recalls = json::object();
    for (const auto& [k, v] : r.recalls) recalls[std::to_string(k)] = v;
    json rows = json::array();
    for (const auto& q : r.per_query) {
      rows.push_back(
          {{"id", q.id}, {"rank", q.rank}, {"orientation", q.orientation}});
    }
    doc.push_back({{"test_fov", r.test_fov},
                   {"n_queries", r.n_queries},
                   {"n_candidates", r.n_candidates},
                   {"k_values", r.k_values},
                   {"recalls", recalls},
                   {"r@1", r.r1()},
                   {"r@5", r.r5()},
                   {"r@10", r.r10()},
                   {"r@1pct", r.r1pct()},
                   {"per_query", rows}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace crossview
