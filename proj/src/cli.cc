// SPDX-License-Identifier: Apache-2.0

#include "crossview/cli.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "crossview/checkpoint.h"
#include "crossview/error.h"
#include "crossview/evaluation.h"
#include "crossview/geometry.h"
#include "crossview/png_io.h"
#include "crossview/synthetic.h"
#include "crossview/trainer.h"
#include "json.hpp"

namespace crossview {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> ParseFovList(const std::string& text) {
  std::vector<double> fovs;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !(v > 0.0) || v > 360.0) throw 0;
      fovs.push_back(v);
    } catch (...) {
      throw UsageError("invalid FoV '" + item + "' (expected a value in "
                       "(0, 360])");
    }
  }
  if (fovs.empty()) throw UsageError("empty FoV list");
  return fovs;
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

RankingKey ParseRankingKey(const std::string& name) {
  if (name == "distance") return RankingKey::kDistance;
  if (name == "score") return RankingKey::kScore;
  throw UsageError("ranking key must be 'distance' or 'score'");
}

Variant ParseVariantOrUsage(const std::string& name) {
  const auto v = ParseVariant(name);
  if (!v) throw UsageError("unknown variant '" + name + "'");
  return *v;
}

FusionMode ParseFusionOrUsage(const std::string& name) {
  const auto f = ParseFusion(name);
  if (!f) throw UsageError("unknown fusion '" + name + "'");
  return *f;
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

// Shrinks the batch to fit tiny datasets; micro batch stays a divisor.
void FitBatchToDataset(TrainConfig& config, int n_train, std::ostream& err) {
  if (n_train >= config.effective_batch) return;
  if (n_train < 2) {
    throw Error(ErrorCode::kDatasetTooSmall,
                "need at least 2 training samples");
  }
  config.effective_batch = n_train;
  int micro = std::min(config.micro_batch, n_train);
  while (micro > 2 && n_train % micro != 0) --micro;
  if (n_train % micro != 0) micro = n_train;
  config.micro_batch = micro;
  err << "note: effective batch reduced to " << config.effective_batch
      << " (micro batch " << config.micro_batch << ") for " << n_train
      << " training samples\n";
}

struct TrainFlags {
  std::string config_path;
  std::string manifest;
  std::string out_dir;
  std::optional<int> epochs, effective_batch, micro_batch, validate_every;
  std::optional<int> pano_width, pano_height;
  std::optional<double> lr, fov, alpha;
  std::optional<uint64_t> seed;
  std::optional<std::string> variant, fusion;
};

void AddTrainOverrides(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--epochs", f.epochs, "Training epochs");
  cmd->add_option("--effective-batch", f.effective_batch,
                  "Samples per optimizer step");
  cmd->add_option("--micro-batch", f.micro_batch,
                  "Samples per accumulated micro-batch");
  cmd->add_option("--lr", f.lr, "Adam learning rate");
  cmd->add_option("--seed", f.seed, "Initialization/shuffle seed");
  cmd->add_option("--fov", f.fov, "Training field of view in degrees");
  cmd->add_option("--alpha", f.alpha, "Soft-margin weight");
  cmd->add_option("--validate-every", f.validate_every,
                  "Validation cadence in epochs (0 disables)");
  cmd->add_option("--pano-width", f.pano_width,
                  "Panorama width fed to the extractor");
  cmd->add_option("--pano-height", f.pano_height,
                  "Panorama height fed to the extractor");
}

std::pair<ModelConfig, TrainConfig> ResolveTrainConfig(const TrainFlags& f) {
  TrainConfig train;
  std::optional<json> model_doc;
  if (!f.config_path.empty()) {
    const json doc = json::parse(ReadText(f.config_path), nullptr, false);
    if (doc.is_discarded()) throw UsageError("config is not valid JSON");
    if (doc.contains("train")) train = TrainConfigFromJson(doc["train"].dump());
    if (doc.contains("model")) model_doc = doc["model"];
  }
  if (f.epochs) train.epochs = *f.epochs;
  if (f.effective_batch) train.effective_batch = *f.effective_batch;
  if (f.micro_batch) train.micro_batch = *f.micro_batch;
  if (f.lr) train.learning_rate = *f.lr;
  if (f.seed) train.seed = *f.seed;
  if (f.fov) train.fov_degrees = *f.fov;
  if (f.validate_every) train.validate_every = *f.validate_every;
  if (f.variant) train.variant = ParseVariantOrUsage(*f.variant);
  if (f.fusion) train.fusion = ParseFusionOrUsage(*f.fusion);

  ModelConfig model = ModelConfig::ForVariant(train.variant, train.fusion);
  if (model_doc) {
    json doc = *model_doc;
    if (!doc.contains("variant") && !doc.contains("streams")) {
      doc["variant"] = VariantName(train.variant);
    }
    if (!doc.contains("fusion")) doc["fusion"] = FusionName(train.fusion);
    model = ModelConfigFromJson(doc.dump());
  }
  if (f.alpha) model.alpha = *f.alpha;
  if (f.pano_width) model.pano_width = *f.pano_width;
  if (f.pano_height) model.pano_height = *f.pano_height;
  model.Validate();
  return {model, train};
}

int RunGenData(const CLI::App& cmd, std::ostream& out) {
  SyntheticOptions options;
  options.seed = cmd.get_option("--seed")->as<uint64_t>();
  options.n_samples = cmd.get_option("--count")->as<int>();
  options.sat_size = cmd.get_option("--sat-size")->as<int>();
  options.n_test = cmd.get_option("--test-count")->as<int>();
  options.test_fraction = cmd.get_option("--test-fraction")->as<double>();
  ModelConfig config = ModelConfig::ForVariant(
      cmd.get_option("--depth")->as<bool>() ? Variant::kQuintuple
                                             : Variant::kQuad);
  config.pano_width = cmd.get_option("--pano-width")->as<int>();
  config.pano_height = cmd.get_option("--pano-height")->as<int>();
  if (options.n_samples < 2) throw UsageError("--count must be >= 2");
  if (options.sat_size < 64) throw UsageError("--sat-size must be >= 64");
  const fs::path dir = cmd.get_option("--out")->as<std::string>();
  const DatasetManifest manifest =
      GenerateSyntheticDataset(options, config, dir);
  out << "wrote " << manifest.records.size() << " samples ("
      << manifest.SplitRecords(Split::kTest).size() << " test) to "
      << (dir / "manifest.json").string() << "\n";
  return 0;
}

int RunTrain(const TrainFlags& flags, std::ostream& out, std::ostream& err) {
  auto [model, train] = ResolveTrainConfig(flags);
  const DatasetManifest manifest = ReadManifest(flags.manifest);
  FitBatchToDataset(
      train, static_cast<int>(manifest.SplitRecords(Split::kTrain).size()),
      err);
  const fs::path dir = flags.out_dir;
  fs::create_directories(dir);
  const TrainResult result =
      Train(model, train, manifest, [&](const EpochMetrics& m) {
        out << "epoch " << m.epoch << " loss " << m.loss;
        if (m.r1) out << " r@1 " << *m.r1;
        out << "\n" << std::flush;
      });
  WriteCheckpoint(result.checkpoint, dir / "checkpoint.fckp");
  WriteText(dir / "metrics.csv", MetricsCsv(result.history));
  WriteText(dir / "train_config.json", TrainConfigToJson(train) + "\n");
  out << "checkpoint: " << (dir / "checkpoint.fckp").string() << "\n";
  return 0;
}

int RunEval(const RunSpec& spec, const std::string& out_path,
            std::ostream& out) {
  const auto reports = Evaluate(spec);
  out << FormatReportTable(reports);
  if (!out_path.empty()) {
    WriteText(out_path, ReportsToJson(reports));
    fs::path table = out_path;
    table.replace_extension(".txt");
    WriteText(table, FormatReportTable(reports));
  }
  return 0;
}

struct MatchFlags {
  std::string checkpoint, ground_rgb, ground_seg, ground_depth, candidates;
  int top_k = 5;
  double fov = 360.0;
};

int RunMatch(const MatchFlags& f, std::ostream& out) {
  const Checkpoint checkpoint = ReadCheckpoint(f.checkpoint);
  const ModelConfig& config = checkpoint.config;
  const int width = FovCropWidth(config.pano_width, f.fov);

  RasterSet query;
  auto load_ground = [&](RasterRole role, const std::string& path) {
    if (path.empty()) {
      throw UsageError("model needs --" +
                       std::string(role == RasterRole::kGroundSeg
                                       ? "ground-seg"
                                       : "ground-depth"));
    }
    Raster r = ReadPng(path, role);
    r = role == RasterRole::kGroundSeg
            ? ResizeNearest(r, width, config.pano_height)
            : Resize(r, width, config.pano_height);
    query.emplace(role, std::move(r));
  };
  for (const auto& s : config.streams) {
    if (s.viewpoint != Viewpoint::kGround) continue;
    const RasterRole role = s.role();
    load_ground(role, role == RasterRole::kGroundRgb   ? f.ground_rgb
                      : role == RasterRole::kGroundSeg ? f.ground_seg
                                                       : f.ground_depth);
  }
  const FeatureVolume ground =
      UnifiedFeatures<float>(checkpoint.params, config, query, Viewpoint::kGround);

  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(f.candidates)) {
    const std::string name = entry.path().filename().string();
    const std::string suffix = ".sat_rgb.png";
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      ids.push_back(name.substr(0, name.size() - suffix.size()));
    }
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) {
    throw Error(ErrorCode::kIo, "no *.sat_rgb.png candidates in " +
                                    f.candidates);
  }
  struct Row {
    std::string id;
    MatchResult match;
  };
  std::vector<Row> rows;
  for (const auto& id : ids) {
    Sample sample;
    sample.id = id;
    for (const auto& s : config.streams) {
      if (s.viewpoint != Viewpoint::kSatellite) continue;
      const fs::path path = fs::path(f.candidates) /
                            (id + "." + std::string(RoleName(s.role())) + ".png");
      sample.rasters.emplace(s.role(), ReadPng(path, s.role()));
    }
    ValidateSample(sample);
    RasterSet prepared;
    const PolarSpec rgb{config.pano_width, config.pano_height,
                        Sampling::kBilinear};
    const PolarSpec seg{config.pano_width, config.pano_height,
                        Sampling::kNearest};
    for (const auto& [role, raster] : sample.rasters) {
      prepared.emplace(role, PolarTransform(raster, role == RasterRole::kSatSeg
                                                        ? seg
                                                        : rgb));
    }
    const FeatureVolume aerial = UnifiedFeatures<float>(
        checkpoint.params, config, prepared, Viewpoint::kSatellite);
    rows.push_back({id, MatchPair(aerial, ground)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.match.distance < b.match.distance;
  });
  const int shown = std::min<int>(f.top_k, static_cast<int>(rows.size()));
  const auto [feature_width, feature_height] =
      config.OutputSize(config.pano_width, config.pano_height);
  (void)feature_height;
  char line[200];
  std::snprintf(line, sizeof(line), "%-5s %-24s %10s %10s %8s %9s\n", "rank",
                "candidate", "distance", "score", "shift", "azimuth");
  out << line;
  for (int i = 0; i < shown; ++i) {
    const auto& r = rows[i];
    std::snprintf(line, sizeof(line), "%-5d %-24s %10.6f %10.6f %8d %8.2f\n",
                  i + 1, r.id.c_str(), r.match.distance, r.match.score,
                  r.match.orientation,
                  360.0 * r.match.orientation / feature_width);
    out << line;
  }
  return 0;
}

struct AblateFlags {
  TrainFlags train;
  std::string variants = "triple_sat,triple_grd,quad";
  std::string fusions = "sum,concat";
  std::string test_fovs;
  std::string ranking_key = "distance";
};

int RunAblate(const AblateFlags& f, std::ostream& out, std::ostream& err) {
  const DatasetManifest manifest = ReadManifest(f.train.manifest);
  const fs::path dir = f.train.out_dir;
  fs::create_directories(dir);
  const RankingKey key = ParseRankingKey(f.ranking_key);
  json combined = json::array();
  std::ostringstream table;
  char line[200];
  std::snprintf(line, sizeof(line), "%-12s %-12s %-6s %9s %9s %9s %9s\n",
                "variant", "fusion", "FoV", "r@1", "r@5", "r@10", "r@1%");
  table << line;
  for (const auto& vname : SplitList(f.variants)) {
    for (const auto& fname : SplitList(f.fusions)) {
      TrainFlags flags = f.train;
      flags.variant = vname;
      flags.fusion = fname;
      auto [model, train] = ResolveTrainConfig(flags);
      FitBatchToDataset(
          train, static_cast<int>(manifest.SplitRecords(Split::kTrain).size()),
          err);
      const std::string tag = std::string(VariantName(train.variant)) + "_" +
                              std::string(FusionName(train.fusion));
      out << "training " << tag << "\n" << std::flush;
      const TrainResult result = Train(model, train, manifest);
      const fs::path ckpt = dir / (tag + ".fckp");
      WriteCheckpoint(result.checkpoint, ckpt);
      WriteText(dir / (tag + ".metrics.csv"), MetricsCsv(result.history));
      const std::vector<double> fovs = f.test_fovs.empty()
                                           ? std::vector<double>{train.fov_degrees}
                                           : ParseFovList(f.test_fovs);
      // Evaluate from the file just written, exactly as `eval` would.
      const auto reports =
          Evaluate(ReadCheckpoint(ckpt), manifest, fovs, key, train.seed);
      for (const auto& r : reports) {
        std::snprintf(line, sizeof(line),
                      "%-12s %-12s %-6g %8.2f%% %8.2f%% %8.2f%% %8.2f%%\n",
                      std::string(VariantName(train.variant)).c_str(),
                      std::string(FusionName(train.fusion)).c_str(), r.test_fov,
                      100 * r.r1(), 100 * r.r5(), 100 * r.r10(),
                      100 * r.r1pct());
        table << line;
      }
      combined.push_back({{"variant", VariantName(train.variant)},
                          {"fusion", FusionName(train.fusion)},
                          {"checkpoint", ckpt.filename().string()},
                          {"reports", json::parse(ReportsToJson(reports))}});
    }
  }
  out << table.str();
  WriteText(dir / "ablation.txt", table.str());
  WriteText(dir / "ablation.json", combined.dump(2) + "\n");
  return 0;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Ground-to-aerial cross-view matching toolkit"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  gen->add_option("--seed", "Generator seed")->default_val(0);
  gen->add_option("--count", "Number of samples")->required();
  gen->add_option("--sat-size", "Satellite image side")->default_val(256);
  gen->add_option("--pano-width", "Ground panorama width")->default_val(512);
  gen->add_option("--pano-height", "Ground panorama height")->default_val(128);
  gen->add_option("--test-count", "Test samples (-1: use fraction)")
      ->default_val(-1);
  gen->add_option("--test-fraction", "Fraction of samples in the test split")
      ->default_val(1.0 / 3.0);
  gen->add_flag("--depth", "Also write ground depth rasters");
  gen->add_option("--out", "Output directory")->default_val("data");

  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--config", train_flags.config_path,
                    "JSON with optional 'model' and 'train' sections");
  train->add_option("--manifest", train_flags.manifest, "Dataset manifest")
      ->required();
  train->add_option("--out", train_flags.out_dir, "Output directory")
      ->default_val("run");
  train->add_option("--variant", train_flags.variant,
                    "duo|triple_sat|triple_grd|quad|quintuple");
  train->add_option("--fusion", train_flags.fusion, "sum|concat");
  AddTrainOverrides(train, train_flags);

  RunSpec spec;
  std::string eval_fovs = "360";
  std::string eval_key = "distance";
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "Evaluate recall@K");
  std::string eval_ckpt, eval_manifest;
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
  eval->add_option("--manifest", eval_manifest, "Dataset manifest")
      ->required();
  eval->add_option("--train-fov", spec.train_fov, "FoV used in training");
  eval->add_option("--test-fov", eval_fovs, "Comma-separated test FoVs");
  eval->add_option("--ranking-key", eval_key, "distance|score");
  eval->add_option("--seed", spec.seed, "Crop-start seed");
  eval->add_option("--out", eval_out, "JSON report path");

  MatchFlags match_flags;
  auto* match = app.add_subcommand("match", "Rank candidates for one query");
  match->add_option("--checkpoint", match_flags.checkpoint)->required();
  match->add_option("--ground-rgb", match_flags.ground_rgb)->required();
  match->add_option("--ground-seg", match_flags.ground_seg);
  match->add_option("--ground-depth", match_flags.ground_depth);
  match->add_option("--candidates", match_flags.candidates,
                    "Directory of <id>.sat_rgb.png / <id>.sat_seg.png")
      ->required();
  match->add_option("--top-k", match_flags.top_k);
  match->add_option("--fov", match_flags.fov, "Query field of view");

  AblateFlags ablate_flags;
  auto* ablate = app.add_subcommand("ablate", "Train and evaluate a grid");
  ablate->add_option("--manifest", ablate_flags.train.manifest)->required();
  ablate->add_option("--out", ablate_flags.train.out_dir)
      ->default_val("ablation");
  ablate->add_option("--config", ablate_flags.train.config_path);
  ablate->add_option("--variants", ablate_flags.variants);
  ablate->add_option("--fusions", ablate_flags.fusions);
  ablate->add_option("--test-fov", ablate_flags.test_fovs);
  ablate->add_option("--ranking-key", ablate_flags.ranking_key);
  AddTrainOverrides(ablate, ablate_flags.train);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (*gen) return RunGenData(*gen, out);
    if (*train) return RunTrain(train_flags, out, err);
    if (*eval) {
      spec.checkpoint = eval_ckpt;
      spec.manifest = eval_manifest;
      spec.test_fovs = ParseFovList(eval_fovs);
      spec.ranking_key = ParseRankingKey(eval_key);
      return RunEval(spec, eval_out, out);
    }
    if (*match) return RunMatch(match_flags, out);
    if (*ablate) return RunAblate(ablate_flags, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace crossview
