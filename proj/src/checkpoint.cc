// SPDX-License-Identifier: Apache-2.0

#include "crossview/checkpoint.h"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>

#include "crossview/error.h"
#include "json.hpp"

namespace crossview {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'F', 'C', 'K', 'P'};

void PutU64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint64_t GetU64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void WriteCheckpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path) {
  const ModelConfig& config = checkpoint.config;
  const Parameters& params = checkpoint.params;
  if (params.streams.size() != config.streams.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "parameters do not match the stream list");
  }
  json blocks = json::array();
  std::vector<uint8_t> payload;
  auto add_block = [&](const std::string& name, std::vector<int> shape,
                       const std::vector<double>& values) {
    blocks.push_back({{"name", name},
                      {"shape", shape},
                      {"dtype", "f64"},
                      {"offset", payload.size()}});
    for (double v : values) PutU64(payload, std::bit_cast<uint64_t>(v));
  };
  for (size_t s = 0; s < params.streams.size(); ++s) {
    const std::string stream = config.streams[s].name();
    for (size_t c = 0; c < params.streams[s].convs.size(); ++c) {
      const ConvParams& p = params.streams[s].convs[c];
      const std::string prefix = stream + "/conv" + std::to_string(c);
      add_block(prefix + "/weight",
                {p.kernel_h, p.kernel_w, p.in_channels, p.out_channels},
                p.weights);
      add_block(prefix + "/bias", {p.out_channels}, p.bias);
    }
  }
  const json index = {{"config", json::parse(ModelConfigToJson(config))},
                      {"blocks", blocks}};
  const std::string text = index.dump();

  std::vector<uint8_t> bytes(std::begin(kMagic), std::end(kMagic));
  PutU64(bytes, text.size());
  bytes.insert(bytes.end(), text.begin(), text.end());
  bytes.insert(bytes.end(), payload.begin(), payload.end());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

Checkpoint ReadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  const std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 4 ||
      !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw Error(ErrorCode::kBadMagic, path.string() + " is not a checkpoint");
  }
  if (bytes.size() < 12) {
    throw Error(ErrorCode::kTruncatedFile, "checkpoint header incomplete");
  }
  const uint64_t index_len = GetU64(&bytes[4]);
  if (index_len > bytes.size() - 12) {
    throw Error(ErrorCode::kTruncatedFile, "checkpoint index incomplete");
  }
  const size_t payload_start = 12 + index_len;
  Checkpoint checkpoint;
  try {
    const json index = json::parse(bytes.begin() + 12,
                                   bytes.begin() + payload_start);
    checkpoint.config = ModelConfigFromJson(index.at("config").dump());
    std::map<std::string, json> blocks;
    for (const auto& b : index.at("blocks")) {
      blocks[b.at("name").get<std::string>()] = b;
    }
    auto read_block = [&](const std::string& name, size_t count) {
      const auto it = blocks.find(name);
      if (it == blocks.end()) {
        throw Error(ErrorCode::kShapeMismatch, "checkpoint lacks " + name);
      }
      size_t expected = 1;
      for (const auto& d : it->second.at("shape")) expected *= d.get<size_t>();
      if (expected != count || it->second.at("dtype") != "f64") {
        throw Error(ErrorCode::kShapeMismatch, "block " + name + " has the "
                                               "wrong shape or type");
      }
      const uint64_t offset = it->second.at("offset").get<uint64_t>();
      if (offset > bytes.size() - payload_start ||
          count * 8 > bytes.size() - payload_start - offset) {
        throw Error(ErrorCode::kTruncatedFile, "block " + name + " truncated");
      }
      std::vector<double> values(count);
      for (size_t i = 0; i < count; ++i) {
        values[i] = std::bit_cast<double>(
            GetU64(&bytes[payload_start + offset + 8 * i]));
      }
      return values;
    };
    // Shapes follow from the config; the file must agree with them.
    const Parameters layout = BuildExtractor(checkpoint.config, 0);
    checkpoint.params = layout;
    for (size_t s = 0; s < layout.streams.size(); ++s) {
      const std::string stream = checkpoint.config.streams[s].name();
      for (size_t c = 0; c < layout.streams[s].convs.size(); ++c) {
        ConvParams& p = checkpoint.params.streams[s].convs[c];
        const std::string prefix = stream + "/conv" + std::to_string(c);
        p.weights = read_block(prefix + "/weight", p.weights.size());
        p.bias = read_block(prefix + "/bias", p.bias.size());
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed checkpoint index: ") + e.what());
  }
  return checkpoint;
}

}  // namespace crossview
