// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_CHECKPOINT_H_
#define CROSSVIEW_CHECKPOINT_H_

#include <filesystem>

#include "crossview/model_config.h"
#include "crossview/network.h"

namespace crossview {

struct Checkpoint {
  ModelConfig config;
  Parameters params;
};

// Layout: "FCKP", u64 LE index length, JSON index, then float64 LE blocks.
// The index holds the model config and, per block, its name
// ("<stream>/conv<i>/weight"), shape and byte offset into the payload.
void WriteCheckpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
Checkpoint ReadCheckpoint(const std::filesystem::path& path);

}  // namespace crossview

#endif  // CROSSVIEW_CHECKPOINT_H_
