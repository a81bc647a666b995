//
// solvflow - Copyright 2026 The solvflow authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLVFLOW_CHECKPOINT_H_
#define SOLVFLOW_CHECKPOINT_H_

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "solvflow/models/train.h"

namespace solvflow {

// Container layout, all integers little-endian:
//   "SVCK"            magic
//   u32               format version (1)
//   u64               header length in bytes
//   header            UTF-8 JSON: kind, seed, settings, config_digest,
//                     input_width, scaler, gbdt, metadata and a
//                     "parameters" list of {name, rows, cols, dtype, offset}
//   data              float32 arrays, row-major, at the listed byte offsets
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError: public Error {
public:
  using Error::Error;
};

// `metadata` is stored verbatim (seed, dataset digest, tool version...).
void save_checkpoint(const models::ModelBundle &bundle, int input_width,
                     const nlohmann::json &metadata,
                     const std::filesystem::path &path);

struct LoadedCheckpoint {
  models::ModelBundle bundle;
  int input_width = 0;
  nlohmann::json metadata;
};

// Rebuilds the model from its stored settings and seed, then copies every
// array by name. Throws CheckpointError on a malformed file and
// ConfigMismatch when `expected_digest` is given and differs.
LoadedCheckpoint load_checkpoint(
    const std::filesystem::path &path,
    const std::optional<std::string> &expected_digest = std::nullopt);

}  // namespace solvflow

#endif  // SOLVFLOW_CHECKPOINT_H_
