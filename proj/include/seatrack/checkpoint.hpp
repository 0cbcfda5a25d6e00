#pragma once

// Checkpoint container: everything needed to score raw observations later
// (model spec, weights, scaler, label map) in one self-describing file.
//
// Layout: 8-byte magic "SEATRK01" (the trailing digits are the format
// version), a little-endian uint32 manifest length, a UTF-8 JSON manifest
// (spec, scaler, labels, tensor names/shapes/byte offsets), then the raw
// tensor data as little-endian float32 in manifest order.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "seatrack/model.hpp"
#include "seatrack/pipeline.hpp"

namespace seatrack {

inline constexpr char kCheckpointMagic[8] = {'S', 'E', 'A', 'T', 'R', 'K', '0', '1'};
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int version = kCheckpointVersion;
  ModelSpec spec;
  ScalerParams scaler;
  LabelMap labels;
  std::vector<std::pair<std::string, Tensor>> tensors;  // parameter order
};

Checkpoint make_checkpoint(Model& model, const ScalerParams& scaler, const LabelMap& labels);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

// Throws CheckpointError with a distinct kind for: wrong magic, newer format
// version, truncated/oversized data, unparseable manifest.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Rebuilds a runnable model and copies the stored weights in; shape drift
// between manifest and spec is a CheckpointError(shape_mismatch).
Model restore_model(const Checkpoint& ckpt);

}  // namespace seatrack
