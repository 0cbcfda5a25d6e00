#pragma once

// Mini-batch training: seeded per-epoch shuffling, Adam updates through the
// fused softmax cross-entropy gradient, per-epoch train/validation stats and
// a hard abort (DivergenceError) the moment anything goes non-finite.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "seatrack/model.hpp"
#include "seatrack/pipeline.hpp"

namespace seatrack {

struct TrainConfig {
  std::size_t batch_size = 100;
  std::size_t epochs = 100;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 1;
  std::string loss = "categorical_cross_entropy";
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
  std::size_t clamp_events = 0;  // cross-entropy log() floor hits
  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
};

// Trains in place. Train and validation features are [N,4] (scaled); rows are
// reshaped to the model's input per batch.
TrainLog fit(Model& model, const Dataset& train, const Dataset& val, const TrainConfig& cfg);

// Batched inference pass: mean loss and accuracy without touching weights.
std::pair<double, double> evaluate_loss(Model& model, const Dataset& data,
                                        std::size_t batch_size);

}  // namespace seatrack
