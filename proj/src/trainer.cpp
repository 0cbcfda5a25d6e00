#include "seatrack/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "seatrack/adam.hpp"
#include "seatrack/loss.hpp"
#include "seatrack/util.hpp"

namespace seatrack {

namespace {

// Gather dataset rows into a [b, ...input_shape] batch tensor.
Tensor gather_batch(const Dataset& data, const std::vector<std::size_t>& order,
                    std::size_t lo, std::size_t hi, const Shape& input_shape) {
  const std::size_t b = hi - lo;
  Shape shape = input_shape;
  shape.insert(shape.begin(), b);
  std::size_t per_row = 1;
  for (std::size_t d : input_shape) per_row *= d;
  if (per_row != data.features.dim(1)) {
    throw DimensionError("fit: model wants " + std::to_string(per_row) +
                         " features per row, dataset has " +
                         std::to_string(data.features.dim(1)));
  }
  Tensor out(shape);
  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t src = order[lo + i];
    for (std::size_t j = 0; j < per_row; ++j) {
      out.data()[i * per_row + j] = data.features.at(src, j);
    }
  }
  return out;
}

std::vector<int> gather_labels(const Dataset& data, const std::vector<std::size_t>& order,
                               std::size_t lo, std::size_t hi) {
  std::vector<int> out;
  out.reserve(hi - lo);
  for (std::size_t i = lo; i < hi; ++i) out.push_back(data.labels[order[i]]);
  return out;
}

std::size_t count_correct(const Tensor& probs, const std::vector<int>& labels) {
  std::size_t ok = 0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    if (static_cast<int>(argmax_row(probs, b)) == labels[b]) ++ok;
  }
  return ok;
}

void check_dataset(const Dataset& d, const char* tag, std::size_t classes) {
  if (d.size() == 0) throw ArgumentError(std::string("fit: ") + tag + " set is empty");
  if (d.features.rank() != 2 || d.features.dim(0) != d.size()) {
    throw ArgumentError(std::string("fit: ") + tag + " features are inconsistent");
  }
  for (int l : d.labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes) {
      throw ArgumentError(std::string("fit: ") + tag + " label " + std::to_string(l) +
                          " outside the model's " + std::to_string(classes) + " classes");
    }
  }
}

}  // namespace

void TrainLog::write_csv(std::ostream& out) const {
  out << "epoch,train_loss,train_acc,val_loss,val_acc\n";
  char buf[160];
  for (const EpochStats& e : epochs) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%.6f\n", e.epoch, e.train_loss,
                  e.train_acc, e.val_loss, e.val_acc);
    out << buf;
  }
}

std::string TrainLog::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

std::pair<double, double> evaluate_loss(Model& model, const Dataset& data,
                                        std::size_t batch_size) {
  const std::size_t n = data.size();
  if (n == 0) throw ArgumentError("evaluate: empty dataset");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t classes = model.spec().class_count;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t lo = 0; lo < n; lo += batch_size) {
    const std::size_t hi = std::min(n, lo + batch_size);
    Tensor x = gather_batch(data, order, lo, hi, model.spec().input_shape);
    const std::vector<int> labels = gather_labels(data, order, lo, hi);
    Tensor probs = model.forward(x, false, nullptr);
    auto ce = cross_entropy(probs, one_hot<float>(labels, classes));
    loss_sum += ce.loss * static_cast<double>(hi - lo);
    correct += count_correct(probs, labels);
  }
  return {loss_sum / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n)};
}

TrainLog fit(Model& model, const Dataset& train, const Dataset& val, const TrainConfig& cfg) {
  if (cfg.batch_size == 0) throw ArgumentError("fit: batch_size must be positive");
  if (cfg.epochs == 0) throw ArgumentError("fit: epochs must be positive");
  if (cfg.loss != "categorical_cross_entropy") {
    throw ArgumentError("fit: unsupported loss '" + cfg.loss + "'");
  }
  const std::size_t classes = model.spec().class_count;
  check_dataset(train, "train", classes);
  if (val.size() > 0) check_dataset(val, "validation", classes);  // empty val: stats stay 0

  AdamState adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps);
  Rng shuffle_rng(derive_seed(cfg.seed, 0x53485546));  // shuffle stream
  Rng dropout_rng(derive_seed(cfg.seed, 0x44524f50));  // dropout stream
  std::vector<ParamT<float>*> params = model.params();

  const std::size_t n = train.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainLog log;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle_rng.uniform_index(i + 1)]);
    }
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_index = 0;
    const std::size_t clamps_before = log.clamp_events;
    for (std::size_t lo = 0; lo < n; lo += cfg.batch_size, ++batch_index) {
      const std::size_t hi = std::min(n, lo + cfg.batch_size);
      Tensor x = gather_batch(train, order, lo, hi, model.spec().input_shape);
      const std::vector<int> labels = gather_labels(train, order, lo, hi);
      Tensor onehot = one_hot<float>(labels, classes);
      Tensor probs;
      try {
        probs = model.forward(x, true, &dropout_rng);
        auto ce = cross_entropy(probs, onehot);
        log.clamp_events += ce.clamped;
        if (!std::isfinite(ce.loss)) {
          throw NumericError("fit: non-finite training loss");
        }
        loss_sum += ce.loss * static_cast<double>(hi - lo);
        correct += count_correct(probs, labels);
        model.zero_grads();
        model.backward_fused_softmax_xent(probs, onehot);
        adam_step(adam, params);
      } catch (const NumericError& e) {
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                                  ", batch " + std::to_string(batch_index) + ": " + e.what(),
                              epoch, batch_index);
      }
    }
    if (log.clamp_events > clamps_before) {
      log_warn("epoch " + std::to_string(epoch) + ": cross-entropy clamped " +
               std::to_string(log.clamp_events - clamps_before) +
               " log() inputs at 1e-12 (saturated predictions)");
    }
    EpochStats st;
    st.epoch = epoch;
    st.train_loss = loss_sum / static_cast<double>(n);
    st.train_acc = static_cast<double>(correct) / static_cast<double>(n);
    if (val.size() > 0) {
      std::tie(st.val_loss, st.val_acc) = evaluate_loss(model, val, cfg.batch_size);
    }
    log.epochs.push_back(st);
    log_info("epoch " + std::to_string(epoch) + "/" + std::to_string(cfg.epochs) +
             " train_loss=" + std::to_string(st.train_loss) +
             " train_acc=" + std::to_string(st.train_acc) +
             " val_loss=" + std::to_string(st.val_loss) +
             " val_acc=" + std::to_string(st.val_acc));
  }
  return log;
}

}  // namespace seatrack
