#pragma once

// Categorical cross-entropy over batch rows, plus one-hot encoding. The loss
// clamps log() inputs at 1e-12 and counts how often it had to, so saturated
// predictions degrade loudly instead of turning into NaN.

#include <cmath>
#include <vector>

#include "seatrack/error.hpp"
#include "seatrack/tensor.hpp"

namespace seatrack {

inline constexpr double kLogClamp = 1e-12;

template <class T>
TensorT<T> one_hot(const std::vector<int>& labels, std::size_t classes) {
  TensorT<T> out({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
      throw ArgumentError("one_hot: label " + std::to_string(labels[i]) +
                          " outside [0," + std::to_string(classes) + ")");
    }
    out.at(i, static_cast<std::size_t>(labels[i])) = T(1);
  }
  return out;
}

template <class T>
struct CrossEntropyResult {
  double loss = 0.0;          // mean over the batch
  TensorT<T> grad;            // d loss / d pred, same shape as pred
  std::size_t clamped = 0;    // how many log() inputs hit the floor
};

template <class T>
CrossEntropyResult<T> cross_entropy(const TensorT<T>& pred, const TensorT<T>& truth) {
  detail::require_rank(pred, 2, "cross_entropy");
  detail::require_same_shape(pred, truth, "cross_entropy");
  const std::size_t B = pred.dim(0), C = pred.dim(1);
  if (B == 0) throw ArgumentError("cross_entropy: empty batch");
  if (!all_finite(pred)) throw NumericError("cross_entropy: non-finite prediction");
  CrossEntropyResult<T> res;
  res.grad = TensorT<T>(pred.shape());
  const T* pp = pred.data();
  const T* pt = truth.data();
  T* pg = res.grad.data();
  double total = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    double row_sum = 0.0;
    int ones = 0;
    for (std::size_t j = 0; j < C; ++j) {
      const double t = pt[b * C + j];
      if (t == 1.0) {
        ++ones;
      } else if (t != 0.0) {
        throw ArgumentError("cross_entropy: truth rows must be one-hot");
      }
      row_sum += pp[b * C + j];
    }
    if (ones != 1) throw ArgumentError("cross_entropy: truth rows must have exactly one 1");
    if (std::abs(row_sum - 1.0) > 1e-5) {
      throw ArgumentError("cross_entropy: prediction row " + std::to_string(b) +
                          " sums to " + std::to_string(row_sum) + ", not 1");
    }
    for (std::size_t j = 0; j < C; ++j) {
      if (pt[b * C + j] != 1.0) continue;
      double p = pp[b * C + j];
      if (p < kLogClamp) {
        p = kLogClamp;
        ++res.clamped;
      }
      total -= std::log(p);
      pg[b * C + j] = static_cast<T>(-1.0 / (p * static_cast<double>(B)));
    }
  }
  res.loss = total / static_cast<double>(B);
  return res;
}

// Gradient of mean cross-entropy w.r.t. the softmax *pre-activation*:
// (probs - onehot) / B. Must agree with chaining cross_entropy through the
// softmax Jacobian; a test pins that identity.
template <class T>
TensorT<T> softmax_xent_grad(const TensorT<T>& probs, const TensorT<T>& onehot) {
  detail::require_same_shape(probs, onehot, "softmax_xent_grad");
  const std::size_t B = probs.dim(0);
  if (B == 0) throw ArgumentError("softmax_xent_grad: empty batch");
  TensorT<T> g = sub(probs, onehot);
  const T inv = T(1) / static_cast<T>(B);
  for (T& v : g.flat()) v *= inv;
  return g;
}

}  // namespace seatrack
