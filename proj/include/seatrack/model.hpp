#pragma once

// Declarative model specs and their assembly into runnable layer stacks,
// plus the four architectures compared in the study.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "seatrack/layers.hpp"
#include "seatrack/util.hpp"

namespace seatrack {

struct LayerDesc {
  std::string kind;  // conv1d | lstm | dropout | dense | flatten
  // conv1d
  std::size_t filters = 0, kernel = 0, stride = 0;
  // lstm
  std::size_t hidden = 0;
  bool return_sequences = false;
  bool peephole = false;
  // dropout
  double rate = 0.0;
  // dense
  std::size_t units = 0;
  // conv1d / dense
  std::string activation;
};

struct ModelSpec {
  std::string name;
  Shape input_shape;        // per sample, e.g. {4,1}
  std::size_t class_count = 0;
  std::vector<LayerDesc> layers;
};

// Architecture knobs that flow in from the run configuration.
struct ArchParams {
  std::size_t conv_filters = 32;
  std::size_t conv_kernel = 5;
  std::size_t conv_stride = 3;
  std::string conv_activation = "relu";
  std::size_t lstm_hidden = 32;
  double dropout_rate = 0.5;
  bool peephole_output_gate = false;
};

inline LayerDesc conv1d_desc(std::size_t filters, std::size_t kernel, std::size_t stride,
                             std::string activation) {
  LayerDesc d;
  d.kind = "conv1d";
  d.filters = filters;
  d.kernel = kernel;
  d.stride = stride;
  d.activation = std::move(activation);
  return d;
}

inline LayerDesc lstm_desc(std::size_t hidden, bool return_sequences, bool peephole = false) {
  LayerDesc d;
  d.kind = "lstm";
  d.hidden = hidden;
  d.return_sequences = return_sequences;
  d.peephole = peephole;
  return d;
}

inline LayerDesc dropout_desc(double rate) {
  LayerDesc d;
  d.kind = "dropout";
  d.rate = rate;
  return d;
}

inline LayerDesc dense_desc(std::size_t units, std::string activation) {
  LayerDesc d;
  d.kind = "dense";
  d.units = units;
  d.activation = std::move(activation);
  return d;
}

inline LayerDesc flatten_desc() {
  LayerDesc d;
  d.kind = "flatten";
  return d;
}

inline ModelSpec cnn_lstm_spec(std::size_t class_count = 23, const ArchParams& p = {}) {
  ModelSpec s;
  s.name = "cnn-lstm";
  s.input_shape = {4, 1};
  s.class_count = class_count;
  s.layers.push_back(conv1d_desc(p.conv_filters, p.conv_kernel, p.conv_stride,
                                 p.conv_activation));
  s.layers.push_back(lstm_desc(p.lstm_hidden, true, p.peephole_output_gate));
  s.layers.push_back(dropout_desc(p.dropout_rate));
  s.layers.push_back(lstm_desc(p.lstm_hidden, false, p.peephole_output_gate));
  s.layers.push_back(dropout_desc(p.dropout_rate));
  s.layers.push_back(dense_desc(class_count, "softmax"));
  return s;
}

// Baselines share the relevant pieces of the main stack so comparisons vary
// exactly one axis: recurrence only, convolution only, neither.
inline ModelSpec lstm_baseline_spec(std::size_t class_count = 23, const ArchParams& p = {}) {
  ModelSpec s;
  s.name = "lstm";
  s.input_shape = {4, 1};
  s.class_count = class_count;
  s.layers.push_back(lstm_desc(p.lstm_hidden, true, p.peephole_output_gate));
  s.layers.push_back(dropout_desc(p.dropout_rate));
  s.layers.push_back(lstm_desc(p.lstm_hidden, false, p.peephole_output_gate));
  s.layers.push_back(dropout_desc(p.dropout_rate));
  s.layers.push_back(dense_desc(class_count, "softmax"));
  return s;
}

inline ModelSpec cnn_baseline_spec(std::size_t class_count = 23, const ArchParams& p = {}) {
  ModelSpec s;
  s.name = "cnn";
  s.input_shape = {4, 1};
  s.class_count = class_count;
  s.layers.push_back(conv1d_desc(p.conv_filters, p.conv_kernel, p.conv_stride,
                                 p.conv_activation));
  s.layers.push_back(flatten_desc());
  s.layers.push_back(dense_desc(32, "relu"));
  s.layers.push_back(dropout_desc(p.dropout_rate));
  s.layers.push_back(dense_desc(class_count, "softmax"));
  return s;
}

inline ModelSpec ann_baseline_spec(std::size_t class_count = 23, const ArchParams& p = {}) {
  ModelSpec s;
  s.name = "ann";
  s.input_shape = {4, 1};
  s.class_count = class_count;
  s.layers.push_back(flatten_desc());
  s.layers.push_back(dense_desc(64, "relu"));
  s.layers.push_back(dense_desc(32, "relu"));
  s.layers.push_back(dropout_desc(p.dropout_rate));
  s.layers.push_back(dense_desc(class_count, "softmax"));
  return s;
}

inline ModelSpec model_spec_by_name(const std::string& name, std::size_t class_count,
                                    const ArchParams& p = {}) {
  if (name == "cnn-lstm") return cnn_lstm_spec(class_count, p);
  if (name == "lstm") return lstm_baseline_spec(class_count, p);
  if (name == "cnn") return cnn_baseline_spec(class_count, p);
  if (name == "ann") return ann_baseline_spec(class_count, p);
  throw ArgumentError("unknown model '" + name + "' (expected cnn-lstm, lstm, cnn or ann)");
}

inline const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"cnn-lstm", "lstm", "cnn", "ann"};
  return names;
}

template <class T>
class ModelT {
public:
  ModelT(ModelSpec spec, std::uint64_t init_seed) : spec_(std::move(spec)) {
    if (spec_.class_count == 0) throw ArgumentError("model: class_count must be positive");
    if (spec_.layers.empty()) throw ArgumentError("model: no layers");
    Rng rng(derive_seed(init_seed, 0x494e4954));  // dedicated init stream
    Shape shape = spec_.input_shape;
    shape.insert(shape.begin(), 1);  // placeholder batch axis for shape algebra
    std::size_t conv_n = 0, lstm_n = 0, dense_n = 0, drop_n = 0, flat_n = 0;
    for (const LayerDesc& d : spec_.layers) {
      std::unique_ptr<LayerT<T>> layer;
      std::string label;
      if (d.kind == "conv1d") {
        if (shape.size() != 3) {
          throw DimensionError("model: conv1d needs [B,L,C] input, got " + shape_str(shape));
        }
        layer = std::make_unique<Conv1dT<T>>(shape[2], d.filters, d.kernel, d.stride,
                                             activation_from_string(d.activation), rng);
        label = "conv1d" + std::to_string(++conv_n);
      } else if (d.kind == "lstm") {
        if (shape.size() != 3) {
          throw DimensionError("model: lstm needs [B,T,C] input, got " + shape_str(shape));
        }
        layer = std::make_unique<LstmT<T>>(shape[2], d.hidden, d.return_sequences, d.peephole,
                                           rng);
        label = "lstm" + std::to_string(++lstm_n);
      } else if (d.kind == "dropout") {
        layer = std::make_unique<DropoutT<T>>(d.rate);
        label = "dropout" + std::to_string(++drop_n);
      } else if (d.kind == "dense") {
        if (shape.size() != 2) {
          throw DimensionError("model: dense needs [B,N] input, got " + shape_str(shape) +
                               " (add a flatten or a non-sequence lstm first)");
        }
        layer = std::make_unique<DenseT<T>>(shape[1], d.units,
                                            activation_from_string(d.activation), rng);
        label = "dense" + std::to_string(++dense_n);
      } else if (d.kind == "flatten") {
        layer = std::make_unique<FlattenT<T>>();
        label = "flatten" + std::to_string(++flat_n);
      } else {
        throw ArgumentError("model: unknown layer kind '" + d.kind + "'");
      }
      shape = layer->output_shape(shape);
      for (ParamT<T>* p : layer->params()) p->name = label + "/" + p->name;
      labels_.push_back(label);
      layers_.push_back(std::move(layer));
    }
    // The head must emit one probability per class.
    auto* head = dynamic_cast<DenseT<T>*>(layers_.back().get());
    if (head == nullptr || head->activation() != Activation::softmax ||
        head->units() != spec_.class_count) {
      throw ArgumentError("model: final layer must be a softmax dense with " +
                          std::to_string(spec_.class_count) + " units");
    }
  }

  TensorT<T> forward(const TensorT<T>& x, bool training = false, Rng* rng = nullptr) {
    TensorT<T> cur = x;
    for (auto& l : layers_) cur = l->forward(cur, training, rng);
    return cur;
  }

  TensorT<T> backward(const TensorT<T>& grad_out) {
    TensorT<T> g = grad_out;
    for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
    return g;
  }

  // Fused softmax + cross-entropy gradient: feeds (probs - onehot)/B straight
  // into the head's pre-activation, skipping the explicit softmax Jacobian.
  TensorT<T> backward_fused_softmax_xent(const TensorT<T>& probs, const TensorT<T>& onehot) {
    detail::require_same_shape(probs, onehot, "fused backward");
    const std::size_t B = probs.dim(0);
    if (B == 0) throw ArgumentError("fused backward: empty batch");
    TensorT<T> dpre = sub(probs, onehot);
    const T inv = T(1) / static_cast<T>(B);
    for (T& v : dpre.flat()) v *= inv;
    auto* head = dynamic_cast<DenseT<T>*>(layers_.back().get());
    TensorT<T> g = head->backward_from_pre(dpre);
    for (std::size_t i = layers_.size() - 1; i-- > 0;) g = layers_[i]->backward(g);
    return g;
  }

  std::vector<ParamT<T>*> params() {
    std::vector<ParamT<T>*> out;
    for (auto& l : layers_) {
      for (ParamT<T>* p : l->params()) out.push_back(p);
    }
    return out;
  }

  void zero_grads() {
    for (ParamT<T>* p : params()) {
      for (T& g : p->grad.flat()) g = T(0);
    }
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l->param_count();
    return n;
  }

  const ModelSpec& spec() const { return spec_; }
  std::size_t layer_count() const { return layers_.size(); }
  LayerT<T>& layer(std::size_t i) { return *layers_.at(i); }
  const std::string& layer_label(std::size_t i) const { return labels_.at(i); }

  Shape output_shape(std::size_t batch) const {
    Shape shape = spec_.input_shape;
    shape.insert(shape.begin(), batch);
    for (const auto& l : layers_) shape = l->output_shape(shape);
    return shape;
  }

private:
  ModelSpec spec_;
  std::vector<std::unique_ptr<LayerT<T>>> layers_;
  std::vector<std::string> labels_;
};

using Model = ModelT<float>;
using Model64 = ModelT<double>;

struct Prediction {
  Tensor probs;                   // [B, classes]
  std::vector<int> labels;        // argmax per row, ties to the lowest index
  std::vector<float> confidence;  // probability of the argmax class
};

// Inference on scaled features shaped [B, ...input_shape].
inline Prediction predict(Model& model, const Tensor& features) {
  Shape expect = model.spec().input_shape;
  expect.insert(expect.begin(), features.rank() > 0 ? features.dim(0) : 0);
  if (features.shape() != expect) {
    throw DimensionError("predict: expected input " + shape_str(expect) + ", got " +
                         shape_str(features.shape()));
  }
  Prediction out;
  const std::size_t B = features.dim(0);
  if (B == 0) {
    out.probs = Tensor({0, model.spec().class_count});
    return out;
  }
  out.probs = model.forward(features, false, nullptr);
  out.labels.resize(B);
  out.confidence.resize(B);
  for (std::size_t b = 0; b < B; ++b) {
    const std::size_t k = argmax_row(out.probs, b);
    out.labels[b] = static_cast<int>(k);
    out.confidence[b] = out.probs.at(b, k);
  }
  return out;
}

}  // namespace seatrack
