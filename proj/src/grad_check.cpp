#include "seatrack/grad_check.hpp"

#include <cmath>

#include "seatrack/loss.hpp"
#include "seatrack/util.hpp"

namespace seatrack {

namespace {

double loss_of(Model64& model, const Tensor64& x, const Tensor64& onehot) {
  Tensor64 probs = model.forward(x, false, nullptr);
  return cross_entropy(probs, onehot).loss;
}

}  // namespace

GradSet analytic_grads(Model64& model, const Tensor64& x, const Tensor64& onehot) {
  model.zero_grads();
  Tensor64 probs = model.forward(x, false, nullptr);
  auto ce = cross_entropy(probs, onehot);
  model.backward(ce.grad);
  GradSet out;
  for (ParamT<double>* p : model.params()) out.emplace_back(p->name, p->grad);
  return out;
}

GradSet fd_grads(Model64& model, const Tensor64& x, const Tensor64& onehot) {
  GradSet out;
  for (ParamT<double>* p : model.params()) {
    Tensor64 g(p->value.shape());
    double* pv = p->value.data();
    double* pg = g.data();
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double orig = pv[i];
      const double h = 1e-5 * std::max(1.0, std::abs(orig));
      pv[i] = orig + h;
      const double up = loss_of(model, x, onehot);
      pv[i] = orig - h;
      const double down = loss_of(model, x, onehot);
      pv[i] = orig;
      pg[i] = (up - down) / (2.0 * h);
    }
    out.emplace_back(p->name, std::move(g));
  }
  return out;
}

GradCheckReport compare_grads(const GradSet& analytic, const GradSet& fd) {
  if (analytic.size() != fd.size()) {
    throw ArgumentError("grad_check: gradient sets cover different parameter lists");
  }
  GradCheckReport rep;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const auto& [name, ag] = analytic[k];
    const auto& [fname, fg] = fd[k];
    if (name != fname || !ag.same_shape(fg)) {
      throw ArgumentError("grad_check: mismatched entry '" + name + "' vs '" + fname + "'");
    }
    GradCheckEntry e{name, 0.0};
    for (std::size_t i = 0; i < ag.size(); ++i) {
      const double a = ag.data()[i];
      const double f = fg.data()[i];
      // Floor the denominator so a pair of true near-zeros cannot explode the
      // ratio (FD noise is ~1e-10 at this step size).
      const double rel = std::abs(a - f) / std::max(std::abs(a) + std::abs(f), 1e-6);
      e.max_rel_err = std::max(e.max_rel_err, rel);
    }
    rep.max_rel_err = std::max(rep.max_rel_err, e.max_rel_err);
    rep.params.push_back(std::move(e));
  }
  return rep;
}

GradCheckReport grad_check(const ModelSpec& spec, std::size_t batch, std::uint64_t seed) {
  if (batch == 0) throw ArgumentError("grad_check: batch must be positive");
  Model64 model(spec, seed);
  Rng rng(derive_seed(seed, 0x46444348));  // input stream
  Shape xshape = spec.input_shape;
  xshape.insert(xshape.begin(), batch);
  Tensor64 x = rng_uniform<double>(rng, xshape, -1.0, 1.0);
  std::vector<int> labels(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    labels[i] = static_cast<int>(rng.uniform_index(spec.class_count));
  }
  Tensor64 onehot = one_hot<double>(labels, spec.class_count);
  GradSet a = analytic_grads(model, x, onehot);
  GradSet f = fd_grads(model, x, onehot);
  return compare_grads(a, f);
}

std::vector<std::pair<std::string, GradCheckReport>> standard_grad_checks(std::uint64_t seed) {
  // Reduced widths keep the FD sweep fast while touching every code path.
  ArchParams small;
  small.conv_filters = 4;
  small.conv_kernel = 5;
  small.conv_stride = 3;
  small.lstm_hidden = 4;
  small.dropout_rate = 0.5;  // identity during the check (inference forward)

  std::vector<std::pair<std::string, GradCheckReport>> out;

  ModelSpec conv_only;
  conv_only.name = "conv1d";
  conv_only.input_shape = {4, 1};
  conv_only.class_count = 3;
  conv_only.layers.push_back({.kind = "conv1d", .filters = 4, .kernel = 5, .stride = 3,
                              .activation = "relu"});
  conv_only.layers.push_back({.kind = "flatten"});
  conv_only.layers.push_back({.kind = "dense", .units = 3, .activation = "softmax"});
  out.emplace_back("conv1d", grad_check(conv_only, 3, seed));

  ModelSpec lstm_seq;
  lstm_seq.name = "lstm-sequences";
  lstm_seq.input_shape = {4, 1};
  lstm_seq.class_count = 3;
  lstm_seq.layers.push_back({.kind = "lstm", .hidden = 4, .return_sequences = true});
  lstm_seq.layers.push_back({.kind = "flatten"});
  lstm_seq.layers.push_back({.kind = "dense", .units = 3, .activation = "softmax"});
  out.emplace_back("lstm-sequences", grad_check(lstm_seq, 3, seed));

  ModelSpec lstm_last;
  lstm_last.name = "lstm-last";
  lstm_last.input_shape = {4, 1};
  lstm_last.class_count = 3;
  lstm_last.layers.push_back({.kind = "lstm", .hidden = 4, .return_sequences = false});
  lstm_last.layers.push_back({.kind = "dense", .units = 3, .activation = "softmax"});
  out.emplace_back("lstm-last", grad_check(lstm_last, 3, seed));

  ModelSpec dense_only;
  dense_only.name = "dense";
  dense_only.input_shape = {4, 1};
  dense_only.class_count = 3;
  dense_only.layers.push_back({.kind = "flatten"});
  dense_only.layers.push_back({.kind = "dense", .units = 3, .activation = "softmax"});
  out.emplace_back("dense", grad_check(dense_only, 3, seed));

  out.emplace_back("full-stack", grad_check(cnn_lstm_spec(3, small), 3, seed));
  return out;
}

}  // namespace seatrack
