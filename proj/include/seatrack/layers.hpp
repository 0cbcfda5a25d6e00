#pragma once

// The network layers: causal 1D convolution, LSTM, inverted dropout, dense
// and flatten. Every forward pass caches exactly what its hand-written
// backward pass needs; everything is templated on the scalar type so the
// gradient checker can run the same code in double precision.

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "seatrack/error.hpp"
#include "seatrack/rng.hpp"
#include "seatrack/tensor.hpp"

namespace seatrack {

enum class Activation { linear, relu, tanh, softmax };

inline Activation activation_from_string(const std::string& s) {
  if (s == "linear") return Activation::linear;
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "softmax") return Activation::softmax;
  throw ArgumentError("unknown activation '" + s + "'");
}

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

template <class T>
struct ParamT {
  std::string name;
  TensorT<T> value;
  TensorT<T> grad;
};

// Glorot uniform bound: weights drawn from +-sqrt(6 / (fan_in + fan_out)).
inline double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

template <class T>
class LayerT {
public:
  LayerT() = default;
  LayerT(const LayerT&) = delete;
  LayerT& operator=(const LayerT&) = delete;
  virtual ~LayerT() = default;

  // training=true enables dropout masks; rng is only consumed in that case.
  virtual TensorT<T> forward(const TensorT<T>& x, bool training = false, Rng* rng = nullptr) = 0;

  // Consumes the cache left by the latest forward and accumulates parameter
  // gradients (callers zero them between steps). Returns the input gradient.
  virtual TensorT<T> backward(const TensorT<T>& grad_out) = 0;

  // Shape algebra including the batch axis, e.g. {B,4,1} -> {B,2,32}.
  virtual Shape output_shape(const Shape& input) const = 0;

  virtual std::string kind() const = 0;

  std::vector<ParamT<T>*>& params() { return params_; }
  std::size_t param_count() const {
    std::size_t n = 0;
    for (const ParamT<T>* p : params_) n += p->value.size();
    return n;
  }

protected:
  void register_param(ParamT<T>* p) {
    p->grad = TensorT<T>(p->value.shape());
    params_.push_back(p);
  }
  void require_cache(bool have, const char* who) const {
    if (!have) {
      throw StateError(std::string(who) + ": backward called without a matching forward");
    }
  }

private:
  std::vector<ParamT<T>*> params_;
};

// Causal 1D convolution: the input is padded on the left with kernel-1 zeros
// so position t never sees anything later than t. Output length is
// floor((L-1)/stride) + 1. Weights are [kernel, in_channels, filters].
template <class T>
class Conv1dT final : public LayerT<T> {
public:
  Conv1dT(std::size_t in_channels, std::size_t filters, std::size_t kernel, std::size_t stride,
          Activation act, Rng& rng)
      : c_in_(in_channels), filters_(filters), kernel_(kernel), stride_(stride), act_(act) {
    if (c_in_ == 0 || filters_ == 0 || kernel_ == 0 || stride_ == 0) {
      throw ArgumentError("conv1d: channels, filters, kernel and stride must be positive");
    }
    if (act_ != Activation::relu && act_ != Activation::tanh) {
      throw ArgumentError("conv1d: activation must be relu or tanh");
    }
    const double lim = glorot_limit(kernel_ * c_in_, kernel_ * filters_);
    w_.name = "w";
    w_.value = rng_uniform<T>(rng, {kernel_, c_in_, filters_}, -lim, lim);
    b_.name = "b";
    b_.value = TensorT<T>({filters_});
    this->register_param(&w_);
    this->register_param(&b_);
  }

  static std::size_t out_len(std::size_t in_len, std::size_t stride) {
    return (in_len - 1) / stride + 1;
  }

  TensorT<T> forward(const TensorT<T>& x, bool = false, Rng* = nullptr) override {
    check_input(x.shape());
    const std::size_t B = x.dim(0), L = x.dim(1);
    const std::size_t Lout = out_len(L, stride_);
    const std::size_t pad = kernel_ - 1;
    TensorT<T> out({B, Lout, filters_});
    const T* pw = w_.value.data();
    const T* pb = b_.value.data();
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t to = 0; to < Lout; ++to) {
        T* orow = out.data() + (b * Lout + to) * filters_;
        for (std::size_t f = 0; f < filters_; ++f) orow[f] = pb[f];
        const std::size_t base = to * stride_;
        for (std::size_t k = 0; k < kernel_; ++k) {
          const std::size_t p = base + k;
          if (p < pad) continue;  // still inside the zero padding
          const std::size_t ti = p - pad;
          const T* xrow = x.data() + (b * L + ti) * c_in_;
          for (std::size_t c = 0; c < c_in_; ++c) {
            const T xv = xrow[c];
            const T* wrow = pw + (k * c_in_ + c) * filters_;
            for (std::size_t f = 0; f < filters_; ++f) orow[f] += xv * wrow[f];
          }
        }
        if (act_ == Activation::relu) {
          for (std::size_t f = 0; f < filters_; ++f) orow[f] = orow[f] > T(0) ? orow[f] : T(0);
        } else {
          for (std::size_t f = 0; f < filters_; ++f) orow[f] = std::tanh(orow[f]);
        }
      }
    }
    x_ = x;
    out_ = out;
    has_cache_ = true;
    return out;
  }

  TensorT<T> backward(const TensorT<T>& grad_out) override {
    this->require_cache(has_cache_, "conv1d");
    detail::require_same_shape(grad_out, out_, "conv1d backward");
    const std::size_t B = x_.dim(0), L = x_.dim(1);
    const std::size_t Lout = out_.dim(1);
    const std::size_t pad = kernel_ - 1;
    TensorT<T> grad_x(x_.shape());
    std::vector<T> dpre(filters_);
    T* pwg = w_.grad.data();
    T* pbg = b_.grad.data();
    const T* pw = w_.value.data();
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t to = 0; to < Lout; ++to) {
        const T* grow = grad_out.data() + (b * Lout + to) * filters_;
        const T* orow = out_.data() + (b * Lout + to) * filters_;
        if (act_ == Activation::relu) {
          for (std::size_t f = 0; f < filters_; ++f) dpre[f] = orow[f] > T(0) ? grow[f] : T(0);
        } else {
          for (std::size_t f = 0; f < filters_; ++f) dpre[f] = grow[f] * (T(1) - orow[f] * orow[f]);
        }
        for (std::size_t f = 0; f < filters_; ++f) pbg[f] += dpre[f];
        const std::size_t base = to * stride_;
        for (std::size_t k = 0; k < kernel_; ++k) {
          const std::size_t p = base + k;
          if (p < pad) continue;
          const std::size_t ti = p - pad;
          const T* xrow = x_.data() + (b * L + ti) * c_in_;
          T* gxrow = grad_x.data() + (b * L + ti) * c_in_;
          for (std::size_t c = 0; c < c_in_; ++c) {
            const T xv = xrow[c];
            const T* wrow = pw + (k * c_in_ + c) * filters_;
            T* wgrow = pwg + (k * c_in_ + c) * filters_;
            T acc = 0;
            for (std::size_t f = 0; f < filters_; ++f) {
              wgrow[f] += xv * dpre[f];
              acc += wrow[f] * dpre[f];
            }
            gxrow[c] += acc;
          }
        }
      }
    }
    has_cache_ = false;
    return grad_x;
  }

  Shape output_shape(const Shape& in) const override {
    check_input(in);
    return {in[0], out_len(in[1], stride_), filters_};
  }

  std::string kind() const override { return "conv1d"; }

private:
  void check_input(const Shape& s) const {
    if (s.size() != 3 || s[2] != c_in_ || s[1] == 0) {
      throw DimensionError("conv1d: expected input [B,L," + std::to_string(c_in_) +
                           "] with L >= 1, got " + shape_str(s));
    }
  }

  std::size_t c_in_, filters_, kernel_, stride_;
  Activation act_;
  ParamT<T> w_, b_;
  TensorT<T> x_, out_;
  bool has_cache_ = false;
};

// LSTM over [B,T,C]. Gate pre-activations are [h_prev, x_t] W + b with weight
// rows ordered h-block first, then x-block. With peephole_output_gate the
// output gate additionally sees the fresh cell state (a third block of rows
// in w_o), which is the variant some formulations write as
// o_t = sigma(W_o [h, x, c_t] + b_o); it is off by default.
template <class T>
class LstmT final : public LayerT<T> {
public:
  LstmT(std::size_t in_features, std::size_t hidden, bool return_sequences,
        bool peephole_output_gate, Rng& rng)
      : c_in_(in_features),
        hidden_(hidden),
        return_sequences_(return_sequences),
        peephole_(peephole_output_gate) {
    if (c_in_ == 0 || hidden_ == 0) {
      throw ArgumentError("lstm: in_features and hidden must be positive");
    }
    const std::size_t rows = hidden_ + c_in_;
    const std::size_t rows_o = rows + (peephole_ ? hidden_ : 0);
    auto make_w = [&](ParamT<T>& p, const char* name, std::size_t r) {
      const double lim = glorot_limit(r, hidden_);
      p.name = name;
      p.value = rng_uniform<T>(rng, {r, hidden_}, -lim, lim);
      this->register_param(&p);
    };
    // Draw order is part of the reproducibility contract.
    make_w(w_f_, "w_f", rows);
    make_w(w_i_, "w_i", rows);
    make_w(w_c_, "w_c", rows);
    make_w(w_o_, "w_o", rows_o);
    auto make_b = [&](ParamT<T>& p, const char* name, T fill) {
      p.name = name;
      p.value = TensorT<T>::full({hidden_}, fill);
      this->register_param(&p);
    };
    // Forget gate bias starts at 1 so early training does not flush the cell.
    make_b(b_f_, "b_f", T(1));
    make_b(b_i_, "b_i", T(0));
    make_b(b_c_, "b_c", T(0));
    make_b(b_o_, "b_o", T(0));
  }

  // One recurrence step; exposed so tests can pin the gate equations.
  std::pair<TensorT<T>, TensorT<T>> step(const TensorT<T>& x_t, const TensorT<T>& h_prev,
                                         const TensorT<T>& c_prev) {
    check_step_shapes(x_t, h_prev, c_prev);
    StepCache sc;
    TensorT<T> h = step_impl(x_t, h_prev, c_prev, sc);
    return {std::move(h), std::move(sc.c)};
  }

  TensorT<T> forward(const TensorT<T>& x, bool = false, Rng* = nullptr) override {
    if (x.rank() != 3 || x.dim(2) != c_in_) {
      throw DimensionError("lstm: expected input [B,T," + std::to_string(c_in_) + "], got " +
                           shape_str(x.shape()));
    }
    const std::size_t B = x.dim(0), steps = x.dim(1);
    if (steps == 0) throw ArgumentError("lstm: empty sequence (T = 0)");
    cache_.assign(steps, StepCache{});
    TensorT<T> h({B, hidden_});
    TensorT<T> c({B, hidden_});
    TensorT<T> seq_out;
    if (return_sequences_) seq_out = TensorT<T>({B, steps, hidden_});
    for (std::size_t t = 0; t < steps; ++t) {
      TensorT<T> x_t = time_slice(x, t);
      h = step_impl(x_t, h, c, cache_[t]);
      c = cache_[t].c;
      if (return_sequences_) set_time_slice(seq_out, t, h);
    }
    batch_ = B;
    has_cache_ = true;
    return return_sequences_ ? seq_out : h;
  }

  TensorT<T> backward(const TensorT<T>& grad_out) override {
    this->require_cache(has_cache_, "lstm");
    const std::size_t B = batch_, steps = cache_.size();
    if (return_sequences_) {
      if (grad_out.rank() != 3 || grad_out.dim(0) != B || grad_out.dim(1) != steps ||
          grad_out.dim(2) != hidden_) {
        throw DimensionError("lstm backward: expected [B,T,H] gradient, got " +
                             shape_str(grad_out.shape()));
      }
    } else if (grad_out.rank() != 2 || grad_out.dim(0) != B || grad_out.dim(1) != hidden_) {
      throw DimensionError("lstm backward: expected [B,H] gradient, got " +
                           shape_str(grad_out.shape()));
    }
    const std::size_t rows = hidden_ + c_in_;
    TensorT<T> grad_x({B, steps, c_in_});
    TensorT<T> dh_next({B, hidden_});
    TensorT<T> dc_next({B, hidden_});
    for (std::size_t t = steps; t-- > 0;) {
      const StepCache& sc = cache_[t];
      TensorT<T> dh = dh_next;
      if (return_sequences_) {
        add_inplace(dh, time_slice(grad_out, t));
      } else if (t == steps - 1) {
        add_inplace(dh, grad_out);
      }
      // h = o * tanh(c): split dh into the o-gate path and the cell path.
      TensorT<T> dpre_o({B, hidden_});
      TensorT<T> dc = dc_next;
      {
        const T* pdh = dh.data();
        const T* po = sc.o.data();
        const T* ptc = sc.tanh_c.data();
        T* pdo = dpre_o.data();
        T* pdc = dc.data();
        for (std::size_t i = 0; i < B * hidden_; ++i) {
          pdo[i] = pdh[i] * ptc[i] * po[i] * (T(1) - po[i]);
          pdc[i] += pdh[i] * po[i] * (T(1) - ptc[i] * ptc[i]);
        }
      }
      TensorT<T> dzo = matmul_nt(dpre_o, w_o_.value);  // [B, rows(+H)]
      if (peephole_) {
        // The output gate saw c_t directly, so its pre-activation gradient
        // feeds the cell state too, before the f/i/candidate paths.
        const T* pdzo = dzo.data();
        T* pdc = dc.data();
        const std::size_t wide = rows + hidden_;
        for (std::size_t b = 0; b < B; ++b) {
          for (std::size_t j = 0; j < hidden_; ++j) {
            pdc[b * hidden_ + j] += pdzo[b * wide + rows + j];
          }
        }
      }
      TensorT<T> dpre_f({B, hidden_});
      TensorT<T> dpre_i({B, hidden_});
      TensorT<T> dpre_g({B, hidden_});
      {
        const T* pdc = dc.data();
        const T* pf = sc.f.data();
        const T* pi = sc.i.data();
        const T* pg = sc.g.data();
        const T* pcp = sc.c_prev.data();
        T* pdf = dpre_f.data();
        T* pdi = dpre_i.data();
        T* pdg = dpre_g.data();
        T* pdcn = dc_next.data();
        for (std::size_t i = 0; i < B * hidden_; ++i) {
          pdf[i] = pdc[i] * pcp[i] * pf[i] * (T(1) - pf[i]);
          pdi[i] = pdc[i] * pg[i] * pi[i] * (T(1) - pi[i]);
          pdg[i] = pdc[i] * pi[i] * (T(1) - pg[i] * pg[i]);
          pdcn[i] = pdc[i] * pf[i];
        }
      }
      add_inplace(w_f_.grad, matmul_tn(sc.z, dpre_f));
      add_inplace(b_f_.grad, col_sum(dpre_f));
      add_inplace(w_i_.grad, matmul_tn(sc.z, dpre_i));
      add_inplace(b_i_.grad, col_sum(dpre_i));
      add_inplace(w_c_.grad, matmul_tn(sc.z, dpre_g));
      add_inplace(b_c_.grad, col_sum(dpre_g));
      if (peephole_) {
        add_inplace(w_o_.grad, matmul_tn(hconcat(sc.z, sc.c), dpre_o));
      } else {
        add_inplace(w_o_.grad, matmul_tn(sc.z, dpre_o));
      }
      add_inplace(b_o_.grad, col_sum(dpre_o));
      TensorT<T> dz = matmul_nt(dpre_f, w_f_.value);
      add_inplace(dz, matmul_nt(dpre_i, w_i_.value));
      add_inplace(dz, matmul_nt(dpre_g, w_c_.value));
      if (peephole_) {
        add_inplace(dz, col_slice(dzo, 0, rows));
      } else {
        add_inplace(dz, dzo);
      }
      dh_next = col_slice(dz, 0, hidden_);
      set_time_slice(grad_x, t, col_slice(dz, hidden_, rows));
    }
    has_cache_ = false;
    return grad_x;
  }

  Shape output_shape(const Shape& in) const override {
    if (in.size() != 3 || in[2] != c_in_ || in[1] == 0) {
      throw DimensionError("lstm: expected input [B,T," + std::to_string(c_in_) + "], got " +
                           shape_str(in));
    }
    if (return_sequences_) return {in[0], in[1], hidden_};
    return {in[0], hidden_};
  }

  std::string kind() const override { return "lstm"; }

  std::size_t hidden() const { return hidden_; }
  bool returns_sequences() const { return return_sequences_; }

private:
  struct StepCache {
    TensorT<T> z;       // [B, H+C] concatenated (h_prev, x_t)
    TensorT<T> f, i, g, o, c, tanh_c, c_prev;
  };

  void check_step_shapes(const TensorT<T>& x_t, const TensorT<T>& h_prev,
                         const TensorT<T>& c_prev) const {
    if (x_t.rank() != 2 || x_t.dim(1) != c_in_) {
      throw DimensionError("lstm step: expected x [B," + std::to_string(c_in_) + "], got " +
                           shape_str(x_t.shape()));
    }
    const std::size_t B = x_t.dim(0);
    if (h_prev.rank() != 2 || h_prev.dim(0) != B || h_prev.dim(1) != hidden_ ||
        !c_prev.same_shape(h_prev)) {
      throw DimensionError("lstm step: state shapes " + shape_str(h_prev.shape()) + "/" +
                           shape_str(c_prev.shape()) + " do not match [B,H]");
    }
  }

  TensorT<T> step_impl(const TensorT<T>& x_t, const TensorT<T>& h_prev, const TensorT<T>& c_prev,
                       StepCache& sc) {
    sc.z = hconcat(h_prev, x_t);
    sc.c_prev = c_prev;
    TensorT<T> pre_f = matmul(sc.z, w_f_.value);
    add_row_inplace(pre_f, b_f_.value);
    sc.f = sigmoid(pre_f);
    TensorT<T> pre_i = matmul(sc.z, w_i_.value);
    add_row_inplace(pre_i, b_i_.value);
    sc.i = sigmoid(pre_i);
    TensorT<T> pre_g = matmul(sc.z, w_c_.value);
    add_row_inplace(pre_g, b_c_.value);
    sc.g = tanh_t(pre_g);
    sc.c = add(mul(sc.f, c_prev), mul(sc.i, sc.g));
    TensorT<T> pre_o = peephole_ ? matmul(hconcat(sc.z, sc.c), w_o_.value)
                                 : matmul(sc.z, w_o_.value);
    add_row_inplace(pre_o, b_o_.value);
    sc.o = sigmoid(pre_o);
    sc.tanh_c = tanh_t(sc.c);
    return mul(sc.o, sc.tanh_c);
  }

  std::size_t c_in_, hidden_;
  bool return_sequences_, peephole_;
  ParamT<T> w_f_, w_i_, w_c_, w_o_, b_f_, b_i_, b_c_, b_o_;
  std::vector<StepCache> cache_;
  std::size_t batch_ = 0;
  bool has_cache_ = false;
};

// Inverted dropout: surviving activations are scaled by 1/(1-rate) during
// training so inference is a plain identity.
template <class T>
class DropoutT final : public LayerT<T> {
public:
  explicit DropoutT(double rate) : rate_(rate) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout: rate must be in [0,1)");
  }

  TensorT<T> forward(const TensorT<T>& x, bool training = false, Rng* rng = nullptr) override {
    if (!training || rate_ == 0.0) {
      identity_ = true;
      mask_ = TensorT<T>();
      in_shape_ = x.shape();
      has_cache_ = true;
      return x;
    }
    if (rng == nullptr) throw ArgumentError("dropout: training forward needs an rng");
    identity_ = false;
    in_shape_ = x.shape();
    mask_ = TensorT<T>(x.shape());
    const T scale = static_cast<T>(1.0 / (1.0 - rate_));
    T* pm = mask_.data();
    for (std::size_t i = 0; i < mask_.size(); ++i) {
      pm[i] = rng->uniform() >= rate_ ? scale : T(0);
    }
    has_cache_ = true;
    return mul(x, mask_);
  }

  TensorT<T> backward(const TensorT<T>& grad_out) override {
    this->require_cache(has_cache_, "dropout");
    if (grad_out.shape() != in_shape_) {
      throw DimensionError("dropout backward: gradient shape " + shape_str(grad_out.shape()) +
                           " does not match input " + shape_str(in_shape_));
    }
    has_cache_ = false;
    if (identity_) return grad_out;
    return mul(grad_out, mask_);
  }

  Shape output_shape(const Shape& in) const override { return in; }
  std::string kind() const override { return "dropout"; }
  double rate() const { return rate_; }

private:
  double rate_;
  TensorT<T> mask_;
  Shape in_shape_;
  bool identity_ = true;
  bool has_cache_ = false;
};

// Fully connected layer over [B,in]; supports linear, relu and row softmax.
template <class T>
class DenseT final : public LayerT<T> {
public:
  DenseT(std::size_t in_features, std::size_t units, Activation act, Rng& rng)
      : in_(in_features), units_(units), act_(act) {
    if (in_ == 0 || units_ == 0) throw ArgumentError("dense: sizes must be positive");
    const double lim = glorot_limit(in_, units_);
    w_.name = "w";
    w_.value = rng_uniform<T>(rng, {in_, units_}, -lim, lim);
    b_.name = "b";
    b_.value = TensorT<T>({units_});
    this->register_param(&w_);
    this->register_param(&b_);
  }

  TensorT<T> forward(const TensorT<T>& x, bool = false, Rng* = nullptr) override {
    if (x.rank() != 2 || x.dim(1) != in_) {
      throw DimensionError("dense: expected input [B," + std::to_string(in_) + "], got " +
                           shape_str(x.shape()));
    }
    TensorT<T> pre = matmul(x, w_.value);
    add_row_inplace(pre, b_.value);
    TensorT<T> out;
    switch (act_) {
      case Activation::linear: out = pre; break;
      case Activation::relu: out = relu(pre); break;
      case Activation::softmax: out = softmax_rows(pre); break;
      case Activation::tanh: throw ArgumentError("dense: tanh activation not supported");
    }
    x_ = x;
    out_ = out;
    has_cache_ = true;
    return out;
  }

  TensorT<T> backward(const TensorT<T>& grad_out) override {
    this->require_cache(has_cache_, "dense");
    detail::require_same_shape(grad_out, out_, "dense backward");
    TensorT<T> dpre(grad_out.shape());
    const std::size_t B = grad_out.dim(0);
    const T* pg = grad_out.data();
    const T* po = out_.data();
    T* pd = dpre.data();
    switch (act_) {
      case Activation::linear:
        dpre = grad_out;
        break;
      case Activation::relu:
        for (std::size_t i = 0; i < grad_out.size(); ++i) {
          pd[i] = po[i] > T(0) ? pg[i] : T(0);
        }
        break;
      case Activation::softmax:
        // Full softmax Jacobian: dpre_j = s_j * (g_j - sum_k g_k s_k).
        for (std::size_t b = 0; b < B; ++b) {
          const T* g = pg + b * units_;
          const T* s = po + b * units_;
          T dot = 0;
          for (std::size_t j = 0; j < units_; ++j) dot += g[j] * s[j];
          T* d = pd + b * units_;
          for (std::size_t j = 0; j < units_; ++j) d[j] = s[j] * (g[j] - dot);
        }
        break;
      case Activation::tanh:
        throw ArgumentError("dense: tanh activation not supported");
    }
    return backward_from_pre(dpre);
  }

  // Gradient entry point for losses that already differentiated through the
  // activation (the fused softmax cross-entropy path).
  TensorT<T> backward_from_pre(const TensorT<T>& dpre) {
    this->require_cache(has_cache_, "dense");
    if (dpre.rank() != 2 || dpre.dim(0) != x_.dim(0) || dpre.dim(1) != units_) {
      throw DimensionError("dense backward: pre-activation gradient " +
                           shape_str(dpre.shape()) + " does not match [B," +
                           std::to_string(units_) + "]");
    }
    add_inplace(w_.grad, matmul_tn(x_, dpre));
    add_inplace(b_.grad, col_sum(dpre));
    has_cache_ = false;
    return matmul_nt(dpre, w_.value);
  }

  Shape output_shape(const Shape& in) const override {
    if (in.size() != 2 || in[1] != in_) {
      throw DimensionError("dense: expected input [B," + std::to_string(in_) + "], got " +
                           shape_str(in));
    }
    return {in[0], units_};
  }

  std::string kind() const override { return "dense"; }
  Activation activation() const { return act_; }
  std::size_t units() const { return units_; }

private:
  std::size_t in_, units_;
  Activation act_;
  ParamT<T> w_, b_;
  TensorT<T> x_, out_;
  bool has_cache_ = false;
};

// Collapses everything after the batch axis: [B,...] -> [B, prod(...)].
template <class T>
class FlattenT final : public LayerT<T> {
public:
  TensorT<T> forward(const TensorT<T>& x, bool = false, Rng* = nullptr) override {
    if (x.rank() < 2) {
      throw DimensionError("flatten: expected at least rank 2, got " + shape_str(x.shape()));
    }
    in_shape_ = x.shape();
    has_cache_ = true;
    return x.reshaped(output_shape(in_shape_));
  }

  TensorT<T> backward(const TensorT<T>& grad_out) override {
    this->require_cache(has_cache_, "flatten");
    has_cache_ = false;
    return grad_out.reshaped(in_shape_);
  }

  Shape output_shape(const Shape& in) const override {
    if (in.size() < 2) {
      throw DimensionError("flatten: expected at least rank 2, got " + shape_str(in));
    }
    std::size_t n = 1;
    for (std::size_t i = 1; i < in.size(); ++i) n *= in[i];
    return {in[0], n};
  }

  std::string kind() const override { return "flatten"; }

private:
  Shape in_shape_;
  bool has_cache_ = false;
};

}  // namespace seatrack
