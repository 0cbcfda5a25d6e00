#pragma once

// Adam with bias correction. Moment buffers are kept per parameter tensor and
// aligned by position with the parameter list handed to every step.

#include <cmath>
#include <vector>

#include "seatrack/error.hpp"
#include "seatrack/layers.hpp"
#include "seatrack/tensor.hpp"

namespace seatrack {

template <class T>
struct AdamStateT {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t t = 0;  // completed steps
  std::vector<TensorT<T>> m, v;

  AdamStateT() = default;
  AdamStateT(double lr, double beta1, double beta2, double eps)
      : lr(lr), beta1(beta1), beta2(beta2), eps(eps) {
    if (!(lr > 0)) throw ArgumentError("adam: learning rate must be positive");
    if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
      throw ArgumentError("adam: betas must lie in [0,1)");
    }
    if (!(eps > 0)) throw ArgumentError("adam: eps must be positive");
  }
};

using AdamState = AdamStateT<float>;

template <class T>
void adam_step(AdamStateT<T>& st, const std::vector<ParamT<T>*>& params) {
  if (st.m.empty()) {
    for (const ParamT<T>* p : params) {
      st.m.emplace_back(p->value.shape());
      st.v.emplace_back(p->value.shape());
    }
  }
  if (st.m.size() != params.size()) {
    throw ArgumentError("adam: optimizer state tracks " + std::to_string(st.m.size()) +
                        " tensors but step got " + std::to_string(params.size()));
  }
  st.t += 1;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    ParamT<T>& p = *params[i];
    if (!p.value.same_shape(st.m[i])) {
      throw DimensionError("adam: parameter " + p.name + " changed shape");
    }
    if (!all_finite(p.grad)) {
      throw NumericError("adam: non-finite gradient for " + p.name);
    }
    T* pm = st.m[i].data();
    T* pv = st.v[i].data();
    T* pw = p.value.data();
    const T* pg = p.grad.data();
    const T b1 = static_cast<T>(st.beta1), b2 = static_cast<T>(st.beta2);
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const T g = pg[j];
      pm[j] = b1 * pm[j] + (T(1) - b1) * g;
      pv[j] = b2 * pv[j] + (T(1) - b2) * g * g;
      const double mhat = pm[j] / c1;
      const double vhat = pv[j] / c2;
      pw[j] -= static_cast<T>(st.lr * mhat / (std::sqrt(vhat) + st.eps));
    }
    if (!all_finite(p.value)) {
      throw NumericError("adam: non-finite value in " + p.name + " after update");
    }
  }
}

}  // namespace seatrack
