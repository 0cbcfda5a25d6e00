#pragma once

// Finite-difference gradient checking, run entirely in double precision.
// The oracle side only ever calls forward() + the loss, so it stays
// independent of every backward pass it is judging.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "seatrack/model.hpp"

namespace seatrack {

struct GradCheckEntry {
  std::string param;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::vector<GradCheckEntry> params;
  bool passed(double tol) const { return max_rel_err < tol; }
};

using GradSet = std::vector<std::pair<std::string, Tensor64>>;

// Gradients from the hand-written backward passes (the unfused path, so the
// softmax Jacobian is exercised too).
GradSet analytic_grads(Model64& model, const Tensor64& x, const Tensor64& onehot);

// Central differences, step 1e-5 scaled by each parameter's magnitude.
GradSet fd_grads(Model64& model, const Tensor64& x, const Tensor64& onehot);

GradCheckReport compare_grads(const GradSet& analytic, const GradSet& fd);

// Builds the model in double precision from the spec, draws a deterministic
// input batch and labels, and compares analytic vs FD gradients.
GradCheckReport grad_check(const ModelSpec& spec, std::size_t batch, std::uint64_t seed);

// The named check suite the CLI and the acceptance gate share: the paper
// stack at reduced width plus each layer in isolation.
std::vector<std::pair<std::string, GradCheckReport>> standard_grad_checks(std::uint64_t seed);

}  // namespace seatrack
