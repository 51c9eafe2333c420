#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pgprec/tensor.hpp"

namespace pgprec {

// Uniform in +-sqrt(6 / (rows + cols)), deterministic under seed.
Tensor xavier_init(int rows, int cols, std::uint64_t seed);

// Draws shaped tensors sequentially from one stream; used to initialise a
// whole parameter struct from a single sub-seed.
class XavierStream {
 public:
  explicit XavierStream(std::uint64_t seed);
  ~XavierStream();
  Tensor next(int rows, int cols);

 private:
  struct Impl;
  Impl* impl_;
};

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState like(std::span<const Tensor* const> params);
};

// Standard Adam with bias correction. `params` and `grads` must match the
// state's slot shapes; the step counter increments once per call.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state, double lr);

// Central-difference gradient check. `f` evaluates the loss at the current
// parameter values; entries of `params` are perturbed in place and restored.
// Returns max over entries of |analytic - numeric| / max(|analytic|,
// |numeric|, 1e-12).
double finite_diff_check(const std::function<double()>& f,
                         std::span<Tensor* const> params,
                         std::span<const Tensor> analytic_grads, double epsilon);

}  // namespace pgprec
