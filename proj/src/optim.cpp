#include "pgprec/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pgprec/errors.hpp"
#include "pgprec/rng.hpp"

namespace pgprec {

Tensor xavier_init(int rows, int cols, std::uint64_t seed) {
  XavierStream stream(seed);
  return stream.next(rows, cols);
}

struct XavierStream::Impl {
  SplitRng rng;
  explicit Impl(std::uint64_t seed) : rng(seed) {}
};

XavierStream::XavierStream(std::uint64_t seed) : impl_(new Impl(seed)) {}

XavierStream::~XavierStream() { delete impl_; }

Tensor XavierStream::next(int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw ShapeError("xavier init requires positive dimensions");
  }
  const double bound = std::sqrt(6.0 / (rows + cols));
  Tensor t(rows, cols);
  for (double& v : t.values()) v = impl_->rng.next_double(-bound, bound);
  return t;
}

AdamState AdamState::like(std::span<const Tensor* const> params) {
  AdamState s;
  for (const Tensor* p : params) {
    s.first_moment.emplace_back(p->rows(), p->cols());
    s.second_moment.emplace_back(p->rows(), p->cols());
  }
  return s;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state, double lr) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ShapeError("adam parameter/gradient/state count mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = *grads[k];
    if (!p.same_shape(g) || !p.same_shape(state.first_moment[k])) {
      throw ShapeError("adam shape mismatch at parameter " + std::to_string(k));
    }
    require_finite(g, "adam gradient");
    Tensor& m = state.first_moment[k];
    Tensor& v = state.second_moment[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g.values()[i];
      m.values()[i] = state.beta1 * m.values()[i] + (1.0 - state.beta1) * gi;
      v.values()[i] = state.beta2 * v.values()[i] + (1.0 - state.beta2) * gi * gi;
      const double mhat = m.values()[i] / bc1;
      const double vhat = v.values()[i] / bc2;
      p.values()[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
    require_finite(p, "adam updated parameter");
  }
}

double finite_diff_check(const std::function<double()>& f,
                         std::span<Tensor* const> params,
                         std::span<const Tensor> analytic_grads, double epsilon) {
  if (epsilon <= 0.0) throw ConfigError("finite difference epsilon must be positive");
  if (params.size() != analytic_grads.size()) {
    throw ShapeError("finite diff parameter/gradient count mismatch");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& a = analytic_grads[k];
    if (!p.same_shape(a)) throw ShapeError("finite diff gradient shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p.values()[i];
      p.values()[i] = saved + epsilon;
      const double up = f();
      p.values()[i] = saved - epsilon;
      const double down = f();
      p.values()[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("non-finite loss during finite difference probe");
      }
      const double numeric = (up - down) / (2.0 * epsilon);
      const double analytic = a.values()[i];
      const double denom =
          std::max({std::abs(analytic), std::abs(numeric), 1e-12});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace pgprec
