#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pgprec/errors.hpp"
#include "pgprec/optim.hpp"
#include "pgprec/rng.hpp"
#include "pgprec/tape.hpp"
#include "pgprec/tensor.hpp"
#include "testutil.hpp"

using namespace pgprec;

TEST_CASE("row softmax rows sum to one and shift invariance holds") {
  const Tensor a = testutil::random_tensor(5, 7, 11, -4.0, 4.0);
  const Tensor s = row_softmax(a);
  for (int r = 0; r < s.rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < s.cols(); ++c) {
      CHECK(s.at(r, c) > 0.0);
      sum += s.at(r, c);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  Tensor shifted = a;
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) shifted.at(r, c) += 123.456;
  }
  CHECK(max_abs_diff(row_softmax(shifted), s) < 1e-12);
}

TEST_CASE("kernels reject non-finite inputs") {
  Tensor bad(2, 2);
  bad.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
  const Tensor good(2, 2);
  CHECK_THROWS_AS(matmul(bad, good), NumericError);
  CHECK_THROWS_AS(add(bad, good), NumericError);
  CHECK_THROWS_AS(row_softmax(bad), NumericError);
  Tensor inf(1, 1);
  inf.at(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(scale(inf, 2.0), NumericError);
  CHECK_THROWS_AS(dot(bad, good), NumericError);
}

TEST_CASE("matmul transpose flags agree with explicit transposition") {
  const Tensor a = testutil::random_tensor(3, 4, 1);
  const Tensor b = testutil::random_tensor(5, 4, 2);
  const Tensor expected = matmul(a, transpose(b));
  CHECK(max_abs_diff(matmul(a, b, false, true), expected) < 1e-15);
  const Tensor c = testutil::random_tensor(4, 3, 3);
  CHECK(max_abs_diff(matmul(c, b, true, true), matmul(transpose(c), transpose(b))) < 1e-15);
}

TEST_CASE("xavier bounds, determinism and variance") {
  const Tensor single = xavier_init(1, 1, 42);
  CHECK(std::abs(single.at(0, 0)) <= std::sqrt(3.0));

  CHECK(max_abs_diff(xavier_init(4, 6, 9), xavier_init(4, 6, 9)) == 0.0);
  CHECK_THROWS_AS(xavier_init(0, 3, 1), ShapeError);

  // 3 x 4096 draws ~ 1.2e4 samples; uniform on +-sqrt(6/128) has variance
  // 2 / 128 = 0.015625.
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  const double bound = std::sqrt(6.0 / 128.0);
  for (std::uint64_t seed : {100u, 101u, 102u}) {
    const Tensor t = xavier_init(64, 64, seed);
    for (double v : t.values()) {
      CHECK(std::abs(v) <= bound);
      sum += v;
      sum_sq += v * v;
      ++n;
    }
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(var == doctest::Approx(2.0 / 128.0).epsilon(0.10));
}

TEST_CASE("backward of sum is all ones and of dot(x, x) is 2x") {
  GradTape tape;
  const ValueId x = tape.leaf(testutil::random_tensor(2, 2, 5), true);
  tape.backward(tape.sum(x));
  CHECK(max_abs_diff(tape.grad(x), Tensor::full(2, 2, 1.0)) == 0.0);

  GradTape tape2;
  const ValueId y = tape2.leaf(Tensor(1, 2, {1.0, 2.0}), true);
  tape2.backward(tape2.dot(y, y));
  CHECK(max_abs_diff(tape2.grad(y), Tensor(1, 2, {2.0, 4.0})) == 0.0);
}

TEST_CASE("backward requires a scalar loss") {
  GradTape tape;
  const ValueId x = tape.leaf(Tensor(2, 2), true);
  CHECK_THROWS_AS(tape.backward(x), ContractError);
}

TEST_CASE("unreached parameters get zero gradients") {
  GradTape tape;
  const ValueId used = tape.leaf(Tensor(1, 2, {1.0, 2.0}), true);
  const ValueId unused = tape.leaf(Tensor(3, 3), true);
  tape.backward(tape.sum(used));
  CHECK(max_abs_diff(tape.grad(unused), Tensor(3, 3)) == 0.0);
}

namespace {

// Composition touching every primitive; used for the randomized gradient
// property.
struct Composed {
  GradTape tape;
  ValueId x, w1, w2, loss;

  explicit Composed(const Tensor& xv, const Tensor& w1v, const Tensor& w2v) {
    x = tape.leaf(xv, true);
    w1 = tape.leaf(w1v, true);
    w2 = tape.leaf(w2v, true);
    const ValueId h1 = tape.row_softmax(tape.matmul(x, w1));           // 4x4
    const ValueId h2 = tape.sigmoid(tape.matmul(h1, w2, false, true)); // 4x4
    const ValueId g = tape.gather_rows(h2, {0, 2, 2});                 // 3x4
    const ValueId c = tape.concat_rows(std::vector<ValueId>{g, h2});   // 7x4
    const ValueId e = tape.exp(tape.scale(c, 0.3));
    const ValueId l = tape.log(tape.add(e, tape.constant(Tensor::full(7, 4, 1.0))));
    loss = tape.add(tape.dot(l, l), tape.sum(h1));
  }
};

double composed_value(const Tensor& xv, const Tensor& w1v, const Tensor& w2v) {
  Composed c(xv, w1v, w2v);
  return c.tape.value(c.loss).at(0, 0);
}

}  // namespace

TEST_CASE("tape gradients match central finite differences over 20 seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Tensor xv = testutil::random_tensor(4, 3, seed * 3 + 0, -0.8, 0.8);
    Tensor w1v = testutil::random_tensor(3, 4, seed * 3 + 1, -0.8, 0.8);
    Tensor w2v = testutil::random_tensor(4, 4, seed * 3 + 2, -0.8, 0.8);

    Composed c(xv, w1v, w2v);
    c.tape.backward(c.loss);
    const std::vector<Tensor> grads = {c.tape.grad(c.x), c.tape.grad(c.w1),
                                       c.tape.grad(c.w2)};
    std::vector<Tensor*> params = {&xv, &w1v, &w2v};
    const double err = finite_diff_check(
        [&]() { return composed_value(xv, w1v, w2v); }, params, grads, 1e-5);
    CHECK(err < 1e-6);
  }
}

TEST_CASE("finite differences are exact on quadratics and constants") {
  Tensor xv = testutil::random_tensor(1, 4, 77);
  const Tensor a = testutil::random_tensor(4, 4, 78);
  const auto quad = [&]() {
    GradTape tape;
    const ValueId x = tape.leaf(xv, true);
    const ValueId ax = tape.matmul(x, tape.constant(a), false, true);
    return tape.value(tape.dot(x, ax)).at(0, 0);
  };
  GradTape tape;
  const ValueId x = tape.leaf(xv, true);
  const ValueId ax = tape.matmul(x, tape.constant(a), false, true);
  tape.backward(tape.dot(x, ax));
  const std::vector<Tensor> grads = {tape.grad(x)};
  std::vector<Tensor*> params = {&xv};
  CHECK(finite_diff_check(quad, params, grads, 1e-5) < 1e-8);

  // Constant function: both sides are exactly zero.
  Tensor yv = testutil::random_tensor(2, 2, 79);
  std::vector<Tensor*> yparams = {&yv};
  const std::vector<Tensor> zero_grads = {Tensor(2, 2)};
  CHECK(finite_diff_check([]() { return 3.5; }, yparams, zero_grads, 1e-5) == 0.0);
}

TEST_CASE("adam first step moves by roughly -lr * sign(gradient)") {
  Tensor p(1, 3);
  const Tensor g(1, 3, {0.5, -2.0, 3.0});
  std::vector<Tensor*> params = {&p};
  std::vector<const Tensor*> param_view = {&p};
  AdamState state = AdamState::like(param_view);
  std::vector<const Tensor*> grads = {&g};
  adam_step(params, grads, state, 0.01);
  CHECK(state.step == 1);
  CHECK(p.at(0, 0) == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(p.at(0, 1) == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(p.at(0, 2) == doctest::Approx(-0.01).epsilon(1e-6));
}

TEST_CASE("adam leaves parameters untouched under zero gradients") {
  Tensor p(2, 2, {1.0, -2.0, 3.0, 4.0});
  const Tensor before = p;
  const Tensor g(2, 2);
  std::vector<Tensor*> params = {&p};
  std::vector<const Tensor*> view = {&p};
  AdamState state = AdamState::like(view);
  std::vector<const Tensor*> grads = {&g};
  adam_step(params, grads, state, 0.1);
  adam_step(params, grads, state, 0.1);
  CHECK(max_abs_diff(p, before) == 0.0);
}

TEST_CASE("adam on f(x) = x^2 matches a scalar simulation and descends") {
  Tensor x(1, 1, {1.0});
  std::vector<Tensor*> params = {&x};
  std::vector<const Tensor*> view = {&x};
  AdamState state = AdamState::like(view);

  // Independent scalar recurrence.
  double sx = 1.0, m = 0.0, v = 0.0;
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, lr = 0.1;
  std::vector<double> expected;
  for (int step = 1; step <= 2; ++step) {
    const double grad = 2.0 * sx;
    m = beta1 * m + (1 - beta1) * grad;
    v = beta2 * v + (1 - beta2) * grad * grad;
    const double mhat = m / (1 - std::pow(beta1, step));
    const double vhat = v / (1 - std::pow(beta2, step));
    sx -= lr * mhat / (std::sqrt(vhat) + eps);
    expected.push_back(sx);
  }

  std::vector<double> seen;
  for (int step = 0; step < 2; ++step) {
    const Tensor g(1, 1, {2.0 * x.at(0, 0)});
    std::vector<const Tensor*> grads = {&g};
    adam_step(params, grads, state, lr);
    seen.push_back(x.at(0, 0));
  }
  CHECK(seen[0] == doctest::Approx(expected[0]).epsilon(1e-12));
  CHECK(seen[1] == doctest::Approx(expected[1]).epsilon(1e-12));
  CHECK(seen[0] < 1.0);
  CHECK(seen[1] < seen[0]);
}

TEST_CASE("adam rejects shape mismatches") {
  Tensor p(2, 2);
  const Tensor g(1, 2);
  std::vector<Tensor*> params = {&p};
  std::vector<const Tensor*> view = {&p};
  AdamState state = AdamState::like(view);
  std::vector<const Tensor*> grads = {&g};
  CHECK_THROWS_AS(adam_step(params, grads, state, 0.1), ShapeError);
}

TEST_CASE("splitmix-derived streams are deterministic and distinct") {
  SplitRng a(derive_seed(1, seed_offset::kSynth));
  SplitRng b(derive_seed(1, seed_offset::kSynth));
  SplitRng c(derive_seed(2, seed_offset::kSynth));
  const double va = a.next_double();
  CHECK(va == b.next_double());
  CHECK(va != c.next_double());
}

TEST_CASE("gather accumulates gradients for repeated rows") {
  GradTape tape;
  const ValueId m = tape.leaf(testutil::random_tensor(3, 2, 123), true);
  const ValueId g = tape.gather_rows(m, {1, 1, 1});
  tape.backward(tape.sum(g));
  const Tensor grad = tape.grad(m);
  CHECK(grad.at(0, 0) == 0.0);
  CHECK(grad.at(1, 0) == 3.0);
  CHECK(grad.at(1, 1) == 3.0);
  CHECK(grad.at(2, 1) == 0.0);
}
