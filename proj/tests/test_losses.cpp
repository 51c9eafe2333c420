#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pgprec/errors.hpp"
#include "pgprec/losses.hpp"
#include "pgprec/optim.hpp"
#include "testutil.hpp"

using namespace pgprec;

namespace {

Tensor row(std::vector<double> v) { return Tensor::row_vector(std::move(v)); }

}  // namespace

TEST_CASE("bpr loss at zero margin is ln 2 and decays with the margin") {
  const Tensor u = row({1.0, 0.5});
  const Tensor same = row({0.3, -0.2});
  CHECK(bpr_loss(u, same, same) == doctest::Approx(0.6931471805599453).epsilon(1e-12));

  // margin exactly 1: e_u . (e_i - e_j) = 1.
  const Tensor e_u = row({1.0, 0.0});
  const Tensor e_i = row({1.0, 0.0});
  const Tensor e_j = row({0.0, 0.0});
  CHECK(bpr_loss(e_u, e_i, e_j) == doctest::Approx(0.31326168751822286).epsilon(1e-12));

  // Monotone decreasing in the margin, towards zero.
  double last = bpr_loss(e_u, e_i, e_j);
  for (double m = 2.0; m <= 20.0; m += 2.0) {
    const double loss = bpr_loss(e_u, row({m, 0.0}), e_j);
    CHECK(loss < last);
    CHECK(loss > 0.0);
    last = loss;
  }
  CHECK(last < 1e-8);
}

TEST_CASE("bpr convexity bound: swapped pair sums to at least 2 ln 2") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Tensor u = testutil::random_tensor(1, 4, seed * 7);
    const Tensor i = testutil::random_tensor(1, 4, seed * 7 + 1);
    const Tensor j = testutil::random_tensor(1, 4, seed * 7 + 2);
    const double both = bpr_loss(u, i, j) + bpr_loss(u, j, i);
    CHECK(both >= 2.0 * std::log(2.0) - 1e-12);
  }
  const Tensor u = row({1.0});
  const Tensor x = row({0.5});
  CHECK(bpr_loss(u, x, x) + bpr_loss(u, x, x) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("infonce matches hand-evaluated cases") {
  const Tensor anchor = row({1.0, 0.0});

  // Positive and all three negatives identical to the anchor: ln 4.
  Tensor negs(3, 2);
  for (int r = 0; r < 3; ++r) negs.at(r, 0) = 1.0;
  CHECK(infonce(anchor, anchor, negs, 0.2) ==
        doctest::Approx(1.3862943611198906).epsilon(1e-12));
  CHECK(infonce(anchor, anchor, negs, 0.7) ==
        doctest::Approx(1.3862943611198906).epsilon(1e-12));

  // a.p = 1, three orthogonal negatives, tau = 1: ln(1 + 3/e).
  const Tensor pos = row({1.0, 0.0});
  Tensor ortho(3, 2);
  for (int r = 0; r < 3; ++r) ortho.at(r, 1) = 1.0;
  CHECK(infonce(anchor, pos, ortho, 1.0) ==
        doctest::Approx(0.7436683806286791).epsilon(1e-12));

  // Anchor orthogonal to everything, one negative: ln 2.
  const Tensor zero = row({0.0, 0.0});
  Tensor one_neg(1, 2);
  one_neg.at(0, 1) = 1.0;
  CHECK(infonce(row({1.0, 0.0}), zero, one_neg, 1.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(infonce(anchor, pos, ortho, 0.0), ConfigError);
  CHECK_THROWS_AS(infonce(anchor, pos, Tensor(0, 2), 1.0), ContractError);
}

TEST_CASE("infonce is order-invariant in negatives and decreasing in the positive") {
  const Tensor anchor = testutil::random_tensor(1, 5, 3);
  const Tensor pos = testutil::random_tensor(1, 5, 4);
  const Tensor negs = testutil::random_tensor(6, 5, 5);
  Tensor reversed(6, 5);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 5; ++c) reversed.at(r, c) = negs.at(5 - r, c);
  }
  CHECK(infonce(anchor, pos, negs, 0.5) ==
        doctest::Approx(infonce(anchor, pos, reversed, 0.5)).epsilon(1e-12));

  double last = infonce(anchor, pos, negs, 0.5);
  for (double boost = 0.5; boost <= 2.0; boost += 0.5) {
    const Tensor better = add(pos, scale(anchor, boost));
    const double loss = infonce(anchor, better, negs, 0.5);
    CHECK(loss < last);
    last = loss;
  }
}

TEST_CASE("temperature rescales logits exactly") {
  // With bilinear similarities, dividing the anchor by tau at tau' = 1 gives
  // the same logits as the tau-scaled loss.
  const Tensor anchor = testutil::random_tensor(1, 4, 8);
  const Tensor pos = testutil::random_tensor(1, 4, 9);
  const Tensor negs = testutil::random_tensor(5, 4, 10);
  const double tau = 0.2;
  const double lhs = infonce(anchor, pos, negs, tau);
  const double rhs = infonce(scale(anchor, 1.0 / tau), pos, negs, 1.0);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("contrastive loss over identical views gives per-node ln n") {
  const int n = 4;
  Tensor reps(n + n, 3);
  for (int r = 0; r < reps.rows(); ++r) reps.at(r, 0) = 1.0;  // identical rows
  std::vector<int> user_rows = {0, 1, 2, 3};
  std::vector<int> item_rows = {4, 5, 6, 7};
  const auto [cl_user, cl_item] = contrastive_loss(reps, reps, user_rows, item_rows, 0.2);
  CHECK(cl_user == doctest::Approx(n * std::log(n)).epsilon(1e-12));
  CHECK(cl_item == doctest::Approx(n * std::log(n)).epsilon(1e-12));
}

TEST_CASE("contrastive loss on an orthonormal batch of two") {
  Tensor reps(4, 4);
  reps.at(0, 0) = 1.0;  // user a
  reps.at(1, 1) = 1.0;  // user b
  reps.at(2, 2) = 1.0;  // item a
  reps.at(3, 3) = 1.0;  // item b
  const auto [cl_user, cl_item] =
      contrastive_loss(reps, reps, {0, 1}, {2, 3}, 1.0);
  // Per node: -ln(e / (e + 1)).
  const double per_node = std::log(1.0 + std::exp(-1.0));
  CHECK(cl_user == doctest::Approx(2 * per_node).epsilon(1e-12));
  CHECK(cl_item == doctest::Approx(2 * per_node).epsilon(1e-12));
}

TEST_CASE("contrastive loss rejects single-node sides") {
  const Tensor reps = testutil::random_tensor(3, 4, 2);
  CHECK_THROWS_AS(contrastive_loss(reps, reps, {0}, {1, 2}, 0.2), ContractError);
}

TEST_CASE("joint loss composes the breakdown") {
  const LossBreakdown plain = joint_loss(0.8, 0.0, 0.0, {}, 0.0, 0.0);
  CHECK(plain.total == 0.8);

  Tensor scalar(1, 1, {2.0});
  const std::vector<const Tensor*> params = {&scalar};
  const LossBreakdown l2_only = joint_loss(0.0, 0.0, 0.0, params, 0.0, 1.0);
  CHECK(l2_only.l2 == 4.0);
  CHECK(l2_only.total == 4.0);

  // One-line oracle on random inputs.
  SplitRng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const double rec = rng.next_double(0, 2);
    const double cu = rng.next_double(0, 2);
    const double ci = rng.next_double(0, 2);
    const double l1 = 0.1 * static_cast<double>(rng.next_index(11));
    const double l2w = 0.1 * static_cast<double>(rng.next_index(11));
    Tensor p = testutil::random_tensor(2, 3, 1000 + trial);
    const std::vector<const Tensor*> ps = {&p};
    const LossBreakdown b = joint_loss(rec, cu, ci, ps, l1, l2w);
    double sq = 0.0;
    for (double v : p.values()) sq += v * v;
    CHECK(b.total == doctest::Approx(rec + l1 * (cu + ci) + l2w * sq).epsilon(1e-12));
    CHECK(b.total == doctest::Approx(b.rec + b.lambda1 * (b.cl_user + b.cl_item) +
                                     b.lambda2 * b.l2)
                         .epsilon(1e-12));
  }
}

TEST_CASE("loss gradients pass the finite-difference check across seeds") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Tensor u = testutil::random_tensor(1, 4, seed * 11 + 0);
    Tensor i = testutil::random_tensor(1, 4, seed * 11 + 1);
    Tensor j = testutil::random_tensor(1, 4, seed * 11 + 2);

    {
      GradTape tape;
      const ValueId lu = tape.leaf(u, true);
      const ValueId li = tape.leaf(i, true);
      const ValueId lj = tape.leaf(j, true);
      tape.backward(bpr_loss_node(tape, lu, li, lj));
      const std::vector<Tensor> grads = {tape.grad(lu), tape.grad(li), tape.grad(lj)};
      std::vector<Tensor*> params = {&u, &i, &j};
      const double err = finite_diff_check(
          [&]() { return bpr_loss(u, i, j); }, params, grads, 1e-6);
      CHECK(err < 1e-6);
    }

    Tensor anchor = testutil::random_tensor(1, 4, seed * 11 + 3);
    Tensor pos = testutil::random_tensor(1, 4, seed * 11 + 4);
    Tensor negs = testutil::random_tensor(4, 4, seed * 11 + 5);
    {
      GradTape tape;
      const ValueId la = tape.leaf(anchor, true);
      const ValueId lp = tape.leaf(pos, true);
      const ValueId ln = tape.leaf(negs, true);
      tape.backward(infonce_node(tape, la, lp, ln, 0.2));
      const std::vector<Tensor> grads = {tape.grad(la), tape.grad(lp), tape.grad(ln)};
      std::vector<Tensor*> params = {&anchor, &pos, &negs};
      const double err = finite_diff_check(
          [&]() { return infonce(anchor, pos, negs, 0.2); }, params, grads, 1e-6);
      CHECK(err < 1e-6);
    }
  }
}

TEST_CASE("joint loss node matches the eager breakdown and differentiates") {
  Tensor u = testutil::random_tensor(1, 3, 21);
  Tensor i = testutil::random_tensor(1, 3, 22);
  Tensor j = testutil::random_tensor(1, 3, 23);
  Tensor reps_a = testutil::random_tensor(6, 3, 24);
  Tensor reps_b = testutil::random_tensor(6, 3, 25);
  const std::vector<int> user_rows = {0, 1, 2};
  const std::vector<int> item_rows = {3, 4, 5};
  const double lambda1 = 0.2, lambda2 = 0.1, tau = 0.2;

  const auto total_value = [&]() {
    const double rec = bpr_loss(u, i, j);
    const auto [cu, ci] = contrastive_loss(reps_a, reps_b, user_rows, item_rows, tau);
    const std::vector<const Tensor*> l2_params = {&u};
    return joint_loss(rec, cu, ci, l2_params, lambda1, lambda2).total;
  };

  GradTape tape;
  const ValueId lu = tape.leaf(u, true);
  const ValueId li = tape.leaf(i, true);
  const ValueId lj = tape.leaf(j, true);
  const ValueId la = tape.leaf(reps_a, true);
  const ValueId lb = tape.leaf(reps_b, true);
  const ValueId rec = bpr_loss_node(tape, lu, li, lj);
  const auto [cu, ci] = contrastive_loss_nodes(tape, la, lb, user_rows, item_rows, tau);
  const std::vector<ValueId> l2_leaves = {lu};
  const ValueId l2 = l2_norm_node(tape, l2_leaves);
  const ValueId total = joint_loss_node(tape, rec, cu, ci, l2, lambda1, lambda2);
  CHECK(tape.value(total).at(0, 0) == doctest::Approx(total_value()).epsilon(1e-12));

  tape.backward(total);
  const std::vector<Tensor> grads = {tape.grad(lu), tape.grad(li), tape.grad(lj),
                                     tape.grad(la), tape.grad(lb)};
  std::vector<Tensor*> params = {&u, &i, &j, &reps_a, &reps_b};
  CHECK(finite_diff_check(total_value, params, grads, 1e-6) < 1e-6);
}
