#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pgprec/tape.hpp"
#include "pgprec/tensor.hpp"

namespace pgprec {

// Pairwise ranking loss -log sigmoid(e_u . (e_i - e_j)). Inputs are 1xd rows.
ValueId bpr_loss_node(GradTape& tape, ValueId e_u, ValueId e_i, ValueId e_j);
double bpr_loss(const Tensor& e_u, const Tensor& e_i, const Tensor& e_j);

// InfoNCE with the positive term included in the denominator:
//   -log( exp(a.p / tau) / (exp(a.p / tau) + sum_k exp(a.n_k / tau)) )
// computed as logsumexp - positive so no softmax probabilities are formed.
ValueId infonce_node(GradTape& tape, ValueId anchor, ValueId positive,
                     ValueId negatives, double tau);
double infonce(const Tensor& anchor, const Tensor& positive,
               const Tensor& negatives, double tau);

// View-contrast over one in-batch node set. For each anchor row q taken from
// view A, the positive is the same row in view B and the candidates are all
// in-batch rows of the same type in view B. Each side needs at least two
// nodes (one node has no negatives). Returns (user side, item side), each a
// sum over that side's anchors.
std::pair<ValueId, ValueId> contrastive_loss_nodes(GradTape& tape, ValueId reps_a,
                                                   ValueId reps_b,
                                                   const std::vector<int>& user_rows,
                                                   const std::vector<int>& item_rows,
                                                   double tau);
std::pair<double, double> contrastive_loss(const Tensor& reps_a, const Tensor& reps_b,
                                           const std::vector<int>& user_rows,
                                           const std::vector<int>& item_rows,
                                           double tau);

// Sum of squared entries over the given (trainable) leaves.
ValueId l2_norm_node(GradTape& tape, std::span<const ValueId> leaves);

struct LossBreakdown {
  double rec = 0.0;
  double cl_user = 0.0;
  double cl_item = 0.0;
  double l2 = 0.0;
  double total = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// total = rec + lambda1 * (cl_user + cl_item) + lambda2 * l2.
ValueId joint_loss_node(GradTape& tape, ValueId rec, ValueId cl_user, ValueId cl_item,
                        ValueId l2, double lambda1, double lambda2);
LossBreakdown joint_loss(double rec, double cl_user, double cl_item,
                         std::span<const Tensor* const> l2_params, double lambda1,
                         double lambda2);

}  // namespace pgprec
