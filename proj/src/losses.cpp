#include "pgprec/losses.hpp"

#include <string>

#include "pgprec/errors.hpp"

namespace pgprec {

ValueId bpr_loss_node(GradTape& tape, ValueId e_u, ValueId e_i, ValueId e_j) {
  const ValueId margin_vec = tape.add(e_i, tape.scale(e_j, -1.0));
  const ValueId margin = tape.dot(e_u, margin_vec);
  return tape.scale(tape.log(tape.sigmoid(margin)), -1.0);
}

double bpr_loss(const Tensor& e_u, const Tensor& e_i, const Tensor& e_j) {
  GradTape tape;
  const ValueId loss = bpr_loss_node(tape, tape.constant(e_u), tape.constant(e_i),
                                     tape.constant(e_j));
  return tape.value(loss).at(0, 0);
}

ValueId infonce_node(GradTape& tape, ValueId anchor, ValueId positive,
                     ValueId negatives, double tau) {
  if (tau <= 0.0) throw ConfigError("infonce temperature must be positive");
  if (tape.value(negatives).rows() < 1) {
    throw ContractError("infonce needs at least one negative");
  }
  const ValueId candidates =
      tape.concat_rows(std::vector<ValueId>{positive, negatives});
  const ValueId sims = tape.matmul(candidates, anchor, false, true);  // (k+1) x 1
  const ValueId log_z = tape.log(tape.sum(tape.exp(tape.scale(sims, 1.0 / tau))));
  const ValueId pos = tape.scale(tape.dot(anchor, positive), 1.0 / tau);
  return tape.add(log_z, tape.scale(pos, -1.0));
}

double infonce(const Tensor& anchor, const Tensor& positive, const Tensor& negatives,
               double tau) {
  GradTape tape;
  const ValueId loss = infonce_node(tape, tape.constant(anchor),
                                    tape.constant(positive),
                                    tape.constant(negatives), tau);
  return tape.value(loss).at(0, 0);
}

namespace {

// Summed InfoNCE over one side's anchors. Candidate rows (view B) double as
// positives: candidate q is anchor q's positive, the rest are its in-batch
// negatives.
ValueId side_loss(GradTape& tape, ValueId reps_a, ValueId reps_b,
                  const std::vector<int>& rows, double tau) {
  if (rows.size() < 2) {
    throw ContractError("contrastive batch needs at least two nodes per side, got " +
                        std::to_string(rows.size()));
  }
  const ValueId anchors = tape.gather_rows(reps_a, rows);
  const ValueId candidates = tape.gather_rows(reps_b, rows);
  std::vector<ValueId> per_anchor;
  per_anchor.reserve(rows.size());
  for (int q = 0; q < static_cast<int>(rows.size()); ++q) {
    const ValueId a_q = tape.gather_rows(anchors, {q});
    const ValueId b_q = tape.gather_rows(candidates, {q});
    const ValueId sims = tape.matmul(candidates, a_q, false, true);
    const ValueId log_z = tape.log(tape.sum(tape.exp(tape.scale(sims, 1.0 / tau))));
    const ValueId pos = tape.scale(tape.dot(a_q, b_q), 1.0 / tau);
    per_anchor.push_back(tape.add(log_z, tape.scale(pos, -1.0)));
  }
  return tape.sum(tape.concat_rows(per_anchor));
}

}  // namespace

std::pair<ValueId, ValueId> contrastive_loss_nodes(GradTape& tape, ValueId reps_a,
                                                   ValueId reps_b,
                                                   const std::vector<int>& user_rows,
                                                   const std::vector<int>& item_rows,
                                                   double tau) {
  if (tau <= 0.0) throw ConfigError("contrastive temperature must be positive");
  const ValueId cl_user = side_loss(tape, reps_a, reps_b, user_rows, tau);
  const ValueId cl_item = side_loss(tape, reps_a, reps_b, item_rows, tau);
  return {cl_user, cl_item};
}

std::pair<double, double> contrastive_loss(const Tensor& reps_a, const Tensor& reps_b,
                                           const std::vector<int>& user_rows,
                                           const std::vector<int>& item_rows,
                                           double tau) {
  GradTape tape;
  const auto [u, i] = contrastive_loss_nodes(tape, tape.constant(reps_a),
                                             tape.constant(reps_b), user_rows,
                                             item_rows, tau);
  return {tape.value(u).at(0, 0), tape.value(i).at(0, 0)};
}

ValueId l2_norm_node(GradTape& tape, std::span<const ValueId> leaves) {
  ValueId total = tape.constant(Tensor(1, 1));
  for (ValueId leaf : leaves) {
    if (tape.value(leaf).size() == 0) continue;
    total = tape.add(total, tape.dot(leaf, leaf));
  }
  return total;
}

ValueId joint_loss_node(GradTape& tape, ValueId rec, ValueId cl_user, ValueId cl_item,
                        ValueId l2, double lambda1, double lambda2) {
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw ConfigError("loss weights must be non-negative");
  }
  const ValueId cl = tape.add(cl_user, cl_item);
  return tape.add(rec, tape.add(tape.scale(cl, lambda1), tape.scale(l2, lambda2)));
}

LossBreakdown joint_loss(double rec, double cl_user, double cl_item,
                         std::span<const Tensor* const> l2_params, double lambda1,
                         double lambda2) {
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw ConfigError("loss weights must be non-negative");
  }
  LossBreakdown b;
  b.rec = rec;
  b.cl_user = cl_user;
  b.cl_item = cl_item;
  b.lambda1 = lambda1;
  b.lambda2 = lambda2;
  for (const Tensor* p : l2_params) b.l2 += dot(*p, *p);
  b.total = rec + lambda1 * (cl_user + cl_item) + lambda2 * b.l2;
  return b;
}

}  // namespace pgprec
