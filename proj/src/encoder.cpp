#include "pgprec/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "pgprec/errors.hpp"
#include "pgprec/optim.hpp"

namespace pgprec {

EncoderMask EncoderMask::all(int n_layers, bool trainable) {
  EncoderMask mask;
  mask.user_embeddings = trainable;
  mask.item_embeddings = trainable;
  mask.layers.assign(n_layers, {trainable, trainable, trainable, trainable});
  return mask;
}

EncoderParams EncoderParams::xavier(int n_users, int n_items, int d, int n_layers,
                                    std::uint64_t seed) {
  EncoderParams params;
  XavierStream stream(seed);
  params.user_embeddings = stream.next(n_users, d);
  params.item_embeddings = stream.next(n_items, d);
  params.layers.resize(n_layers);
  for (auto& layer : params.layers) {
    layer.w_query = stream.next(d, d);
    layer.w_key = stream.next(d, d);
    layer.w_value = stream.next(d, d);
    layer.w_self = stream.next(d, d);
  }
  params.trainable = EncoderMask::all(n_layers, true);
  return params;
}

EncoderLeaves make_encoder_leaves(GradTape& tape, const EncoderParams& params) {
  if (static_cast<int>(params.trainable.layers.size()) != params.n_layers()) {
    throw ContractError("trainable mask does not match layer count");
  }
  EncoderLeaves leaves;
  leaves.user_embeddings =
      tape.leaf(params.user_embeddings, params.trainable.user_embeddings);
  leaves.item_embeddings =
      tape.leaf(params.item_embeddings, params.trainable.item_embeddings);
  for (int l = 0; l < params.n_layers(); ++l) {
    const auto& mask = params.trainable.layers[l];
    leaves.layers.push_back({
        tape.leaf(params.layers[l].w_query, mask[0]),
        tape.leaf(params.layers[l].w_key, mask[1]),
        tape.leaf(params.layers[l].w_value, mask[2]),
        tape.leaf(params.layers[l].w_self, mask[3]),
    });
  }
  return leaves;
}

PromptLeaves make_prompt_leaves(GradTape& tape, const PromptSet& prompts,
                                bool trainable) {
  PromptLeaves leaves;
  leaves.hard_embeddings = tape.leaf(prompts.hard_embeddings, trainable);
  leaves.soft_embeddings = tape.leaf(prompts.soft_embeddings, trainable);
  leaves.p_value = tape.leaf(prompts.p_value, trainable);
  return leaves;
}

double prompt_lambda(const GraphView& view, const PromptSet& prompts, int user) {
  if (!prompts.user_has_prompts(user)) return 0.0;
  double real = 0.0;
  for (int item : view.item_neighbors(user)) {
    real += view.item_degree(item);
  }
  double prompt = 0.0;
  if (user < prompts.n_users()) {
    for (int item : prompts.hard[user]) {
      prompt += 1.0 + view.item_degree(item);
    }
  }
  prompt += prompts.soft_embeddings.rows();
  if (prompt == 0.0) return 0.0;
  return prompt / (real + prompt);
}

namespace {

// Rows of the global prompt feature matrix used by one user: hard prompt
// rows first, then the shared soft pool.
std::vector<int> prompt_feature_rows(const PromptSet& prompts, int user) {
  std::vector<int> rows;
  if (user < prompts.n_users()) {
    for (int item : prompts.hard[user]) rows.push_back(prompts.hard_row.at(item));
  }
  const int n_hard = static_cast<int>(prompts.hard_item_ids.size());
  for (int s = 0; s < prompts.soft_embeddings.rows(); ++s) rows.push_back(n_hard + s);
  return rows;
}

struct PromptProjection {
  ValueId features;  // (n_hard + m_soft) x d, static across layers
  ValueId values;    // features projected through p_value, static across layers
};

// One propagation layer recorded on the tape. Attention weights follow the
// query/key form on every edge; prompt aggregates reuse the same attention
// with the prompt value projection, and the two are mixed by lambda.
ValueId propagate_layer_on_tape(GradTape& tape, const GraphView& view, ValueId reps,
                                const EncoderLeaves::LayerIds& layer,
                                const PromptSet* prompt_set,
                                const PromptProjection* prompt_proj) {
  const int n_users = view.n_users();
  const int n_nodes = n_users + view.n_items();
  const ValueId queries = tape.matmul(reps, layer.w_query, false, true);
  const ValueId keys = tape.matmul(reps, layer.w_key, false, true);
  const ValueId values = tape.matmul(reps, layer.w_value, false, true);
  const ValueId self_terms = tape.matmul(reps, layer.w_self, false, true);

  ValueId prompt_keys{};
  if (prompt_proj != nullptr && prompt_set->has_prompt_nodes()) {
    prompt_keys = tape.matmul(prompt_proj->features, layer.w_key, false, true);
  }

  std::vector<ValueId> out_rows;
  out_rows.reserve(n_nodes);
  for (int node = 0; node < n_nodes; ++node) {
    const bool is_user = node < n_users;
    std::vector<int> neighbor_rows;
    if (is_user) {
      for (int item : view.item_neighbors(node)) neighbor_rows.push_back(n_users + item);
    } else {
      neighbor_rows = view.user_neighbors(node - n_users);
    }

    const ValueId self = tape.gather_rows(self_terms, {node});
    ValueId real_agg{};
    if (!neighbor_rows.empty()) {
      const ValueId q = tape.gather_rows(queries, {node});
      const ValueId logits =
          tape.matmul(q, tape.gather_rows(keys, neighbor_rows), false, true);
      const ValueId weights = tape.row_softmax(logits);
      real_agg = tape.matmul(weights, tape.gather_rows(values, neighbor_rows));
    }

    ValueId mixed = real_agg;
    if (is_user && prompt_proj != nullptr && prompt_set->user_has_prompts(node)) {
      const auto rows = prompt_feature_rows(*prompt_set, node);
      const ValueId q = tape.gather_rows(queries, {node});
      const ValueId logits =
          tape.matmul(q, tape.gather_rows(prompt_keys, rows), false, true);
      const ValueId weights = tape.row_softmax(logits);
      const ValueId prompt_agg =
          tape.matmul(weights, tape.gather_rows(prompt_proj->values, rows));
      const double lambda = prompt_lambda(view, *prompt_set, node);
      if (real_agg.valid()) {
        mixed = tape.add(tape.scale(real_agg, 1.0 - lambda),
                         tape.scale(prompt_agg, lambda));
      } else {
        mixed = tape.scale(prompt_agg, lambda);
      }
    }
    out_rows.push_back(mixed.valid() ? tape.add(self, mixed) : self);
  }
  return tape.concat_rows(out_rows);
}

}  // namespace

EncodeOutput encode_on_tape(GradTape& tape, const GraphView& view,
                            const EncoderLeaves& leaves, const PromptSet* prompt_set,
                            const PromptLeaves* prompt_leaves) {
  EncodeOutput out;
  out.layer_reps.push_back(tape.concat_rows(
      std::vector<ValueId>{leaves.user_embeddings, leaves.item_embeddings}));

  PromptProjection proj;
  const bool with_prompts = prompt_set != nullptr && prompt_leaves != nullptr &&
                            prompt_set->has_prompt_nodes();
  if (with_prompts) {
    proj.features = tape.concat_rows(std::vector<ValueId>{
        prompt_leaves->hard_embeddings, prompt_leaves->soft_embeddings});
    proj.values = tape.matmul(proj.features, prompt_leaves->p_value, false, true);
  }

  for (const auto& layer : leaves.layers) {
    out.layer_reps.push_back(propagate_layer_on_tape(
        tape, view, out.layer_reps.back(), layer,
        with_prompts ? prompt_set : nullptr, with_prompts ? &proj : nullptr));
  }

  ValueId acc = out.layer_reps.front();
  for (std::size_t l = 1; l < out.layer_reps.size(); ++l) {
    acc = tape.add(acc, out.layer_reps[l]);
  }
  out.final_reps = tape.scale(acc, 1.0 / static_cast<double>(out.layer_reps.size()));
  return out;
}

Tensor NodeReps::user_reps(int n_users) const {
  Tensor out(n_users, final_reps.cols());
  for (int u = 0; u < n_users; ++u) {
    std::copy(final_reps.row(u).begin(), final_reps.row(u).end(), out.row(u).begin());
  }
  return out;
}

Tensor NodeReps::item_reps(int n_users) const {
  const int n_items = final_reps.rows() - n_users;
  Tensor out(n_items, final_reps.cols());
  for (int i = 0; i < n_items; ++i) {
    std::copy(final_reps.row(n_users + i).begin(), final_reps.row(n_users + i).end(),
              out.row(i).begin());
  }
  return out;
}

namespace {

NodeReps run_encode(const GraphView& view, const EncoderParams& params,
                    const PromptSet* prompts) {
  GradTape tape;
  EncoderParams frozen = params;
  frozen.trainable = EncoderMask::all(params.n_layers(), false);
  const EncoderLeaves leaves = make_encoder_leaves(tape, frozen);
  PromptLeaves prompt_leaves;
  if (prompts != nullptr) prompt_leaves = make_prompt_leaves(tape, *prompts, false);
  const EncodeOutput out =
      encode_on_tape(tape, view, leaves, prompts, prompts ? &prompt_leaves : nullptr);
  NodeReps reps;
  for (ValueId id : out.layer_reps) reps.layers.push_back(tape.value(id));
  reps.final_reps = tape.value(out.final_reps);
  return reps;
}

}  // namespace

NodeReps encode(const GraphView& view, const EncoderParams& params) {
  return run_encode(view, params, nullptr);
}

NodeReps encode_with_prompts(const GraphView& view, const EncoderParams& params,
                             const PromptSet& prompts) {
  return run_encode(view, params, &prompts);
}

Tensor attention_weights(const Tensor& h_i, const Tensor& neighbor_feats,
                         const Tensor& w_query, const Tensor& w_key) {
  if (neighbor_feats.rows() < 1) {
    throw ContractError("attention over an empty neighborhood");
  }
  const Tensor q = matmul(h_i, w_query, false, true);
  const Tensor keys = matmul(neighbor_feats, w_key, false, true);
  return row_softmax(matmul(q, keys, false, true));
}

namespace {

Tensor propagate_eager(const GraphView& view, const Tensor& reps,
                       const EncoderParams& params, int layer_idx,
                       const PromptSet* prompts) {
  if (layer_idx < 0 || layer_idx >= params.n_layers()) {
    throw ContractError("layer index out of range");
  }
  if (reps.rows() != view.n_users() + view.n_items() || reps.cols() != params.dim()) {
    throw ShapeError("representation shape does not match graph and dimension");
  }
  GradTape tape;
  const ValueId h = tape.constant(reps);
  EncoderLeaves::LayerIds layer{
      tape.constant(params.layers[layer_idx].w_query),
      tape.constant(params.layers[layer_idx].w_key),
      tape.constant(params.layers[layer_idx].w_value),
      tape.constant(params.layers[layer_idx].w_self),
  };
  PromptProjection proj;
  const bool with_prompts = prompts != nullptr && prompts->has_prompt_nodes();
  if (with_prompts) {
    const ValueId hard = tape.constant(prompts->hard_embeddings);
    const ValueId soft = tape.constant(prompts->soft_embeddings);
    proj.features = tape.concat_rows(std::vector<ValueId>{hard, soft});
    proj.values = tape.matmul(proj.features, tape.constant(prompts->p_value), false, true);
  }
  const ValueId next = propagate_layer_on_tape(tape, view, h, layer,
                                               with_prompts ? prompts : nullptr,
                                               with_prompts ? &proj : nullptr);
  return tape.value(next);
}

}  // namespace

Tensor propagate_layer(const GraphView& view, const Tensor& reps,
                       const EncoderParams& params, int layer_idx) {
  return propagate_eager(view, reps, params, layer_idx, nullptr);
}

Tensor propagate_with_prompts(const GraphView& view, const Tensor& reps,
                              const PromptSet& prompts, const EncoderParams& params,
                              int layer_idx) {
  return propagate_eager(view, reps, params, layer_idx, &prompts);
}

double prefix_attention_check(const Tensor& q, const Tensor& k, const Tensor& v,
                              const Tensor& p_k, const Tensor& p_v) {
  if (k.rows() != v.rows() || p_k.rows() != p_v.rows()) {
    throw ShapeError("key/value row counts must match");
  }
  if (k.rows() + p_k.rows() == 0) {
    throw ShapeError("prefix attention needs at least one key");
  }
  if ((k.rows() > 0 && k.cols() != q.cols()) ||
      (p_k.rows() > 0 && p_k.cols() != q.cols())) {
    throw ShapeError("key width must match query width");
  }
  if (k.rows() > 0 && p_v.rows() > 0 && v.cols() != p_v.cols()) {
    throw ShapeError("value widths must match");
  }

  const std::vector<const Tensor*> key_parts = {&p_k, &k};
  const std::vector<const Tensor*> value_parts = {&p_v, &v};
  const Tensor all_keys = concat_rows(key_parts);
  const Tensor all_values = concat_rows(value_parts);
  const Tensor lhs = matmul(row_softmax(matmul(q, all_keys, false, true)), all_values);

  double residual = 0.0;
  for (int r = 0; r < q.rows(); ++r) {
    const Tensor q_r = gather_rows(q, std::vector<int>{r});
    // Stable lambda: shared max over both logit groups.
    const Tensor logits_all = matmul(q_r, all_keys, false, true);
    double mx = logits_all.at(0, 0);
    for (int c = 1; c < logits_all.cols(); ++c) mx = std::max(mx, logits_all.at(0, c));
    double z_prefix = 0.0, z_keys = 0.0;
    for (int c = 0; c < p_k.rows(); ++c) z_prefix += std::exp(logits_all.at(0, c) - mx);
    for (int c = p_k.rows(); c < logits_all.cols(); ++c) {
      z_keys += std::exp(logits_all.at(0, c) - mx);
    }
    const double lambda = z_prefix / (z_prefix + z_keys);

    Tensor rhs(1, all_values.cols());
    if (k.rows() > 0) {
      const Tensor attn_k = matmul(row_softmax(matmul(q_r, k, false, true)), v);
      rhs = add(rhs, scale(attn_k, 1.0 - lambda));
    }
    if (p_k.rows() > 0) {
      const Tensor attn_p = matmul(row_softmax(matmul(q_r, p_k, false, true)), p_v);
      rhs = add(rhs, scale(attn_p, lambda));
    }
    const Tensor lhs_r = gather_rows(lhs, std::vector<int>{r});
    residual = std::max(residual, max_abs_diff(lhs_r, rhs));
  }
  return residual;
}

}  // namespace pgprec
