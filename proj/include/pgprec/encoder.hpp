#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pgprec/graph.hpp"
#include "pgprec/prompts.hpp"
#include "pgprec/tape.hpp"
#include "pgprec/tensor.hpp"

namespace pgprec {

struct LayerWeights {
  Tensor w_query;  // d x d
  Tensor w_key;
  Tensor w_value;
  Tensor w_self;  // applied to the node's own features
};

// Per-tensor trainable flags, parallel to EncoderParams.
struct EncoderMask {
  bool user_embeddings = true;
  bool item_embeddings = true;
  std::vector<std::array<bool, 4>> layers;  // w_query, w_key, w_value, w_self

  static EncoderMask all(int n_layers, bool trainable);
};

// Attention-aggregating graph encoder parameters: base embedding tables plus
// per-layer projection matrices. The activation is the identity, so stacked
// layers stay in the LightGCN family while the attention weights carry the
// transferable structure.
struct EncoderParams {
  Tensor user_embeddings;  // n_users x d
  Tensor item_embeddings;  // n_items x d
  std::vector<LayerWeights> layers;
  EncoderMask trainable;

  int dim() const { return user_embeddings.cols(); }
  int n_layers() const { return static_cast<int>(layers.size()); }
  int n_users() const { return user_embeddings.rows(); }
  int n_items() const { return item_embeddings.rows(); }

  static EncoderParams xavier(int n_users, int n_items, int d, int n_layers,
                              std::uint64_t seed);
};

struct EncoderLeaves {
  ValueId user_embeddings;
  ValueId item_embeddings;
  struct LayerIds {
    ValueId w_query, w_key, w_value, w_self;
  };
  std::vector<LayerIds> layers;
};

EncoderLeaves make_encoder_leaves(GradTape& tape, const EncoderParams& params);

struct PromptLeaves {
  ValueId hard_embeddings;
  ValueId soft_embeddings;
  ValueId p_value;
};

PromptLeaves make_prompt_leaves(GradTape& tape, const PromptSet& prompts, bool trainable);

// All-node representations per layer; rows 0..n_users-1 are users, the rest
// items. final_reps is the arithmetic mean of h0..hL.
struct EncodeOutput {
  std::vector<ValueId> layer_reps;
  ValueId final_reps;
};

// Records the full multi-layer propagation on the tape. When `prompts` is
// non-null, user nodes mix their real-neighbor aggregate with a prompt
// aggregate weighted by the degree factor lambda, and item nodes update from
// adjacent users only.
EncodeOutput encode_on_tape(GradTape& tape, const GraphView& view,
                            const EncoderLeaves& leaves,
                            const PromptSet* prompt_set = nullptr,
                            const PromptLeaves* prompt_leaves = nullptr);

// Plain-value results of an encode (scratch tape underneath).
struct NodeReps {
  std::vector<Tensor> layers;
  Tensor final_reps;

  Tensor user_reps(int n_users) const;
  Tensor item_reps(int n_users) const;
};

NodeReps encode(const GraphView& view, const EncoderParams& params);
NodeReps encode_with_prompts(const GraphView& view, const EncoderParams& params,
                             const PromptSet& prompts);

// Single-layer operations, mirrored off the tape path for direct inspection.
Tensor attention_weights(const Tensor& h_i, const Tensor& neighbor_feats,
                         const Tensor& w_query, const Tensor& w_key);  // 1 x k
Tensor propagate_layer(const GraphView& view, const Tensor& reps,
                       const EncoderParams& params, int layer_idx);
Tensor propagate_with_prompts(const GraphView& view, const Tensor& reps,
                              const PromptSet& prompts, const EncoderParams& params,
                              int layer_idx);

// Degree-derived prompt weight for one user within a view: the summed
// first-hop degrees of prompt neighbors over those of all neighbors. Hard
// prompt nodes count their target-graph degree plus the prompt edge itself;
// soft prompt nodes count exactly that edge.
double prompt_lambda(const GraphView& view, const PromptSet& prompts, int user);

// Numerical check of the prefix-attention decomposition: attention over
// concatenated (P_K||K), (P_V||V) against the lambda-interpolated pair of
// plain attentions. Returns the max absolute elementwise difference across
// query rows.
double prefix_attention_check(const Tensor& q, const Tensor& k, const Tensor& v,
                              const Tensor& p_k, const Tensor& p_v);

}  // namespace pgprec
