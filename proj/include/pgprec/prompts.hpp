#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "pgprec/dataset.hpp"
#include "pgprec/tensor.hpp"

namespace pgprec {

// Personalised graph prompts for the target domain. Hard prompts are
// neighbouring-item nodes selected per user; their embeddings are detached
// copies of the base item embeddings (shared across users that picked the
// same item) and trained independently of the frozen base table. Soft
// prompts are one global pool of trainable vectors attached to every user.
// p_value is the prompt value matrix applied in place of W_V on prompt
// features.
struct PromptSet {
  std::vector<std::vector<int>> hard;  // per user, ordered target item ids
  std::vector<int> hard_item_ids;      // distinct ids, ascending
  std::unordered_map<int, int> hard_row;
  Tensor hard_embeddings;  // |hard_item_ids| x d
  Tensor soft_embeddings;  // m_soft x d
  Tensor p_value;          // d x d

  int m_soft() const { return soft_embeddings.rows(); }
  int n_users() const { return static_cast<int>(hard.size()); }
  bool has_prompt_nodes() const {
    return !hard_item_ids.empty() || soft_embeddings.rows() > 0;
  }
  bool user_has_prompts(int user) const {
    return soft_embeddings.rows() > 0 ||
           (user < n_users() && !hard[user].empty());
  }
};

// Target-domain relation lookups in dense id space: the union of
// also_bought / also_viewed / bought_together per item, self excluded.
struct RelationIndex {
  std::vector<std::vector<int>> related;  // item id -> sorted related ids
};

RelationIndex index_relations(const RelationTable& relations, const DomainPair& pair);

// Union of the relations of the user's interacted items, minus the
// interacted items themselves. Sorted ascending; empty pools are legal.
std::vector<int> candidate_pool(const std::vector<int>& interacted_items,
                                const RelationIndex& relations);

enum class CorrelationAggregate { kMax, kSum };

// Model-based correlation of each candidate against the user's interacted
// items: dot products of current representations, aggregated with max by
// default.
std::vector<double> correlation_scores(const Tensor& item_reps,
                                       const std::vector<int>& user_items,
                                       const std::vector<int>& candidates,
                                       CorrelationAggregate aggregate = CorrelationAggregate::kMax);

// Top-m by descending score, ties by ascending item id; independent of
// candidate order.
std::vector<int> select_hard_prompts(const std::vector<double>& scores,
                                     const std::vector<int>& candidates, int m_hard);

// Xavier-initialised (m_soft x d); zero rows when m_soft = 0.
Tensor init_soft_prompts(int m_soft, int d, std::uint64_t seed);

// Runs hard selection for every user against current item representations,
// copies base embeddings into the hard prompt table, and initialises the
// soft pool and the prompt value matrix.
PromptSet build_prompt_set(const Tensor& item_reps,
                           const std::vector<std::vector<int>>& user_train_items,
                           const RelationIndex& relations,
                           const Tensor& base_item_embeddings, int m_hard, int m_soft,
                           std::uint64_t seed);

enum class TuneScope { kPromptsOnly, kPromptsPlusTargetItems };

struct ModelDims {
  int n_users = 0;
  int n_target_items = 0;
  int d = 0;
  int n_layers = 0;
};

struct TunedParamReport {
  long long hard_embeddings = 0;
  long long soft_embeddings = 0;
  long long p_value = 0;
  long long target_item_embeddings = 0;
  long long total_tuned = 0;
  long long total_model = 0;  // full fine-tune reference
  double ratio = 0.0;
};

// total_model = (n_users + n_target_items) * d + 4 * n_layers * d^2.
TunedParamReport count_tuned_params(const PromptSet& prompts, TuneScope scope,
                                    const ModelDims& dims);

}  // namespace pgprec
