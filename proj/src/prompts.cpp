#include "pgprec/prompts.hpp"

#include <algorithm>
#include <set>

#include "pgprec/errors.hpp"
#include "pgprec/optim.hpp"
#include "pgprec/rng.hpp"

namespace pgprec {

RelationIndex index_relations(const RelationTable& relations, const DomainPair& pair) {
  RelationIndex index;
  index.related.resize(pair.n_target_items());
  for (const auto& [item_key, entry] : relations.entries) {
    const auto it = pair.target_item_id.find(item_key);
    if (it == pair.target_item_id.end()) continue;
    std::set<int> related;
    const auto add_all = [&](const std::set<std::string>& keys) {
      for (const auto& key : keys) {
        const auto rit = pair.target_item_id.find(key);
        if (rit != pair.target_item_id.end() && rit->second != it->second) {
          related.insert(rit->second);
        }
      }
    };
    add_all(entry.also_bought);
    add_all(entry.also_viewed);
    add_all(entry.bought_together);
    index.related[it->second].assign(related.begin(), related.end());
  }
  return index;
}

std::vector<int> candidate_pool(const std::vector<int>& interacted_items,
                                const RelationIndex& relations) {
  std::set<int> pool;
  for (int item : interacted_items) {
    if (item < 0 || item >= static_cast<int>(relations.related.size())) continue;
    pool.insert(relations.related[item].begin(), relations.related[item].end());
  }
  for (int item : interacted_items) pool.erase(item);
  return {pool.begin(), pool.end()};
}

std::vector<double> correlation_scores(const Tensor& item_reps,
                                       const std::vector<int>& user_items,
                                       const std::vector<int>& candidates,
                                       CorrelationAggregate aggregate) {
  if (user_items.empty()) {
    throw ContractError("correlation scores need at least one interacted item");
  }
  std::vector<double> scores(candidates.size(), 0.0);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto r = item_reps.row(candidates[c]);
    double best = 0.0;
    bool first = true;
    for (int j : user_items) {
      const auto ej = item_reps.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < r.size(); ++k) s += ej[k] * r[k];
      if (aggregate == CorrelationAggregate::kSum) {
        best = first ? s : best + s;
      } else {
        best = first ? s : std::max(best, s);
      }
      first = false;
    }
    scores[c] = best;
  }
  return scores;
}

std::vector<int> select_hard_prompts(const std::vector<double>& scores,
                                     const std::vector<int>& candidates, int m_hard) {
  if (scores.size() != candidates.size()) {
    throw ContractError("score/candidate count mismatch");
  }
  if (m_hard < 0) throw ConfigError("hard prompt count must be >= 0");
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a] < candidates[b];
  });
  const std::size_t take = std::min<std::size_t>(m_hard, order.size());
  std::vector<int> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(candidates[order[i]]);
  return out;
}

Tensor init_soft_prompts(int m_soft, int d, std::uint64_t seed) {
  if (m_soft < 0) throw ConfigError("soft prompt count must be >= 0");
  if (m_soft == 0) return Tensor(0, d);
  return xavier_init(m_soft, d, seed);
}

PromptSet build_prompt_set(const Tensor& item_reps,
                           const std::vector<std::vector<int>>& user_train_items,
                           const RelationIndex& relations,
                           const Tensor& base_item_embeddings, int m_hard, int m_soft,
                           std::uint64_t seed) {
  PromptSet prompts;
  prompts.hard.resize(user_train_items.size());
  std::set<int> distinct;
  for (std::size_t u = 0; u < user_train_items.size(); ++u) {
    const auto& interacted = user_train_items[u];
    if (interacted.empty() || m_hard == 0) continue;
    const auto pool = candidate_pool(interacted, relations);
    if (pool.empty()) continue;
    const auto scores = correlation_scores(item_reps, interacted, pool);
    prompts.hard[u] = select_hard_prompts(scores, pool, m_hard);
    distinct.insert(prompts.hard[u].begin(), prompts.hard[u].end());
  }
  prompts.hard_item_ids.assign(distinct.begin(), distinct.end());
  for (std::size_t r = 0; r < prompts.hard_item_ids.size(); ++r) {
    prompts.hard_row.emplace(prompts.hard_item_ids[r], static_cast<int>(r));
  }

  const int d = base_item_embeddings.cols();
  prompts.hard_embeddings = Tensor(static_cast<int>(prompts.hard_item_ids.size()), d);
  for (std::size_t r = 0; r < prompts.hard_item_ids.size(); ++r) {
    const auto src = base_item_embeddings.row(prompts.hard_item_ids[r]);
    std::copy(src.begin(), src.end(), prompts.hard_embeddings.row(static_cast<int>(r)).begin());
  }
  prompts.soft_embeddings = init_soft_prompts(m_soft, d, derive_seed(seed, 0));
  prompts.p_value = xavier_init(d, d, derive_seed(seed, 1));
  return prompts;
}

TunedParamReport count_tuned_params(const PromptSet& prompts, TuneScope scope,
                                    const ModelDims& dims) {
  TunedParamReport report;
  report.hard_embeddings =
      static_cast<long long>(prompts.hard_embeddings.rows()) * dims.d;
  report.soft_embeddings =
      static_cast<long long>(prompts.soft_embeddings.rows()) * dims.d;
  report.p_value = static_cast<long long>(dims.d) * dims.d;
  if (scope == TuneScope::kPromptsPlusTargetItems) {
    report.target_item_embeddings =
        static_cast<long long>(dims.n_target_items) * dims.d;
  }
  report.total_tuned = report.hard_embeddings + report.soft_embeddings +
                       report.p_value + report.target_item_embeddings;
  report.total_model =
      static_cast<long long>(dims.n_users + dims.n_target_items) * dims.d +
      4LL * dims.n_layers * dims.d * dims.d;
  report.ratio = report.total_model > 0
                     ? static_cast<double>(report.total_tuned) / report.total_model
                     : 0.0;
  return report;
}

}  // namespace pgprec
