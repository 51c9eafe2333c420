#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pgprec/dataset.hpp"
#include "pgprec/tensor.hpp"

namespace pgprec {

// Top-k ranking for one user: scores non-increasing, ties broken by
// ascending item id, excluded items never appear.
struct RankedList {
  int user = 0;
  std::vector<int> items;
  std::vector<double> scores;
};

// Core ranking over raw scores (index = item id).
RankedList rank_scores(int user, const std::vector<double>& scores,
                       const std::vector<int>& excluded_items, int k);

// score(u, i) = final user embedding . final item embedding.
RankedList rank_items(const Tensor& final_reps, int n_users, int n_items, int user,
                      int k, const std::vector<int>& excluded_items);

// |top-k intersect relevant| / |relevant|; relevant must be non-empty.
double recall_at_k(const RankedList& ranked, const std::set<int>& relevant);

// Binary-gain DCG discounted by log2(rank + 1), normalised by the ideal DCG
// for min(|relevant|, k) hits.
double ndcg_at_k(const RankedList& ranked, const std::set<int>& relevant);

struct EvalReport {
  struct Row {
    int user = 0;
    bool cold = false;
    double recall = 0.0;
    double ndcg = 0.0;
  };
  std::vector<Row> rows;  // users with >= 1 test item, ascending user id
  int k = 10;
  double mean_recall = 0.0;
  double mean_ndcg = 0.0;
  int cold_count = 0;
  double cold_recall = 0.0;
  double cold_ndcg = 0.0;
  int regular_count = 0;
  double regular_recall = 0.0;
  double regular_ndcg = 0.0;
};

// Full-ranking evaluation over every user with at least one test item.
// `exclusions` lists the per-user items removed from the candidate set
// (training and, for test-time evaluation, validation interactions).
// Per-user work is parallelised across PGPREC_THREADS workers; aggregation
// order is fixed, so results do not depend on the thread count.
EvalReport evaluate(const Tensor& final_reps, int n_users, int n_items,
                    const std::vector<std::pair<int, int>>& test,
                    const std::vector<std::pair<int, int>>& exclusions,
                    const ColdStartLabels& labels, int k = 10);

// CSV `user,group,recall<k>,ndcg<k>` plus a plain-text summary block.
void write_eval_csv(const std::filesystem::path& path, const EvalReport& report);
EvalReport read_eval_csv(const std::filesystem::path& path);
std::string format_eval_summary(const EvalReport& report);

}  // namespace pgprec
