#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pgprec/checkpoint.hpp"
#include "pgprec/dataset.hpp"
#include "pgprec/epoch_log.hpp"
#include "pgprec/graph.hpp"
#include "pgprec/prompts.hpp"

namespace pgprec {

// Hyper-parameters. The tuned ones are validated against their search grids:
// lr in {1e-2, 1e-3, 1e-4}; lambda1, lambda2 and tau on the 0.1-step grid up
// to 1.0 (tau strictly positive); rho on the 0.1-step grid up to 0.9.
struct TrainConfig {
  std::uint64_t seed = 1;
  int d = 64;
  int n_layers = 3;
  double lr = 1e-3;
  double lambda1 = 0.1;
  double lambda2 = 0.0;
  double tau = 0.2;
  double rho = 0.1;
  int batch = 1024;
  int patience = 50;
  int max_epochs = 500;
  int m_hard = 5;
  int m_soft = 3;
  TuneScope scope = TuneScope::kPromptsOnly;
  enum class Monitor { kValRecall, kTrainLoss } monitor = Monitor::kValRecall;
  int k = 10;
  int cold_threshold = 5;

  void validate() const;  // throws ConfigError
};

struct BatchTriplets {
  std::vector<std::array<int, 3>> triples;  // (user, positive item, negative item)
};

// Uniform user, uniform positive from the user's training items, uniform
// negative from the items the user never interacted with. Users without a
// positive or without any candidate negative are skipped (with a warning for
// the latter).
BatchTriplets sample_triplets(const InteractionGraph& graph, int batch_size,
                              std::uint64_t seed);

struct StopDecision {
  bool stop = false;
  int best_epoch = 0;  // 1-based index into the history, ties to the earliest
};

// History holds one monitored value per epoch (higher is better). Stops once
// `patience` consecutive epochs fail to improve on the best seen.
StopDecision early_stop(const std::vector<double>& history, int patience);

struct PretrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> logs;
};

// Contrastive pre-training on the source training graph: per epoch, two
// edge-dropout views are encoded and the user+item InfoNCE loss is stepped
// once with Adam. Returns the best snapshot under the monitored metric
// (epoch 0 = the Xavier initial state participates).
PretrainResult pretrain(const InteractionGraph& train_graph, const SplitSet& split,
                        const TrainConfig& config);

struct TuneResult {
  Checkpoint model;  // includes the prompt section in prompt mode
  std::vector<EpochLog> logs;
  TunedParamReport report;
};

// Target-domain adaptation with the pre-trained encoder frozen: fresh target
// item embeddings (trainable only when the scope extends), personalised
// prompts built once at start, then joint BPR + contrastive epochs stepping
// only the prompt tensors.
TuneResult prompt_tune(const InteractionGraph& target_train, const SplitSet& split,
                       const Checkpoint& pretrained, const RelationIndex& relations,
                       const TrainConfig& config);

// Same loop with every parameter trainable and no prompts; the comparison
// point for parameter and timing efficiency.
TuneResult fine_tune_baseline(const InteractionGraph& target_train,
                              const SplitSet& split, const Checkpoint& pretrained,
                              const TrainConfig& config);

// Mean Recall@k over users with at least one relevant pair, ranking all
// items except the per-user exclusions. Used for per-epoch validation.
double mean_recall_for_reps(const Tensor& final_reps, int n_users, int n_items,
                            const std::vector<std::pair<int, int>>& exclusions,
                            const std::vector<std::pair<int, int>>& relevant, int k);

}  // namespace pgprec
