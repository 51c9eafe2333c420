#include "pgprec/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>

#include "pgprec/encoder.hpp"
#include "pgprec/errors.hpp"
#include "pgprec/eval.hpp"
#include "pgprec/losses.hpp"
#include "pgprec/optim.hpp"
#include "pgprec/rng.hpp"

namespace pgprec {

namespace {

bool on_grid(double x, double lo, double hi) {
  if (x < lo - 1e-9 || x > hi + 1e-9) return false;
  const double steps = x / 0.1;
  return std::abs(steps - std::round(steps)) < 1e-6;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void TrainConfig::validate() const {
  const bool lr_ok = std::abs(lr - 1e-2) < 1e-12 || std::abs(lr - 1e-3) < 1e-12 ||
                     std::abs(lr - 1e-4) < 1e-12;
  if (!lr_ok) throw ConfigError("lr must be one of 1e-2, 1e-3, 1e-4");
  if (!on_grid(lambda1, 0.0, 1.0)) throw ConfigError("lambda1 must be on {0,0.1,...,1.0}");
  if (!on_grid(lambda2, 0.0, 1.0)) throw ConfigError("lambda2 must be on {0,0.1,...,1.0}");
  if (!(tau > 0.0) || !on_grid(tau, 0.0, 1.0)) {
    throw ConfigError("tau must be on {0.1,...,1.0}");
  }
  if (!on_grid(rho, 0.0, 0.9)) throw ConfigError("rho must be on {0,0.1,...,0.9}");
  if (d < 1) throw ConfigError("embedding dimension must be >= 1");
  if (n_layers < 0) throw ConfigError("layer count must be >= 0");
  if (batch < 1) throw ConfigError("batch size must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (max_epochs < 0) throw ConfigError("max epochs must be >= 0");
  if (m_hard < 0 || m_soft < 0) throw ConfigError("prompt counts must be >= 0");
  if (k < 1) throw ConfigError("ranking cutoff must be >= 1");
  if (cold_threshold < 0) throw ConfigError("cold-start threshold must be >= 0");
}

BatchTriplets sample_triplets(const InteractionGraph& graph, int batch_size,
                              std::uint64_t seed) {
  std::vector<int> eligible;
  bool warned = false;
  for (int u = 0; u < graph.n_users; ++u) {
    const int deg = graph.user_degree(u);
    if (deg == 0) continue;
    if (deg >= graph.n_items) {
      if (!warned) {
        std::cerr << "sample_triplets: skipping user " << u
                  << " with no negative candidates\n";
        warned = true;
      }
      continue;
    }
    eligible.push_back(u);
  }
  if (eligible.empty()) {
    throw ContractError("no users eligible for triplet sampling");
  }

  SplitRng rng(seed);
  BatchTriplets batch;
  batch.triples.reserve(batch_size);
  for (int b = 0; b < batch_size; ++b) {
    const int u = eligible[rng.next_index(eligible.size())];
    const auto& adj = graph.user_adj[u];
    const int i = adj[rng.next_index(adj.size())].first;
    int j = 0;
    while (true) {
      j = static_cast<int>(rng.next_index(graph.n_items));
      const auto it = std::lower_bound(
          adj.begin(), adj.end(), std::make_pair(j, -1),
          [](const auto& a, const auto& b) { return a.first < b.first; });
      if (it == adj.end() || it->first != j) break;
    }
    batch.triples.push_back({u, i, j});
  }
  return batch;
}

StopDecision early_stop(const std::vector<double>& history, int patience) {
  if (patience < 1) throw ConfigError("patience must be >= 1");
  StopDecision decision;
  if (history.empty()) return decision;
  std::size_t best = 0;
  for (std::size_t e = 1; e < history.size(); ++e) {
    if (history[e] > history[best]) best = e;
  }
  decision.best_epoch = static_cast<int>(best) + 1;
  decision.stop = history.size() - 1 - best >= static_cast<std::size_t>(patience);
  return decision;
}

double mean_recall_for_reps(const Tensor& final_reps, int n_users, int n_items,
                            const std::vector<std::pair<int, int>>& exclusions,
                            const std::vector<std::pair<int, int>>& relevant, int k) {
  std::vector<std::vector<int>> excluded(n_users), wanted(n_users);
  for (const auto& [u, i] : exclusions) excluded[u].push_back(i);
  for (const auto& [u, i] : relevant) wanted[u].push_back(i);

  double total = 0.0;
  int evaluated = 0;
  for (int u = 0; u < n_users; ++u) {
    if (wanted[u].empty()) continue;
    const RankedList ranked = rank_items(final_reps, n_users, n_items, u, k, excluded[u]);
    const std::set<int> rel(wanted[u].begin(), wanted[u].end());
    total += recall_at_k(ranked, rel);
    evaluated += 1;
  }
  if (evaluated == 0) return 0.0;
  return total / evaluated;
}

namespace {

std::vector<std::vector<int>> per_user_items(const std::vector<std::pair<int, int>>& pairs,
                                             int n_users) {
  std::vector<std::vector<int>> items(n_users);
  for (const auto& [u, i] : pairs) items[u].push_back(i);
  for (auto& v : items) std::sort(v.begin(), v.end());
  return items;
}

// Sorted unique user rows and (offset) item rows of a triplet batch.
void batch_node_rows(const BatchTriplets& batch, int n_users,
                     std::vector<int>& user_rows, std::vector<int>& item_rows) {
  std::set<int> users, items;
  for (const auto& t : batch.triples) {
    users.insert(t[0]);
    items.insert(t[1]);
  }
  user_rows.assign(users.begin(), users.end());
  item_rows.clear();
  item_rows.reserve(items.size());
  for (int i : items) item_rows.push_back(n_users + i);
}

struct MonitorState {
  std::vector<double> history;
  double best_value = -std::numeric_limits<double>::infinity();
  int best_epoch = 0;
};

double monitored_value(TrainConfig::Monitor monitor, double val_recall, double loss) {
  return monitor == TrainConfig::Monitor::kValRecall ? val_recall : -loss;
}

}  // namespace

PretrainResult pretrain(const InteractionGraph& train_graph, const SplitSet& split,
                        const TrainConfig& config) {
  config.validate();
  if (train_graph.edge_count() == 0) {
    throw DataError("pretraining requires a non-empty source graph");
  }

  EncoderParams params =
      EncoderParams::xavier(train_graph.n_users, train_graph.n_items, config.d,
                            config.n_layers, derive_seed(config.seed, seed_offset::kEncoderInit));
  std::vector<Tensor*> trainables = {&params.user_embeddings, &params.item_embeddings};
  for (auto& layer : params.layers) {
    trainables.push_back(&layer.w_query);
    trainables.push_back(&layer.w_key);
    trainables.push_back(&layer.w_value);
    trainables.push_back(&layer.w_self);
  }
  std::vector<const Tensor*> trainable_view(trainables.begin(), trainables.end());
  AdamState adam = AdamState::like(trainable_view);

  const GraphView full(train_graph);
  PretrainResult result;
  EncoderParams best = params;
  double best_recall = mean_recall_for_reps(encode(full, params).final_reps,
                                            train_graph.n_users, train_graph.n_items,
                                            split.train, split.valid, config.k);
  MonitorState monitor;
  monitor.best_value = monitored_value(config.monitor, best_recall,
                                       std::numeric_limits<double>::infinity());
  int best_epoch = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const SubGraph view1 = edge_dropout(
        train_graph, config.rho,
        derive_seed(config.seed, seed_offset::kPretrainLoop, epoch, 0));
    const SubGraph view2 = edge_dropout(
        train_graph, config.rho,
        derive_seed(config.seed, seed_offset::kPretrainLoop, epoch, 1));
    const BatchTriplets batch = sample_triplets(
        train_graph, std::min<int>(config.batch, static_cast<int>(train_graph.edge_count())),
        derive_seed(config.seed, seed_offset::kPretrainLoop, epoch, 2));
    std::vector<int> user_rows, item_rows;
    batch_node_rows(batch, train_graph.n_users, user_rows, item_rows);

    GradTape tape;
    const EncoderLeaves leaves = make_encoder_leaves(tape, params);
    const EncodeOutput enc_a = encode_on_tape(tape, GraphView(view1), leaves);
    const EncodeOutput enc_b = encode_on_tape(tape, GraphView(view2), leaves);
    const auto [cl_user, cl_item] = contrastive_loss_nodes(
        tape, enc_a.final_reps, enc_b.final_reps, user_rows, item_rows, config.tau);
    const ValueId total = tape.add(cl_user, cl_item);
    tape.backward(total);

    std::vector<ValueId> leaf_ids = {leaves.user_embeddings, leaves.item_embeddings};
    for (const auto& layer : leaves.layers) {
      leaf_ids.push_back(layer.w_query);
      leaf_ids.push_back(layer.w_key);
      leaf_ids.push_back(layer.w_value);
      leaf_ids.push_back(layer.w_self);
    }
    std::vector<Tensor> grads;
    grads.reserve(leaf_ids.size());
    for (ValueId id : leaf_ids) grads.push_back(tape.grad(id));
    std::vector<const Tensor*> grad_ptrs;
    for (const Tensor& g : grads) grad_ptrs.push_back(&g);
    adam_step(trainables, grad_ptrs, adam, config.lr);
    const double seconds = elapsed_seconds(start);

    if (!tape.value(total).all_finite()) {
      throw NumericError("pretraining loss diverged at epoch " + std::to_string(epoch));
    }

    EpochLog log;
    log.epoch = epoch;
    log.loss.cl_user = tape.value(cl_user).at(0, 0);
    log.loss.cl_item = tape.value(cl_item).at(0, 0);
    log.loss.total = tape.value(total).at(0, 0);
    log.val_recall = mean_recall_for_reps(encode(full, params).final_reps,
                                          train_graph.n_users, train_graph.n_items,
                                          split.train, split.valid, config.k);
    log.seconds = seconds;
    result.logs.push_back(log);

    const double value = monitored_value(config.monitor, log.val_recall, log.loss.total);
    monitor.history.push_back(value);
    if (value > monitor.best_value) {
      monitor.best_value = value;
      best = params;
      best_recall = log.val_recall;
      best_epoch = epoch;
    }
    if (early_stop(monitor.history, config.patience).stop) break;
  }

  result.checkpoint.params = std::move(best);
  result.checkpoint.seed = config.seed;
  result.checkpoint.epoch = static_cast<std::uint32_t>(best_epoch);
  result.checkpoint.best_metric = best_recall;
  return result;
}

namespace {

struct TuneMode {
  bool with_prompts = false;
  std::uint64_t loop_offset = seed_offset::kTuneLoop;
};

TuneResult run_tuning(const InteractionGraph& target_train, const SplitSet& split,
                      const Checkpoint& pretrained, const RelationIndex* relations,
                      const TrainConfig& config, const TuneMode& mode) {
  config.validate();
  if (pretrained.params.dim() != config.d ||
      pretrained.params.n_layers() != config.n_layers) {
    throw CheckpointError("checkpoint dimensions do not match the configuration");
  }
  if (pretrained.params.n_users() != target_train.n_users) {
    throw CheckpointError("checkpoint user count does not match the target graph");
  }

  EncoderParams params;
  params.user_embeddings = pretrained.params.user_embeddings;
  params.layers = pretrained.params.layers;
  params.item_embeddings =
      xavier_init(target_train.n_items, config.d,
                  derive_seed(config.seed, seed_offset::kItemInit));
  const bool item_trainable =
      !mode.with_prompts || config.scope == TuneScope::kPromptsPlusTargetItems;
  params.trainable = EncoderMask::all(config.n_layers, !mode.with_prompts);
  params.trainable.user_embeddings = !mode.with_prompts;
  params.trainable.item_embeddings = item_trainable;

  const GraphView full(target_train);
  const auto user_items = per_user_items(split.train, target_train.n_users);

  PromptSet prompts;
  if (mode.with_prompts) {
    const NodeReps initial = encode(full, params);
    prompts = build_prompt_set(initial.item_reps(target_train.n_users), user_items,
                               *relations, params.item_embeddings, config.m_hard,
                               config.m_soft,
                               derive_seed(config.seed, seed_offset::kPromptInit));
  }

  std::vector<Tensor*> trainables;
  if (mode.with_prompts) {
    trainables = {&prompts.hard_embeddings, &prompts.soft_embeddings, &prompts.p_value};
    if (item_trainable) trainables.push_back(&params.item_embeddings);
  } else {
    trainables = {&params.user_embeddings, &params.item_embeddings};
    for (auto& layer : params.layers) {
      trainables.push_back(&layer.w_query);
      trainables.push_back(&layer.w_key);
      trainables.push_back(&layer.w_value);
      trainables.push_back(&layer.w_self);
    }
  }
  std::vector<const Tensor*> trainable_view(trainables.begin(), trainables.end());
  AdamState adam = AdamState::like(trainable_view);

  const auto encode_current = [&]() {
    return mode.with_prompts && prompts.has_prompt_nodes()
               ? encode_with_prompts(full, params, prompts)
               : encode(full, params);
  };

  TuneResult result;
  EncoderParams best_params = params;
  PromptSet best_prompts = prompts;
  double best_recall = mean_recall_for_reps(encode_current().final_reps,
                                            target_train.n_users, target_train.n_items,
                                            split.train, split.valid, config.k);
  MonitorState monitor;
  monitor.best_value = monitored_value(config.monitor, best_recall,
                                       std::numeric_limits<double>::infinity());
  int best_epoch = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const SubGraph view1 =
        edge_dropout(target_train, config.rho,
                     derive_seed(config.seed, mode.loop_offset, epoch, 0));
    const SubGraph view2 =
        edge_dropout(target_train, config.rho,
                     derive_seed(config.seed, mode.loop_offset, epoch, 1));
    const BatchTriplets batch = sample_triplets(
        target_train,
        std::min<int>(config.batch, static_cast<int>(target_train.edge_count())),
        derive_seed(config.seed, mode.loop_offset, epoch, 3));
    std::vector<int> user_rows, item_rows;
    batch_node_rows(batch, target_train.n_users, user_rows, item_rows);

    GradTape tape;
    const EncoderLeaves leaves = make_encoder_leaves(tape, params);
    PromptLeaves prompt_leaves;
    const PromptSet* prompt_set = nullptr;
    const PromptLeaves* prompt_leaf_ptr = nullptr;
    if (mode.with_prompts) {
      prompt_leaves = make_prompt_leaves(tape, prompts, true);
      prompt_set = &prompts;
      prompt_leaf_ptr = &prompt_leaves;
    }

    const EncodeOutput main_enc =
        encode_on_tape(tape, full, leaves, prompt_set, prompt_leaf_ptr);
    std::vector<ValueId> triple_losses;
    triple_losses.reserve(batch.triples.size());
    for (const auto& t : batch.triples) {
      const ValueId e_u = tape.gather_rows(main_enc.final_reps, {t[0]});
      const ValueId e_i =
          tape.gather_rows(main_enc.final_reps, {target_train.n_users + t[1]});
      const ValueId e_j =
          tape.gather_rows(main_enc.final_reps, {target_train.n_users + t[2]});
      triple_losses.push_back(bpr_loss_node(tape, e_u, e_i, e_j));
    }
    const ValueId rec =
        tape.scale(tape.sum(tape.concat_rows(triple_losses)),
                   1.0 / static_cast<double>(batch.triples.size()));

    const EncodeOutput enc_a =
        encode_on_tape(tape, GraphView(view1), leaves, prompt_set, prompt_leaf_ptr);
    const EncodeOutput enc_b =
        encode_on_tape(tape, GraphView(view2), leaves, prompt_set, prompt_leaf_ptr);
    const auto [cl_user, cl_item] = contrastive_loss_nodes(
        tape, enc_a.final_reps, enc_b.final_reps, user_rows, item_rows, config.tau);

    std::vector<ValueId> trainable_leaf_ids;
    if (mode.with_prompts) {
      trainable_leaf_ids = {prompt_leaves.hard_embeddings, prompt_leaves.soft_embeddings,
                            prompt_leaves.p_value};
      if (item_trainable) trainable_leaf_ids.push_back(leaves.item_embeddings);
    } else {
      trainable_leaf_ids = {leaves.user_embeddings, leaves.item_embeddings};
      for (const auto& layer : leaves.layers) {
        trainable_leaf_ids.push_back(layer.w_query);
        trainable_leaf_ids.push_back(layer.w_key);
        trainable_leaf_ids.push_back(layer.w_value);
        trainable_leaf_ids.push_back(layer.w_self);
      }
    }
    const ValueId l2 = l2_norm_node(tape, trainable_leaf_ids);
    const ValueId total = joint_loss_node(tape, rec, cl_user, cl_item, l2,
                                          config.lambda1, config.lambda2);
    tape.backward(total);

    std::vector<Tensor> grads;
    grads.reserve(trainable_leaf_ids.size());
    for (ValueId id : trainable_leaf_ids) grads.push_back(tape.grad(id));
    std::vector<const Tensor*> grad_ptrs;
    for (const Tensor& g : grads) grad_ptrs.push_back(&g);
    adam_step(trainables, grad_ptrs, adam, config.lr);
    const double seconds = elapsed_seconds(start);

    if (!tape.value(total).all_finite()) {
      throw NumericError("tuning loss diverged at epoch " + std::to_string(epoch));
    }

    EpochLog log;
    log.epoch = epoch;
    log.loss.rec = tape.value(rec).at(0, 0);
    log.loss.cl_user = tape.value(cl_user).at(0, 0);
    log.loss.cl_item = tape.value(cl_item).at(0, 0);
    log.loss.l2 = tape.value(l2).at(0, 0);
    log.loss.lambda1 = config.lambda1;
    log.loss.lambda2 = config.lambda2;
    log.loss.total = tape.value(total).at(0, 0);
    log.val_recall = mean_recall_for_reps(encode_current().final_reps,
                                          target_train.n_users, target_train.n_items,
                                          split.train, split.valid, config.k);
    log.seconds = seconds;
    result.logs.push_back(log);

    const double value = monitored_value(config.monitor, log.val_recall, log.loss.total);
    monitor.history.push_back(value);
    if (value > monitor.best_value) {
      monitor.best_value = value;
      best_params = params;
      best_prompts = prompts;
      best_recall = log.val_recall;
      best_epoch = epoch;
    }
    if (early_stop(monitor.history, config.patience).stop) break;
  }

  result.model.params = std::move(best_params);
  result.model.params.trainable = EncoderMask::all(config.n_layers, !mode.with_prompts);
  if (mode.with_prompts) {
    result.model.params.trainable.item_embeddings = item_trainable;
    result.model.prompts = std::move(best_prompts);
  }
  result.model.seed = config.seed;
  result.model.epoch = static_cast<std::uint32_t>(best_epoch);
  result.model.best_metric = best_recall;

  const ModelDims dims{target_train.n_users, target_train.n_items, config.d,
                       config.n_layers};
  if (mode.with_prompts) {
    result.report = count_tuned_params(*result.model.prompts, config.scope, dims);
  } else {
    result.report.total_model =
        static_cast<long long>(dims.n_users + dims.n_target_items) * dims.d +
        4LL * dims.n_layers * dims.d * dims.d;
    result.report.total_tuned = result.report.total_model;
    result.report.ratio = 1.0;
  }
  return result;
}

}  // namespace

TuneResult prompt_tune(const InteractionGraph& target_train, const SplitSet& split,
                       const Checkpoint& pretrained, const RelationIndex& relations,
                       const TrainConfig& config) {
  TuneMode mode;
  mode.with_prompts = true;
  mode.loop_offset = seed_offset::kTuneLoop;
  return run_tuning(target_train, split, pretrained, &relations, config, mode);
}

TuneResult fine_tune_baseline(const InteractionGraph& target_train,
                              const SplitSet& split, const Checkpoint& pretrained,
                              const TrainConfig& config) {
  TuneMode mode;
  mode.with_prompts = false;
  mode.loop_offset = seed_offset::kFinetuneLoop;
  return run_tuning(target_train, split, pretrained, nullptr, config, mode);
}

}  // namespace pgprec
