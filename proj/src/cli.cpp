#include "pgprec/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgprec/encoder.hpp"
#include "pgprec/errors.hpp"
#include "pgprec/eval.hpp"
#include "pgprec/rng.hpp"
#include "pgprec/stats.hpp"

namespace pgprec {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

RunOptions RunOptions::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  RunOptions options;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected key=value");
    }
    options.values[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
  }
  return options;
}

std::string RunOptions::get(const std::string& key, const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double RunOptions::get_double(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number: " + it->second);
  }
}

long long RunOptions::get_int(const std::string& key, long long fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    return std::stoll(it->second);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an integer: " + it->second);
  }
}

TrainConfig RunOptions::train_config() const {
  TrainConfig config;
  config.seed = static_cast<std::uint64_t>(get_int("seed", 1));
  config.d = static_cast<int>(get_int("d", 64));
  config.n_layers = static_cast<int>(get_int("n_layers", 3));
  config.lr = get_double("lr", 1e-3);
  config.lambda1 = get_double("lambda1", 0.1);
  config.lambda2 = get_double("lambda2", 0.0);
  config.tau = get_double("tau", 0.2);
  config.rho = get_double("rho", 0.1);
  config.batch = static_cast<int>(get_int("batch", 1024));
  config.patience = static_cast<int>(get_int("patience", 50));
  config.max_epochs = static_cast<int>(get_int("max_epochs", 500));
  config.m_hard = static_cast<int>(get_int("m_hard", 5));
  config.m_soft = static_cast<int>(get_int("m_soft", 3));
  const std::string scope = get("tune_scope", "prompts_only");
  if (scope == "prompts_only") {
    config.scope = TuneScope::kPromptsOnly;
  } else if (scope == "prompts_plus_target_items") {
    config.scope = TuneScope::kPromptsPlusTargetItems;
  } else {
    throw ConfigError("unknown tune_scope: " + scope);
  }
  const std::string monitor = get("monitor", "recall");
  if (monitor == "recall") {
    config.monitor = TrainConfig::Monitor::kValRecall;
  } else if (monitor == "loss") {
    config.monitor = TrainConfig::Monitor::kTrainLoss;
  } else {
    throw ConfigError("unknown monitor: " + monitor);
  }
  config.k = static_cast<int>(get_int("k", 10));
  config.cold_threshold = static_cast<int>(get_int("cold_threshold", 5));
  config.validate();
  return config;
}

SyntheticConfig RunOptions::synth_config() const {
  SyntheticConfig config;
  config.n_users = static_cast<int>(get_int("synth_users", 200));
  config.n_source_items = static_cast<int>(get_int("synth_source_items", 500));
  config.n_target_items = static_cast<int>(get_int("synth_target_items", 500));
  config.latent_dim = static_cast<int>(get_int("synth_latent_dim", 8));
  config.density = get_double("synth_density", 0.02);
  config.seed = static_cast<std::uint64_t>(get_int("seed", 1));
  return config;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file for digest: " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buffer[1 << 16];
  while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buffer, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx, digest, &length);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

namespace {

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

class ManifestWriter {
 public:
  ManifestWriter(std::string command, const RunOptions& options)
      : command_(std::move(command)), options_(options) {
    manifest_["command"] = command_;
    manifest_["started_at"] = iso_now();
  }

  void input(const std::string& role, const std::filesystem::path& path) {
    manifest_["inputs"][role] = {{"path", path.string()},
                                 {"sha256", file_digest(path)}};
  }
  void output(const std::string& role, const std::filesystem::path& path) {
    manifest_["outputs"][role] = path.string();
  }

  void write(const std::filesystem::path& out_dir) {
    manifest_["finished_at"] = iso_now();
    manifest_["config"] = options_.values;
    std::ofstream out(out_dir / "manifest.json");
    if (!out) throw ConfigError("cannot write manifest in " + out_dir.string());
    out << manifest_.dump(2) << "\n";
  }

 private:
  std::string command_;
  const RunOptions& options_;
  nlohmann::json manifest_;
};

std::filesystem::path out_dir(const RunOptions& options) {
  const std::string dir = options.get("out", "");
  if (dir.empty()) throw ConfigError("an output directory is required (--out)");
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path required_path(const RunOptions& options, const std::string& key) {
  const std::string value = options.get(key, "");
  if (value.empty()) throw ConfigError("missing required option: --" + key);
  return value;
}

struct AlignedData {
  DomainPair pair;
  SplitSet source_split;
  SplitSet target_split;
};

AlignedData load_and_align(const RunOptions& options, std::uint64_t seed) {
  const auto source_path = required_path(options, "source");
  const auto target_path = required_path(options, "target");
  const InteractionTable source = binarize(load_interactions(source_path));
  const InteractionTable target = binarize(load_interactions(target_path));
  AlignedData data;
  data.pair = align_domains(source, target);
  data.source_split = split_holdout(data.pair.source_interactions,
                                    derive_seed(seed, seed_offset::kSourceSplit));
  data.target_split = split_holdout(data.pair.target_interactions,
                                    derive_seed(seed, seed_offset::kTargetSplit));
  return data;
}

void write_param_report(const std::filesystem::path& path, const TunedParamReport& report) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write parameter report: " + path.string());
  char buf[64];
  out << "group,count\n";
  out << "hard_embeddings," << report.hard_embeddings << "\n";
  out << "soft_embeddings," << report.soft_embeddings << "\n";
  out << "p_value," << report.p_value << "\n";
  out << "target_item_embeddings," << report.target_item_embeddings << "\n";
  out << "total_tuned," << report.total_tuned << "\n";
  out << "total_model," << report.total_model << "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", report.ratio);
  out << "ratio," << buf << "\n";
}

NodeReps encode_checkpoint(const Checkpoint& checkpoint, const InteractionGraph& graph) {
  const GraphView view(graph);
  if (checkpoint.prompts && checkpoint.prompts->has_prompt_nodes()) {
    return encode_with_prompts(view, checkpoint.params, *checkpoint.prompts);
  }
  return encode(view, checkpoint.params);
}

}  // namespace

int cmd_pretrain(const RunOptions& options) {
  const TrainConfig config = options.train_config();
  const auto dir = out_dir(options);
  ManifestWriter manifest("pretrain", options);
  manifest.input("source", required_path(options, "source"));
  manifest.input("target", required_path(options, "target"));

  const AlignedData data = load_and_align(options, config.seed);
  write_split_manifest(dir / "source_split.tsv", data.source_split);

  const InteractionGraph graph = build_graph(data.source_split.train,
                                             data.pair.n_users(),
                                             data.pair.n_source_items());
  PretrainResult result = pretrain(graph, data.source_split, config);
  save_checkpoint(dir / "pretrain.ckpt", result.checkpoint);
  write_epoch_csv(dir / "pretrain_epochs.csv", result.logs);

  manifest.output("checkpoint", dir / "pretrain.ckpt");
  manifest.output("epochs", dir / "pretrain_epochs.csv");
  manifest.output("source_split", dir / "source_split.tsv");
  manifest.write(dir);
  std::cout << "pretrain: best epoch " << result.checkpoint.epoch << ", validation recall@"
            << config.k << " = " << result.checkpoint.best_metric << "\n";
  return 0;
}

int cmd_tune(const RunOptions& options) {
  const TrainConfig config = options.train_config();
  const std::string mode = options.get("mode", "prompt");
  if (mode != "prompt" && mode != "finetune") {
    throw ConfigError("unknown tune mode: " + mode);
  }
  const auto dir = out_dir(options);
  ManifestWriter manifest("tune", options);
  manifest.input("source", required_path(options, "source"));
  manifest.input("target", required_path(options, "target"));
  manifest.input("checkpoint", required_path(options, "checkpoint"));

  const AlignedData data = load_and_align(options, config.seed);
  write_split_manifest(dir / "target_split.tsv", data.target_split);
  const InteractionGraph graph = build_graph(data.target_split.train,
                                             data.pair.n_users(),
                                             data.pair.n_target_items());
  const Checkpoint pretrained = load_checkpoint(required_path(options, "checkpoint"));

  TuneResult result;
  if (mode == "prompt") {
    const auto relations_path = required_path(options, "relations");
    manifest.input("relations", relations_path);
    const RelationTable relations = load_relations(relations_path);
    const RelationIndex index = index_relations(relations, data.pair);
    result = prompt_tune(graph, data.target_split, pretrained, index, config);
  } else {
    result = fine_tune_baseline(graph, data.target_split, pretrained, config);
  }

  save_checkpoint(dir / "model.ckpt", result.model);
  write_epoch_csv(dir / "tune_epochs.csv", result.logs);
  write_param_report(dir / "param_report.csv", result.report);

  manifest.output("model", dir / "model.ckpt");
  manifest.output("epochs", dir / "tune_epochs.csv");
  manifest.output("param_report", dir / "param_report.csv");
  manifest.output("target_split", dir / "target_split.tsv");
  manifest.write(dir);
  std::cout << "tune(" << mode << "): best epoch " << result.model.epoch
            << ", validation recall@" << config.k << " = " << result.model.best_metric
            << ", tuned/total = " << result.report.total_tuned << "/"
            << result.report.total_model << "\n";
  return 0;
}

namespace {

EvalReport evaluate_model(const Checkpoint& checkpoint, const SplitSet& split,
                          int cold_threshold, int k) {
  const int n_users = checkpoint.params.n_users();
  const int n_items = checkpoint.params.n_items();
  for (const auto* part : {&split.train, &split.valid, &split.test}) {
    for (const auto& [u, i] : *part) {
      if (u < 0 || u >= n_users || i < 0 || i >= n_items) {
        throw DataError("split manifest id out of checkpoint range");
      }
    }
  }
  const InteractionGraph graph = build_graph(split.train, n_users, n_items);
  const NodeReps reps = encode_checkpoint(checkpoint, graph);
  const ColdStartLabels labels = label_cold_start(split.train, n_users, cold_threshold);
  std::vector<std::pair<int, int>> exclusions = split.train;
  exclusions.insert(exclusions.end(), split.valid.begin(), split.valid.end());
  return evaluate(reps.final_reps, n_users, n_items, split.test, exclusions, labels, k);
}

void append_comparison_stats(std::vector<StatResult>& results, const std::string& metric,
                             const std::vector<double>& a, const std::vector<double>& b,
                             double margin) {
  StatResult t = paired_t_test(a, b);
  t.test = "paired_t_" + metric;
  StatResult tost = tost_equivalence(a, b, margin);
  tost.test = "tost_" + metric;
  results.push_back(t);
  results.push_back(tost);
}

void write_stats_csv(const std::filesystem::path& path,
                     const std::vector<StatResult>& results,
                     const std::string& comparison) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write stats: " + path.string());
  out << "comparison,test,stat,p_raw,p_adj,decision\n";
  char buf[64];
  for (const auto& r : results) {
    out << comparison << ',' << r.test << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.statistic);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.p_raw);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.p_adjusted);
    out << buf << ',' << (r.significant ? "significant" : "not_significant") << "\n";
  }
}

// Holm adjustment within each test family (paired-t vs TOST).
void adjust_families(std::vector<StatResult>& results) {
  for (const std::string& prefix : {std::string("paired_t"), std::string("tost")}) {
    std::vector<std::size_t> members;
    std::vector<double> raw;
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (results[i].test.rfind(prefix, 0) == 0) {
        members.push_back(i);
        raw.push_back(results[i].p_raw);
      }
    }
    if (raw.empty()) continue;
    const std::vector<double> adjusted = holm_bonferroni(raw);
    for (std::size_t k = 0; k < members.size(); ++k) {
      results[members[k]].p_adjusted = adjusted[k];
      results[members[k]].significant = adjusted[k] < 0.05;
    }
  }
}

}  // namespace

int cmd_eval(const RunOptions& options) {
  const auto dir = out_dir(options);
  const int k = static_cast<int>(options.get_int("k", 10));
  if (k < 1) throw ConfigError("k must be >= 1");
  const int cold_threshold = static_cast<int>(options.get_int("cold_threshold", 5));
  ManifestWriter manifest("eval", options);
  const auto model_path = required_path(options, "model");
  const auto split_path = required_path(options, "split");
  manifest.input("model", model_path);
  manifest.input("split", split_path);

  const Checkpoint model = load_checkpoint(model_path);
  const SplitSet split = read_split_manifest(split_path);
  const EvalReport report = evaluate_model(model, split, cold_threshold, k);
  write_eval_csv(dir / "eval_users.csv", report);
  manifest.output("eval_users", dir / "eval_users.csv");
  std::cout << format_eval_summary(report);

  if (options.has("model2")) {
    const auto model2_path = required_path(options, "model2");
    manifest.input("model2", model2_path);
    const Checkpoint other = load_checkpoint(model2_path);
    const EvalReport other_report = evaluate_model(other, split, cold_threshold, k);
    write_eval_csv(dir / "eval_users_2.csv", other_report);
    manifest.output("eval_users_2", dir / "eval_users_2.csv");

    if (other_report.rows.size() != report.rows.size()) {
      throw DataError("model comparisons need the same evaluated user set");
    }
    std::vector<double> recall_a, recall_b, ndcg_a, ndcg_b;
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      recall_a.push_back(report.rows[i].recall);
      recall_b.push_back(other_report.rows[i].recall);
      ndcg_a.push_back(report.rows[i].ndcg);
      ndcg_b.push_back(other_report.rows[i].ndcg);
    }
    const double margin = options.get_double("margin", 0.05);
    std::vector<StatResult> results;
    append_comparison_stats(results, "recall", recall_a, recall_b, margin);
    append_comparison_stats(results, "ndcg", ndcg_a, ndcg_b, margin);
    adjust_families(results);
    write_stats_csv(dir / "stats.csv", results, "model_vs_model2");
    manifest.output("stats", dir / "stats.csv");
    std::cout << "stats written for model vs model2 (" << report.rows.size()
              << " users)\n";
  }
  manifest.write(dir);
  return 0;
}

int cmd_synth(const RunOptions& options) {
  const SyntheticConfig config = options.synth_config();
  const auto dir = out_dir(options);
  ManifestWriter manifest("synth", options);
  const SyntheticPair pair = generate_synthetic_pair(config);
  write_interactions(dir / "source.tsv", pair.source);
  write_interactions(dir / "target.tsv", pair.target);
  write_relations(dir / "relations.tsv", pair.relations);
  manifest.output("source", dir / "source.tsv");
  manifest.output("target", dir / "target.tsv");
  manifest.output("relations", dir / "relations.tsv");
  manifest.write(dir);
  std::cout << "synth: " << pair.source.records.size() << " source and "
            << pair.target.records.size() << " target interactions\n";
  return 0;
}

int cmd_params(const RunOptions& options) {
  const auto dir = out_dir(options);
  ManifestWriter manifest("params", options);
  const auto model_path = required_path(options, "model");
  manifest.input("model", model_path);
  const Checkpoint model = load_checkpoint(model_path);

  const ModelDims dims{model.params.n_users(), model.params.n_items(),
                       model.params.dim(), model.params.n_layers()};
  TunedParamReport report;
  if (model.prompts) {
    const std::string scope = options.get("tune_scope", "prompts_only");
    const TuneScope tune_scope = scope == "prompts_plus_target_items"
                                     ? TuneScope::kPromptsPlusTargetItems
                                     : TuneScope::kPromptsOnly;
    report = count_tuned_params(*model.prompts, tune_scope, dims);
  } else {
    report.total_model = static_cast<long long>(dims.n_users + dims.n_target_items) * dims.d +
                         4LL * dims.n_layers * dims.d * dims.d;
    report.total_tuned = report.total_model;
    report.ratio = 1.0;
  }
  write_param_report(dir / "param_report.csv", report);
  manifest.output("param_report", dir / "param_report.csv");
  manifest.write(dir);
  std::cout << "params: tuned " << report.total_tuned << " of " << report.total_model
            << " (ratio " << report.ratio << ")\n";
  return 0;
}

int cmd_stats(const RunOptions& options) {
  const auto dir = out_dir(options);
  ManifestWriter manifest("stats", options);
  const auto a_path = required_path(options, "a");
  const auto b_path = required_path(options, "b");
  manifest.input("a", a_path);
  manifest.input("b", b_path);
  const EvalReport a = read_eval_csv(a_path);
  const EvalReport b = read_eval_csv(b_path);
  if (a.rows.size() != b.rows.size() || a.rows.empty()) {
    throw DataError("stats inputs must list the same evaluated users");
  }
  std::vector<double> recall_a, recall_b, ndcg_a, ndcg_b;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].user != b.rows[i].user) {
      throw DataError("stats inputs are not aligned by user");
    }
    recall_a.push_back(a.rows[i].recall);
    recall_b.push_back(b.rows[i].recall);
    ndcg_a.push_back(a.rows[i].ndcg);
    ndcg_b.push_back(b.rows[i].ndcg);
  }
  const double margin = options.get_double("margin", 0.05);
  std::vector<StatResult> results;
  append_comparison_stats(results, "recall", recall_a, recall_b, margin);
  append_comparison_stats(results, "ndcg", ndcg_a, ndcg_b, margin);
  adjust_families(results);
  write_stats_csv(dir / "stats.csv", results, "a_vs_b");
  manifest.output("stats", dir / "stats.csv");
  manifest.write(dir);
  for (const auto& r : results) {
    std::cout << r.test << ": stat=" << r.statistic << " p_raw=" << r.p_raw
              << " p_adj=" << r.p_adjusted << " "
              << (r.significant ? "significant" : "not_significant") << "\n";
  }
  return 0;
}

namespace {

int dispatch(const std::string& command, const RunOptions& options) {
  if (command == "pretrain") return cmd_pretrain(options);
  if (command == "tune") return cmd_tune(options);
  if (command == "eval") return cmd_eval(options);
  if (command == "synth") return cmd_synth(options);
  if (command == "params") return cmd_params(options);
  if (command == "stats") return cmd_stats(options);
  throw ConfigError("unknown command: " + command);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"graph prompt-tuning recommender"};
  app.require_subcommand(1);

  struct Flags {
    std::string config, out, source, target, relations, checkpoint, mode, model,
        model2, split, a, b;
    std::vector<std::string> sets;
    long long seed = -1;
    long long k = -1;
    double margin = -1.0;
  } flags;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "flat key=value config file");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "master seed");
    sub->add_option("--set", flags.sets, "override config entries (key=value)");
    return sub;
  };

  CLI::App* sub_pretrain = add_common(app.add_subcommand("pretrain", "contrastive pre-training"));
  sub_pretrain->add_option("--source", flags.source, "source interactions TSV");
  sub_pretrain->add_option("--target", flags.target, "target interactions TSV");

  CLI::App* sub_tune = add_common(app.add_subcommand("tune", "target-domain tuning"));
  sub_tune->add_option("--source", flags.source, "source interactions TSV");
  sub_tune->add_option("--target", flags.target, "target interactions TSV");
  sub_tune->add_option("--relations", flags.relations, "item relations TSV");
  sub_tune->add_option("--checkpoint", flags.checkpoint, "pre-trained checkpoint");
  sub_tune->add_option("--mode", flags.mode, "prompt or finetune");

  CLI::App* sub_eval = add_common(app.add_subcommand("eval", "top-k evaluation"));
  sub_eval->add_option("--model", flags.model, "model checkpoint");
  sub_eval->add_option("--model2", flags.model2, "second model for comparison");
  sub_eval->add_option("--split", flags.split, "split manifest TSV");
  sub_eval->add_option("--k", flags.k, "ranking cutoff");

  add_common(app.add_subcommand("synth", "generate a synthetic domain pair"));

  CLI::App* sub_params = add_common(app.add_subcommand("params", "tuned-parameter report"));
  sub_params->add_option("--model", flags.model, "model checkpoint");

  CLI::App* sub_stats = add_common(app.add_subcommand("stats", "paired significance tests"));
  sub_stats->add_option("--a", flags.a, "first eval_users.csv");
  sub_stats->add_option("--b", flags.b, "second eval_users.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunOptions options;
    if (!flags.config.empty()) options = RunOptions::from_file(flags.config);
    const auto maybe_set = [&](const char* key, const std::string& value) {
      if (!value.empty()) options.set(key, value);
    };
    maybe_set("out", flags.out);
    maybe_set("source", flags.source);
    maybe_set("target", flags.target);
    maybe_set("relations", flags.relations);
    maybe_set("checkpoint", flags.checkpoint);
    maybe_set("mode", flags.mode);
    maybe_set("model", flags.model);
    maybe_set("model2", flags.model2);
    maybe_set("split", flags.split);
    maybe_set("a", flags.a);
    maybe_set("b", flags.b);
    if (flags.seed >= 0) options.set("seed", std::to_string(flags.seed));
    if (flags.k >= 1) options.set("k", std::to_string(flags.k));
    if (flags.margin >= 0) options.set("margin", std::to_string(flags.margin));
    for (const std::string& entry : flags.sets) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("--set expects key=value, got: " + entry);
      }
      options.set(trim(entry.substr(0, eq)), trim(entry.substr(eq + 1)));
    }
    if (!flags.config.empty()) options.set("config_path", flags.config);
    return dispatch(app.get_subcommands().front()->get_name(), options);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 5;
  }
}

}  // namespace pgprec
