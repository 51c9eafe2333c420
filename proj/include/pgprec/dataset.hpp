#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pgprec {

struct InteractionRecord {
  std::string user;
  std::string item;
  double rating = 0.0;
  std::optional<long long> timestamp;
};

struct InteractionTable {
  std::vector<InteractionRecord> records;
};

// Parses UTF-8 TSV lines `user<TAB>item<TAB>rating[<TAB>timestamp]`.
// Duplicate (user, item) pairs keep the position of the first occurrence and
// the value of the last. Blank lines and `#` comment lines are skipped.
InteractionTable load_interactions(const std::filesystem::path& path);

// Presence-only feedback: every rating becomes 1.
InteractionTable binarize(InteractionTable table);

struct RelationEntry {
  std::set<std::string> also_bought;
  std::set<std::string> also_viewed;
  std::set<std::string> bought_together;
};

struct RelationTable {
  std::map<std::string, RelationEntry> entries;
};

// Parses `item<TAB>relation<TAB>item` with relation in
// {also_bought, also_viewed, bought_together}. Self-relations are rejected.
RelationTable load_relations(const std::filesystem::path& path);

// Cross-domain alignment over the shared user set. Dense ids are assigned in
// lexicographic key order; interactions of non-shared users are dropped, and
// items left without interactions disappear from the index.
struct DomainPair {
  std::vector<std::string> shared_users;
  std::vector<std::string> source_items;
  std::vector<std::string> target_items;
  std::vector<std::pair<int, int>> source_interactions;  // (user_id, item_id)
  std::vector<std::pair<int, int>> target_interactions;
  std::unordered_map<std::string, int> user_id;
  std::unordered_map<std::string, int> source_item_id;
  std::unordered_map<std::string, int> target_item_id;

  int n_users() const { return static_cast<int>(shared_users.size()); }
  int n_source_items() const { return static_cast<int>(source_items.size()); }
  int n_target_items() const { return static_cast<int>(target_items.size()); }
};

DomainPair align_domains(const InteractionTable& source, const InteractionTable& target);

struct SplitSet {
  std::vector<std::pair<int, int>> train;
  std::vector<std::pair<int, int>> valid;
  std::vector<std::pair<int, int>> test;
  std::uint64_t seed = 0;
};

// Seeded shuffle, then an 8:1:1 partition: train and validation sizes are
// floored, the remainder goes to test. Requires at least 10 interactions.
SplitSet split_holdout(const std::vector<std::pair<int, int>>& interactions,
                       std::uint64_t seed);

struct ColdStartLabels {
  std::vector<bool> cold;  // indexed by user id
  int threshold = 5;
};

// A user is cold iff their training-interaction count is strictly below the
// threshold.
ColdStartLabels label_cold_start(const std::vector<std::pair<int, int>>& train,
                                 int n_users, int threshold = 5);

struct SyntheticConfig {
  int n_users = 200;
  int n_source_items = 500;
  int n_target_items = 500;
  int latent_dim = 8;
  double density = 0.02;
  std::uint64_t seed = 1;
};

struct SyntheticPair {
  InteractionTable source;
  InteractionTable target;
  RelationTable relations;  // target-domain item relations
};

// Latent-factor fixture generator. Users and items draw Gaussian factors;
// an interaction (u, i) appears with probability
//   density * activity_u * (1 + 0.75 * tanh(dot(u, i) / sqrt(latent_dim)))
// clamped to [0, 1], so the expected edge count is n_users * n_items *
// density. density = 1 yields the complete bipartite set. Relations connect
// each target item to its most cosine-similar target items.
SyntheticPair generate_synthetic_pair(const SyntheticConfig& config);

// TSV with a `#seed=` header comment and lines `user<TAB>item<TAB>split`.
void write_split_manifest(const std::filesystem::path& path, const SplitSet& split);
SplitSet read_split_manifest(const std::filesystem::path& path);

void write_interactions(const std::filesystem::path& path, const InteractionTable& table);
void write_relations(const std::filesystem::path& path, const RelationTable& table);

}  // namespace pgprec
