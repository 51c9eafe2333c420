#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "pgprec/dataset.hpp"
#include "pgprec/errors.hpp"
#include "testutil.hpp"

using namespace pgprec;

namespace {

InteractionTable table_from(const std::vector<std::tuple<std::string, std::string, double>>& rows) {
  InteractionTable t;
  for (const auto& [u, i, r] : rows) t.records.push_back({u, i, r, std::nullopt});
  return t;
}

}  // namespace

TEST_CASE("load_interactions parses, dedups and reports malformed lines") {
  testutil::TempDir dir("ds_load");
  const auto path = dir.path() / "inter.tsv";

  testutil::write_file(path, "u1\ti1\t5\nu1\ti2\t3\n");
  const InteractionTable two = load_interactions(path);
  CHECK(two.records.size() == 2);
  CHECK(two.records[0].rating == 5.0);

  testutil::write_file(path, "u1\ti1\t5\nu1\ti1\t2\n");
  const InteractionTable dedup = load_interactions(path);
  CHECK(dedup.records.size() == 1);
  CHECK(dedup.records[0].rating == 2.0);  // later duplicate wins

  testutil::write_file(path, "u1\ti1\n");
  CHECK_THROWS_WITH_AS(load_interactions(path),
                       doctest::Contains(":1"), DataError);

  testutil::write_file(path, "");
  CHECK_THROWS_AS(load_interactions(path), DataError);

  testutil::write_file(path, "u1\ti1\t4\t1700000000\n");
  const InteractionTable ts = load_interactions(path);
  REQUIRE(ts.records[0].timestamp.has_value());
  CHECK(*ts.records[0].timestamp == 1700000000);

  CHECK_THROWS_AS(load_interactions(dir.path() / "missing.tsv"), ConfigError);
}

TEST_CASE("binarize maps ratings to one, keeps counts, is idempotent") {
  InteractionTable t = table_from({{"u", "a", 5.0}, {"u", "b", 3.0}, {"v", "a", 1.0}});
  const InteractionTable b = binarize(t);
  CHECK(b.records.size() == 3);
  for (const auto& rec : b.records) CHECK(rec.rating == 1.0);
  const InteractionTable bb = binarize(b);
  for (const auto& rec : bb.records) CHECK(rec.rating == 1.0);

  InteractionTable empty;
  CHECK(binarize(empty).records.empty());
}

TEST_CASE("align_domains keeps exactly the shared users") {
  const InteractionTable source =
      table_from({{"a", "s1", 1}, {"b", "s1", 1}, {"c", "s2", 1}});
  const InteractionTable target =
      table_from({{"b", "t1", 1}, {"c", "t1", 1}, {"d", "t2", 1}});
  const DomainPair pair = align_domains(source, target);
  CHECK(pair.shared_users == std::vector<std::string>{"b", "c"});
  CHECK(pair.source_interactions.size() == 2);
  CHECK(pair.target_interactions.size() == 2);

  // Count oracle: interactions dropped = those of non-shared users.
  int joint = 0;
  for (const auto& rec : source.records) {
    if (rec.user == "b" || rec.user == "c") ++joint;
  }
  CHECK(static_cast<int>(pair.source_interactions.size()) == joint);
}

TEST_CASE("align_domains with identical user sets keeps everything") {
  const InteractionTable source = table_from({{"a", "s1", 1}, {"b", "s2", 1}});
  const InteractionTable target = table_from({{"a", "t1", 1}, {"b", "t1", 1}});
  const DomainPair pair = align_domains(source, target);
  CHECK(pair.n_users() == 2);
  CHECK(pair.source_interactions.size() == 2);
  CHECK(pair.target_interactions.size() == 2);
}

TEST_CASE("align_domains rejects disjoint user sets and empty tables") {
  const InteractionTable source = table_from({{"a", "s1", 1}});
  const InteractionTable target = table_from({{"b", "t1", 1}});
  CHECK_THROWS_AS(align_domains(source, target), DataError);
  CHECK_THROWS_AS(align_domains(InteractionTable{}, target), DataError);
}

TEST_CASE("split_holdout partitions 8:1:1 with the documented rounding") {
  std::vector<std::pair<int, int>> ten;
  for (int i = 0; i < 10; ++i) ten.emplace_back(0, i);
  const SplitSet s10 = split_holdout(ten, 3);
  CHECK(s10.train.size() == 8);
  CHECK(s10.valid.size() == 1);
  CHECK(s10.test.size() == 1);

  std::vector<std::pair<int, int>> many;
  for (int i = 0; i < 25; ++i) many.emplace_back(i % 5, i);
  const SplitSet s25 = split_holdout(many, 3);
  CHECK(s25.train.size() == 20);  // floor(25 * 0.8)
  CHECK(s25.valid.size() == 2);   // floor(25 * 0.1)
  CHECK(s25.test.size() == 3);    // remainder to test

  CHECK_THROWS_AS(split_holdout({{0, 1}}, 3), DataError);
}

TEST_CASE("split_holdout is deterministic and partitions the input") {
  std::vector<std::pair<int, int>> input;
  for (int i = 0; i < 100; ++i) input.emplace_back(i % 10, i);
  const SplitSet a = split_holdout(input, 17);
  const SplitSet b = split_holdout(input, 17);
  CHECK(a.train == b.train);
  CHECK(a.valid == b.valid);
  CHECK(a.test == b.test);

  std::multiset<std::pair<int, int>> combined;
  combined.insert(a.train.begin(), a.train.end());
  combined.insert(a.valid.begin(), a.valid.end());
  combined.insert(a.test.begin(), a.test.end());
  CHECK(combined == std::multiset<std::pair<int, int>>(input.begin(), input.end()));

  // Pairwise disjoint (input pairs are unique).
  std::set<std::pair<int, int>> train_set(a.train.begin(), a.train.end());
  for (const auto& p : a.valid) CHECK(train_set.count(p) == 0);
  for (const auto& p : a.test) CHECK(train_set.count(p) == 0);
}

TEST_CASE("cold-start labels follow the strict threshold") {
  std::vector<std::pair<int, int>> train;
  for (int i = 0; i < 4; ++i) train.emplace_back(0, i);  // 4 -> cold
  for (int i = 0; i < 6; ++i) train.emplace_back(1, i);  // 6 -> regular
  for (int i = 0; i < 5; ++i) train.emplace_back(2, i);  // exactly 5 -> regular
  const ColdStartLabels labels = label_cold_start(train, 4, 5);
  CHECK(labels.cold[0]);
  CHECK_FALSE(labels.cold[1]);
  CHECK_FALSE(labels.cold[2]);
  CHECK(labels.cold[3]);  // zero interactions

  // Naive recount oracle.
  std::map<int, int> counts;
  for (const auto& [u, i] : train) counts[u]++;
  for (int u = 0; u < 4; ++u) {
    CHECK(labels.cold[u] == (counts[u] < 5));
  }
}

TEST_CASE("synthetic pair hits the expected density and is deterministic") {
  SyntheticConfig config;
  config.n_users = 200;
  config.n_source_items = 500;
  config.n_target_items = 500;
  config.latent_dim = 8;
  config.density = 0.02;
  config.seed = 5;
  const SyntheticPair pair = generate_synthetic_pair(config);

  // Binomial oracle: expectation 200 * 500 * 0.02 = 2000, 3 sigma ~ 133.
  const double expected = 200.0 * 500.0 * 0.02;
  const double sigma = std::sqrt(expected * (1.0 - 0.02));
  CHECK(std::abs(static_cast<double>(pair.source.records.size()) - expected) <= 3 * sigma);
  CHECK(std::abs(static_cast<double>(pair.target.records.size()) - expected) <= 3 * sigma);

  const SyntheticPair again = generate_synthetic_pair(config);
  CHECK(again.source.records.size() == pair.source.records.size());
  CHECK(again.target.records.size() == pair.target.records.size());
  for (std::size_t i = 0; i < pair.source.records.size(); ++i) {
    CHECK(again.source.records[i].user == pair.source.records[i].user);
    CHECK(again.source.records[i].item == pair.source.records[i].item);
  }

  // Relations never point at the item itself.
  for (const auto& [item, entry] : pair.relations.entries) {
    CHECK(entry.also_bought.count(item) == 0);
    CHECK(entry.also_viewed.count(item) == 0);
    CHECK(entry.bought_together.count(item) == 0);
  }
}

TEST_CASE("density one yields the complete bipartite interaction set") {
  SyntheticConfig config;
  config.n_users = 6;
  config.n_source_items = 7;
  config.n_target_items = 5;
  config.density = 1.0;
  config.seed = 2;
  const SyntheticPair pair = generate_synthetic_pair(config);
  CHECK(pair.source.records.size() == 6 * 7);
  CHECK(pair.target.records.size() == 6 * 5);
}

TEST_CASE("synthetic generator rejects out-of-range parameters") {
  SyntheticConfig config;
  config.density = 0.0;
  CHECK_THROWS_AS(generate_synthetic_pair(config), ConfigError);
  config.density = 1.5;
  CHECK_THROWS_AS(generate_synthetic_pair(config), ConfigError);
  config.density = 0.5;
  config.latent_dim = 0;
  CHECK_THROWS_AS(generate_synthetic_pair(config), ConfigError);
}

TEST_CASE("relations file round trip and validation") {
  testutil::TempDir dir("ds_rel");
  const auto path = dir.path() / "rel.tsv";
  testutil::write_file(path,
                       "i1\talso_bought\ti2\ni1\talso_viewed\ti3\ni2\tbought_together\ti1\n");
  const RelationTable rel = load_relations(path);
  CHECK(rel.entries.at("i1").also_bought.count("i2") == 1);
  CHECK(rel.entries.at("i1").also_viewed.count("i3") == 1);
  CHECK(rel.entries.at("i2").bought_together.count("i1") == 1);

  testutil::write_file(path, "i1\talso_bought\ti1\n");
  CHECK_THROWS_AS(load_relations(path), DataError);
  testutil::write_file(path, "i1\tbad_relation\ti2\n");
  CHECK_THROWS_AS(load_relations(path), DataError);
}

TEST_CASE("split manifest round trip preserves the split and seed") {
  testutil::TempDir dir("ds_split");
  std::vector<std::pair<int, int>> input;
  for (int i = 0; i < 40; ++i) input.emplace_back(i % 7, i);
  const SplitSet split = split_holdout(input, 23);
  const auto path = dir.path() / "split.tsv";
  write_split_manifest(path, split);
  const SplitSet loaded = read_split_manifest(path);
  CHECK(loaded.seed == split.seed);
  CHECK(loaded.train == split.train);
  CHECK(loaded.valid == split.valid);
  CHECK(loaded.test == split.test);
}
