#include "pgprec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pgprec/errors.hpp"
#include "pgprec/rng.hpp"

namespace pgprec {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stod(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size() && std::isfinite(out);
}

bool parse_ll(const std::string& s, long long& out) {
  if (s.empty()) return false;
  std::size_t pos = 0;
  try {
    out = std::stoll(s, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == s.size();
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  return in;
}

bool skippable(const std::string& line) {
  return line.empty() || line[0] == '#';
}

}  // namespace

InteractionTable load_interactions(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  InteractionTable table;
  std::unordered_map<std::string, std::size_t> seen;  // "user\titem" -> record index
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skippable(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3 && fields.size() != 4) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 3 or 4 tab-separated fields");
    }
    InteractionRecord rec;
    rec.user = fields[0];
    rec.item = fields[1];
    if (rec.user.empty() || rec.item.empty() || !parse_double(fields[2], rec.rating)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed interaction line");
    }
    if (fields.size() == 4) {
      long long ts = 0;
      if (!parse_ll(fields[3], ts)) {
        throw DataError(path.string() + ":" + std::to_string(line_no) +
                        ": malformed timestamp");
      }
      rec.timestamp = ts;
    }
    const std::string key = rec.user + '\t' + rec.item;
    auto it = seen.find(key);
    if (it != seen.end()) {
      table.records[it->second] = rec;  // later duplicates override earlier
    } else {
      seen.emplace(key, table.records.size());
      table.records.push_back(std::move(rec));
    }
  }
  if (table.records.empty()) {
    throw DataError("no interactions in " + path.string());
  }
  return table;
}

InteractionTable binarize(InteractionTable table) {
  for (auto& rec : table.records) rec.rating = 1.0;
  return table;
}

RelationTable load_relations(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  RelationTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skippable(line)) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3 || fields[0].empty() || fields[2].empty()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected item<TAB>relation<TAB>item");
    }
    if (fields[0] == fields[2]) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": item related to itself");
    }
    RelationEntry& entry = table.entries[fields[0]];
    if (fields[1] == "also_bought") {
      entry.also_bought.insert(fields[2]);
    } else if (fields[1] == "also_viewed") {
      entry.also_viewed.insert(fields[2]);
    } else if (fields[1] == "bought_together") {
      entry.bought_together.insert(fields[2]);
    } else {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": unknown relation '" + fields[1] + "'");
    }
  }
  return table;
}

DomainPair align_domains(const InteractionTable& source, const InteractionTable& target) {
  if (source.records.empty() || target.records.empty()) {
    throw DataError("alignment requires non-empty interaction tables");
  }
  std::set<std::string> source_users, target_users;
  for (const auto& r : source.records) source_users.insert(r.user);
  for (const auto& r : target.records) target_users.insert(r.user);

  DomainPair pair;
  std::set_intersection(source_users.begin(), source_users.end(),
                        target_users.begin(), target_users.end(),
                        std::back_inserter(pair.shared_users));
  if (pair.shared_users.empty()) {
    throw DataError("source and target domains share no users");
  }
  for (std::size_t i = 0; i < pair.shared_users.size(); ++i) {
    pair.user_id.emplace(pair.shared_users[i], static_cast<int>(i));
  }

  const auto index_items = [&](const InteractionTable& table,
                               std::vector<std::string>& items,
                               std::unordered_map<std::string, int>& ids) {
    std::set<std::string> keys;
    for (const auto& r : table.records) {
      if (pair.user_id.count(r.user)) keys.insert(r.item);
    }
    items.assign(keys.begin(), keys.end());
    for (std::size_t i = 0; i < items.size(); ++i) {
      ids.emplace(items[i], static_cast<int>(i));
    }
  };
  index_items(source, pair.source_items, pair.source_item_id);
  index_items(target, pair.target_items, pair.target_item_id);

  const auto map_interactions = [&](const InteractionTable& table,
                                    const std::unordered_map<std::string, int>& item_ids,
                                    std::vector<std::pair<int, int>>& out) {
    for (const auto& r : table.records) {
      const auto uit = pair.user_id.find(r.user);
      if (uit == pair.user_id.end()) continue;
      out.emplace_back(uit->second, item_ids.at(r.item));
    }
  };
  map_interactions(source, pair.source_item_id, pair.source_interactions);
  map_interactions(target, pair.target_item_id, pair.target_interactions);
  return pair;
}

SplitSet split_holdout(const std::vector<std::pair<int, int>>& interactions,
                       std::uint64_t seed) {
  const std::size_t n = interactions.size();
  if (n < 10) {
    throw DataError("holdout split needs at least 10 interactions, got " +
                    std::to_string(n));
  }
  std::vector<std::pair<int, int>> shuffled = interactions;
  SplitRng rng(seed);
  rng.shuffle(shuffled);

  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_valid = n / 10;
  SplitSet split;
  split.seed = seed;
  split.train.assign(shuffled.begin(), shuffled.begin() + n_train);
  split.valid.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_valid);
  split.test.assign(shuffled.begin() + n_train + n_valid, shuffled.end());
  return split;
}

ColdStartLabels label_cold_start(const std::vector<std::pair<int, int>>& train,
                                 int n_users, int threshold) {
  std::vector<int> counts(n_users, 0);
  for (const auto& [u, i] : train) {
    if (u >= 0 && u < n_users) counts[u] += 1;
  }
  ColdStartLabels labels;
  labels.threshold = threshold;
  labels.cold.resize(n_users);
  for (int u = 0; u < n_users; ++u) labels.cold[u] = counts[u] < threshold;
  return labels;
}

namespace {

std::vector<std::vector<double>> gaussian_factors(int n, int dim, SplitRng& rng) {
  std::vector<std::vector<double>> f(n, std::vector<double>(dim));
  for (auto& row : f) {
    for (double& v : row) v = rng.next_normal();
  }
  return f;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void sample_domain(const std::vector<std::vector<double>>& users,
                   const std::vector<double>& activity,
                   const std::vector<std::vector<double>>& items,
                   const char item_prefix, double density, SplitRng& rng,
                   InteractionTable& out) {
  const double z_scale = std::sqrt(static_cast<double>(users.front().size()));
  for (std::size_t u = 0; u < users.size(); ++u) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      double p;
      if (density == 1.0) {
        p = 1.0;
      } else {
        p = density * activity[u] *
            (1.0 + 0.75 * std::tanh(dot(users[u], items[i]) / z_scale));
        p = std::clamp(p, 0.0, 1.0);
      }
      if (rng.next_double() < p) {
        InteractionRecord rec;
        rec.user = "u" + std::to_string(u);
        rec.item = item_prefix + std::to_string(i);
        rec.rating = 1.0;
        out.records.push_back(std::move(rec));
      }
    }
  }
}

}  // namespace

SyntheticPair generate_synthetic_pair(const SyntheticConfig& config) {
  if (config.n_users < 1 || config.n_source_items < 1 || config.n_target_items < 1) {
    throw ConfigError("synthetic generator needs positive entity counts");
  }
  if (config.latent_dim < 1) {
    throw ConfigError("synthetic latent dimension must be >= 1");
  }
  if (!(config.density > 0.0 && config.density <= 1.0)) {
    throw ConfigError("synthetic density must lie in (0, 1]");
  }

  SplitRng rng(derive_seed(config.seed, seed_offset::kSynth));
  const auto users = gaussian_factors(config.n_users, config.latent_dim, rng);
  const auto source_items = gaussian_factors(config.n_source_items, config.latent_dim, rng);
  const auto target_items = gaussian_factors(config.n_target_items, config.latent_dim, rng);

  // Per-user activity, normalised to mean exactly 1 so expected edge counts
  // stay at n_users * n_items * density. The spread produces a mix of cold
  // and regular users.
  std::vector<double> activity(config.n_users);
  for (double& a : activity) a = rng.next_double(0.25, 1.75);
  const double mean_activity =
      std::accumulate(activity.begin(), activity.end(), 0.0) / config.n_users;
  for (double& a : activity) a /= mean_activity;

  SyntheticPair pair;
  sample_domain(users, activity, source_items, 's', config.density, rng, pair.source);
  sample_domain(users, activity, target_items, 't', config.density, rng, pair.target);

  // Catalog metadata: each target item relates to its most cosine-similar
  // target items (2 also_bought, 2 also_viewed, 1 bought_together).
  std::vector<double> norms(config.n_target_items);
  for (int i = 0; i < config.n_target_items; ++i) norms[i] = norm(target_items[i]);
  for (int i = 0; i < config.n_target_items; ++i) {
    std::vector<std::pair<double, int>> sims;
    sims.reserve(config.n_target_items - 1);
    for (int j = 0; j < config.n_target_items; ++j) {
      if (j == i) continue;
      const double denom = std::max(norms[i] * norms[j], 1e-300);
      sims.emplace_back(dot(target_items[i], target_items[j]) / denom, j);
    }
    const std::size_t want = std::min<std::size_t>(5, sims.size());
    std::partial_sort(sims.begin(), sims.begin() + want, sims.end(),
                      [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return a.second < b.second;
                      });
    RelationEntry& entry = pair.relations.entries["t" + std::to_string(i)];
    for (std::size_t k = 0; k < want; ++k) {
      const std::string other = "t" + std::to_string(sims[k].second);
      if (k < 2) {
        entry.also_bought.insert(other);
      } else if (k < 4) {
        entry.also_viewed.insert(other);
      } else {
        entry.bought_together.insert(other);
      }
    }
  }
  return pair;
}

namespace {

const char* split_name(int which) {
  switch (which) {
    case 0: return "train";
    case 1: return "valid";
    default: return "test";
  }
}

}  // namespace

void write_split_manifest(const std::filesystem::path& path, const SplitSet& split) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write split manifest: " + path.string());
  out << "#seed=" << split.seed << "\n";
  out << "user\titem\tsplit\n";
  const std::vector<const std::vector<std::pair<int, int>>*> parts = {
      &split.train, &split.valid, &split.test};
  for (int which = 0; which < 3; ++which) {
    for (const auto& [u, i] : *parts[which]) {
      out << u << '\t' << i << '\t' << split_name(which) << "\n";
    }
  }
}

SplitSet read_split_manifest(const std::filesystem::path& path) {
  std::ifstream in = open_or_throw(path);
  SplitSet split;
  std::string line;
  std::size_t line_no = 0;
  bool have_seed = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("#seed=", 0) == 0) {
      split.seed = std::stoull(line.substr(6));
      have_seed = true;
      continue;
    }
    if (skippable(line) || line.rfind("user\t", 0) == 0) continue;
    const auto fields = split_tabs(line);
    long long u = 0, i = 0;
    if (fields.size() != 3 || !parse_ll(fields[0], u) || !parse_ll(fields[1], i)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed split manifest line");
    }
    const std::pair<int, int> edge(static_cast<int>(u), static_cast<int>(i));
    if (fields[2] == "train") {
      split.train.push_back(edge);
    } else if (fields[2] == "valid") {
      split.valid.push_back(edge);
    } else if (fields[2] == "test") {
      split.test.push_back(edge);
    } else {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": unknown split label '" + fields[2] + "'");
    }
  }
  if (!have_seed) {
    throw DataError(path.string() + ": missing #seed= header");
  }
  return split;
}

void write_interactions(const std::filesystem::path& path, const InteractionTable& table) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write interactions: " + path.string());
  char buf[64];
  for (const auto& rec : table.records) {
    std::snprintf(buf, sizeof(buf), "%.17g", rec.rating);
    out << rec.user << '\t' << rec.item << '\t' << buf;
    if (rec.timestamp) out << '\t' << *rec.timestamp;
    out << "\n";
  }
}

void write_relations(const std::filesystem::path& path, const RelationTable& table) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write relations: " + path.string());
  for (const auto& [item, entry] : table.entries) {
    for (const auto& other : entry.also_bought) {
      out << item << "\talso_bought\t" << other << "\n";
    }
    for (const auto& other : entry.also_viewed) {
      out << item << "\talso_viewed\t" << other << "\n";
    }
    for (const auto& other : entry.bought_together) {
      out << item << "\tbought_together\t" << other << "\n";
    }
  }
}

}  // namespace pgprec
