#include "pgprec/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "pgprec/errors.hpp"

namespace pgprec {

RankedList rank_scores(int user, const std::vector<double>& scores,
                       const std::vector<int>& excluded_items, int k) {
  if (k < 1) throw ConfigError("ranking cutoff must be >= 1");
  std::vector<char> excluded(scores.size(), 0);
  for (int item : excluded_items) {
    if (item >= 0 && item < static_cast<int>(scores.size())) excluded[item] = 1;
  }
  std::vector<int> candidates;
  candidates.reserve(scores.size());
  for (int i = 0; i < static_cast<int>(scores.size()); ++i) {
    if (!excluded[i]) candidates.push_back(i);
  }
  const std::size_t take = std::min<std::size_t>(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + take, candidates.end(),
                    [&](int a, int b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  RankedList ranked;
  ranked.user = user;
  ranked.items.assign(candidates.begin(), candidates.begin() + take);
  ranked.scores.reserve(take);
  for (int item : ranked.items) ranked.scores.push_back(scores[item]);
  return ranked;
}

RankedList rank_items(const Tensor& final_reps, int n_users, int n_items, int user,
                      int k, const std::vector<int>& excluded_items) {
  if (user < 0 || user >= n_users) throw ContractError("user id out of range");
  std::vector<double> scores(n_items);
  const auto u = final_reps.row(user);
  for (int i = 0; i < n_items; ++i) {
    const auto v = final_reps.row(n_users + i);
    double s = 0.0;
    for (std::size_t c = 0; c < u.size(); ++c) s += u[c] * v[c];
    scores[i] = s;
  }
  return rank_scores(user, scores, excluded_items, k);
}

double recall_at_k(const RankedList& ranked, const std::set<int>& relevant) {
  if (relevant.empty()) throw ContractError("recall undefined for empty relevant set");
  int hits = 0;
  for (int item : ranked.items) hits += relevant.count(item) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double ndcg_at_k(const RankedList& ranked, const std::set<int>& relevant) {
  if (relevant.empty()) throw ContractError("ndcg undefined for empty relevant set");
  double dcg = 0.0;
  for (std::size_t x = 0; x < ranked.items.size(); ++x) {
    if (relevant.count(ranked.items[x])) {
      dcg += 1.0 / std::log2(static_cast<double>(x) + 2.0);
    }
  }
  const std::size_t ideal_hits = std::min(relevant.size(), ranked.items.size());
  double ideal = 0.0;
  for (std::size_t x = 0; x < ideal_hits; ++x) {
    ideal += 1.0 / std::log2(static_cast<double>(x) + 2.0);
  }
  if (ideal == 0.0) return 0.0;
  return dcg / ideal;
}

namespace {

int worker_count(int n_tasks) {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (const char* env = std::getenv("PGPREC_THREADS")) {
    const int requested = std::atoi(env);
    if (requested >= 1) workers = requested;
  }
  return std::max(1, std::min(workers, n_tasks));
}

}  // namespace

EvalReport evaluate(const Tensor& final_reps, int n_users, int n_items,
                    const std::vector<std::pair<int, int>>& test,
                    const std::vector<std::pair<int, int>>& exclusions,
                    const ColdStartLabels& labels, int k) {
  if (test.empty()) throw DataError("empty test split");
  if (static_cast<int>(labels.cold.size()) != n_users) {
    throw ContractError("cold-start labels do not cover the user set");
  }
  std::vector<std::vector<int>> excluded(n_users);
  std::vector<std::set<int>> relevant(n_users);
  for (const auto& [u, i] : exclusions) excluded[u].push_back(i);
  for (const auto& [u, i] : test) relevant[u].insert(i);

  std::vector<int> users;
  for (int u = 0; u < n_users; ++u) {
    if (!relevant[u].empty()) users.push_back(u);
  }

  std::vector<EvalReport::Row> rows(users.size());
  const int workers = worker_count(static_cast<int>(users.size()));
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  const auto work = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= users.size()) break;
      const int u = users[idx];
      const RankedList ranked = rank_items(final_reps, n_users, n_items, u, k, excluded[u]);
      rows[idx] = {u, labels.cold[u], recall_at_k(ranked, relevant[u]),
                   ndcg_at_k(ranked, relevant[u])};
    }
  };
  if (workers <= 1) {
    work();
  } else {
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  EvalReport report;
  report.k = k;
  report.rows = std::move(rows);
  for (const auto& row : report.rows) {
    report.mean_recall += row.recall;
    report.mean_ndcg += row.ndcg;
    if (row.cold) {
      report.cold_count += 1;
      report.cold_recall += row.recall;
      report.cold_ndcg += row.ndcg;
    } else {
      report.regular_count += 1;
      report.regular_recall += row.recall;
      report.regular_ndcg += row.ndcg;
    }
  }
  const auto mean = [](double total, int count) {
    return count > 0 ? total / count : 0.0;
  };
  report.mean_recall = mean(report.mean_recall, static_cast<int>(report.rows.size()));
  report.mean_ndcg = mean(report.mean_ndcg, static_cast<int>(report.rows.size()));
  report.cold_recall = mean(report.cold_recall, report.cold_count);
  report.cold_ndcg = mean(report.cold_ndcg, report.cold_count);
  report.regular_recall = mean(report.regular_recall, report.regular_count);
  report.regular_ndcg = mean(report.regular_ndcg, report.regular_count);
  return report;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_eval_csv(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write eval report: " + path.string());
  out << "user,group,recall" << report.k << ",ndcg" << report.k << "\n";
  for (const auto& row : report.rows) {
    out << row.user << ',' << (row.cold ? "cold" : "regular") << ','
        << fmt_double(row.recall) << ',' << fmt_double(row.ndcg) << "\n";
  }
}

EvalReport read_eval_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open eval report: " + path.string());
  EvalReport report;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      const auto pos = line.find("recall");
      if (pos != std::string::npos) {
        report.k = std::atoi(line.c_str() + pos + 6);
      }
      continue;
    }
    std::stringstream ss(line);
    std::string user, group, recall, ndcg;
    if (!std::getline(ss, user, ',') || !std::getline(ss, group, ',') ||
        !std::getline(ss, recall, ',') || !std::getline(ss, ndcg, ',')) {
      throw DataError("malformed eval csv line: " + line);
    }
    EvalReport::Row row;
    row.user = std::atoi(user.c_str());
    row.cold = group == "cold";
    row.recall = std::strtod(recall.c_str(), nullptr);
    row.ndcg = std::strtod(ndcg.c_str(), nullptr);
    report.rows.push_back(row);
  }
  for (const auto& row : report.rows) {
    report.mean_recall += row.recall;
    report.mean_ndcg += row.ndcg;
    if (row.cold) {
      report.cold_count += 1;
      report.cold_recall += row.recall;
      report.cold_ndcg += row.ndcg;
    } else {
      report.regular_count += 1;
      report.regular_recall += row.recall;
      report.regular_ndcg += row.ndcg;
    }
  }
  const auto mean = [](double total, int count) {
    return count > 0 ? total / count : 0.0;
  };
  report.mean_recall = mean(report.mean_recall, static_cast<int>(report.rows.size()));
  report.mean_ndcg = mean(report.mean_ndcg, static_cast<int>(report.rows.size()));
  report.cold_recall = mean(report.cold_recall, report.cold_count);
  report.cold_ndcg = mean(report.cold_ndcg, report.cold_count);
  report.regular_recall = mean(report.regular_recall, report.regular_count);
  report.regular_ndcg = mean(report.regular_ndcg, report.regular_count);
  return report;
}

std::string format_eval_summary(const EvalReport& report) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "users evaluated: %zu\n", report.rows.size());
  out << buf;
  std::snprintf(buf, sizeof(buf), "recall@%d  mean=%.6f\n", report.k, report.mean_recall);
  out << buf;
  std::snprintf(buf, sizeof(buf), "ndcg@%d    mean=%.6f\n", report.k, report.mean_ndcg);
  out << buf;
  std::snprintf(buf, sizeof(buf), "cold     n=%d recall=%.6f ndcg=%.6f\n",
                report.cold_count, report.cold_recall, report.cold_ndcg);
  out << buf;
  std::snprintf(buf, sizeof(buf), "regular  n=%d recall=%.6f ndcg=%.6f\n",
                report.regular_count, report.regular_recall, report.regular_ndcg);
  out << buf;
  return out.str();
}

}  // namespace pgprec
