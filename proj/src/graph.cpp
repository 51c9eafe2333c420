#include "pgprec/graph.hpp"

#include <algorithm>
#include <string>

#include "pgprec/errors.hpp"
#include "pgprec/rng.hpp"

namespace pgprec {

int InteractionGraph::user_degree(int user) const {
  if (user < 0 || user >= n_users) throw ContractError("user id out of range");
  return static_cast<int>(user_adj[user].size());
}

int InteractionGraph::item_degree(int item) const {
  if (item < 0 || item >= n_items) throw ContractError("item id out of range");
  return static_cast<int>(item_adj[item].size());
}

InteractionGraph build_graph(const std::vector<std::pair<int, int>>& edges,
                             int n_users, int n_items) {
  InteractionGraph g;
  g.n_users = n_users;
  g.n_items = n_items;
  g.edges = edges;
  g.user_adj.resize(n_users);
  g.item_adj.resize(n_items);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [u, i] = edges[e];
    if (u < 0 || u >= n_users || i < 0 || i >= n_items) {
      throw DataError("edge (" + std::to_string(u) + ", " + std::to_string(i) +
                      ") out of range");
    }
    g.user_adj[u].emplace_back(i, static_cast<int>(e));
    g.item_adj[i].emplace_back(u, static_cast<int>(e));
  }
  for (auto& adj : g.user_adj) std::sort(adj.begin(), adj.end());
  for (auto& adj : g.item_adj) std::sort(adj.begin(), adj.end());
  for (const auto& adj : g.user_adj) {
    for (std::size_t k = 1; k < adj.size(); ++k) {
      if (adj[k].first == adj[k - 1].first) {
        throw DataError("duplicate edge on user " +
                        std::to_string(&adj - g.user_adj.data()) +
                        ", item " + std::to_string(adj[k].first));
      }
    }
  }
  return g;
}

std::size_t SubGraph::retained_count() const {
  std::size_t n = 0;
  for (std::uint8_t m : edge_mask) n += m;
  return n;
}

SubGraph edge_dropout(const InteractionGraph& g, double rho, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw ConfigError("edge dropout rate must lie in [0, 1]");
  }
  SubGraph s;
  s.parent = &g;
  s.edge_mask.resize(g.edges.size());
  SplitRng rng(seed);
  for (auto& m : s.edge_mask) m = rng.next_double() >= rho ? 1 : 0;
  return s;
}

SubGraph full_view(const InteractionGraph& g) {
  SubGraph s;
  s.parent = &g;
  s.edge_mask.assign(g.edges.size(), 1);
  return s;
}

std::vector<int> GraphView::item_neighbors(int user) const {
  if (user < 0 || user >= n_users()) throw ContractError("user id out of range");
  std::vector<int> out;
  out.reserve(graph_->user_adj[user].size());
  for (const auto& [item, edge] : graph_->user_adj[user]) {
    if (mask_ == nullptr || (*mask_)[edge]) out.push_back(item);
  }
  return out;
}

std::vector<int> GraphView::user_neighbors(int item) const {
  if (item < 0 || item >= n_items()) throw ContractError("item id out of range");
  std::vector<int> out;
  out.reserve(graph_->item_adj[item].size());
  for (const auto& [user, edge] : graph_->item_adj[item]) {
    if (mask_ == nullptr || (*mask_)[edge]) out.push_back(user);
  }
  return out;
}

int GraphView::item_degree(int item) const {
  if (mask_ == nullptr) return graph_->item_degree(item);
  int d = 0;
  for (const auto& [user, edge] : graph_->item_adj[item]) {
    if ((*mask_)[edge]) ++d;
  }
  return d;
}

std::vector<int> item_neighbors(const InteractionGraph& g, int user) {
  return GraphView(g).item_neighbors(user);
}

std::vector<int> user_neighbors(const InteractionGraph& g, int item) {
  return GraphView(g).user_neighbors(item);
}

std::vector<int> item_neighbors(const SubGraph& s, int user) {
  return GraphView(s).item_neighbors(user);
}

std::vector<int> user_neighbors(const SubGraph& s, int item) {
  return GraphView(s).user_neighbors(item);
}

}  // namespace pgprec
