#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace pgprec {

// Bipartite user-item interaction graph with both-direction adjacency.
// Immutable after build_graph; neighbor lists are sorted ascending and carry
// the owning edge index so masked views can filter in O(degree).
struct InteractionGraph {
  int n_users = 0;
  int n_items = 0;
  std::vector<std::pair<int, int>> edges;  // (user_id, item_id)
  // user -> sorted (item_id, edge_index); item -> sorted (user_id, edge_index)
  std::vector<std::vector<std::pair<int, int>>> user_adj;
  std::vector<std::vector<std::pair<int, int>>> item_adj;

  int user_degree(int user) const;
  int item_degree(int item) const;
  std::size_t edge_count() const { return edges.size(); }
};

// Validates id ranges and rejects duplicate edges (dedup is the dataset
// module's job).
InteractionGraph build_graph(const std::vector<std::pair<int, int>>& edges,
                             int n_users, int n_items);

// Edge-masked view of a parent graph; node set unchanged.
struct SubGraph {
  const InteractionGraph* parent = nullptr;
  std::vector<std::uint8_t> edge_mask;  // 1 = retained

  std::size_t retained_count() const;
};

// Independently drops each edge with probability rho; deterministic under
// seed. Two calls with different seeds give the two contrastive views.
SubGraph edge_dropout(const InteractionGraph& g, double rho, std::uint64_t seed);

// All-true mask over the parent graph.
SubGraph full_view(const InteractionGraph& g);

// Uniform read interface over a graph or a masked view, so propagation code
// does not care which one it walks.
class GraphView {
 public:
  explicit GraphView(const InteractionGraph& g) : graph_(&g), mask_(nullptr) {}
  explicit GraphView(const SubGraph& s) : graph_(s.parent), mask_(&s.edge_mask) {}

  const InteractionGraph& graph() const { return *graph_; }
  int n_users() const { return graph_->n_users; }
  int n_items() const { return graph_->n_items; }

  // Sorted unmasked neighbors, in the counterpart id space.
  std::vector<int> item_neighbors(int user) const;
  std::vector<int> user_neighbors(int item) const;

  // Degree of an item within this view.
  int item_degree(int item) const;

 private:
  const InteractionGraph* graph_;
  const std::vector<std::uint8_t>* mask_;
};

std::vector<int> item_neighbors(const InteractionGraph& g, int user);
std::vector<int> user_neighbors(const InteractionGraph& g, int item);
std::vector<int> item_neighbors(const SubGraph& s, int user);
std::vector<int> user_neighbors(const SubGraph& s, int item);

}  // namespace pgprec
