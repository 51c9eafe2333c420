#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pgprec/errors.hpp"
#include "pgprec/graph.hpp"
#include "pgprec/rng.hpp"

using namespace pgprec;

namespace {

InteractionGraph tiny_graph() {
  return build_graph({{0, 0}, {0, 1}, {1, 0}}, 2, 2);
}

}  // namespace

TEST_CASE("degrees follow the edge list") {
  const InteractionGraph g = tiny_graph();
  CHECK(g.user_degree(0) == 2);
  CHECK(g.user_degree(1) == 1);
  CHECK(g.item_degree(0) == 2);
  CHECK(g.item_degree(1) == 1);
}

TEST_CASE("empty edge list gives all-zero degrees") {
  const InteractionGraph g = build_graph({}, 3, 4);
  for (int u = 0; u < 3; ++u) CHECK(g.user_degree(u) == 0);
  for (int i = 0; i < 4; ++i) CHECK(g.item_degree(i) == 0);
}

TEST_CASE("build rejects duplicates and out-of-range ids") {
  CHECK_THROWS_AS(build_graph({{0, 0}, {0, 0}}, 1, 1), DataError);
  CHECK_THROWS_AS(build_graph({{0, 5}}, 1, 2), DataError);
  CHECK_THROWS_AS(build_graph({{-1, 0}}, 1, 2), DataError);
}

TEST_CASE("handshake: user degrees, item degrees and edges agree") {
  SplitRng rng(99);
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < 20; ++u) {
    for (int i = 0; i < 30; ++i) {
      if (rng.next_double() < 0.15) edges.emplace_back(u, i);
    }
  }
  const InteractionGraph g = build_graph(edges, 20, 30);
  std::size_t user_total = 0, item_total = 0;
  for (int u = 0; u < 20; ++u) user_total += g.user_degree(u);
  for (int i = 0; i < 30; ++i) item_total += g.item_degree(i);
  CHECK(user_total == edges.size());
  CHECK(item_total == edges.size());
}

TEST_CASE("neighbors are sorted and match the examples") {
  const InteractionGraph g = tiny_graph();
  CHECK(item_neighbors(g, 0) == std::vector<int>{0, 1});
  CHECK(item_neighbors(g, 1) == std::vector<int>{0});
  CHECK(user_neighbors(g, 0) == std::vector<int>{0, 1});
  CHECK_THROWS_AS(item_neighbors(g, 7), ContractError);
}

TEST_CASE("dropout limits: rho 0 keeps everything, rho 1 keeps nothing") {
  const InteractionGraph g = tiny_graph();
  const SubGraph all = edge_dropout(g, 0.0, 5);
  CHECK(all.retained_count() == g.edge_count());
  CHECK(item_neighbors(all, 0) == item_neighbors(g, 0));
  const SubGraph none = edge_dropout(g, 1.0, 5);
  CHECK(none.retained_count() == 0);
  CHECK(item_neighbors(none, 0).empty());
  CHECK_THROWS_AS(edge_dropout(g, 1.5, 5), ConfigError);
  CHECK_THROWS_AS(edge_dropout(g, -0.1, 5), ConfigError);
}

TEST_CASE("dropout retention stays within 3 sigma of the binomial mean") {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < 100; ++u) {
    for (int i = 0; i < 100; ++i) edges.emplace_back(u, i);
  }
  const InteractionGraph g = build_graph(edges, 100, 100);
  const SubGraph s = edge_dropout(g, 0.1, 31337);
  const double sigma = std::sqrt(10000 * 0.1 * 0.9);  // 30
  CHECK(std::abs(static_cast<double>(s.retained_count()) - 9000.0) <= 3.0 * sigma);
}

TEST_CASE("dropout is deterministic under the seed and subgraph edges are a subset") {
  const InteractionGraph g = tiny_graph();
  const SubGraph a = edge_dropout(g, 0.5, 7);
  const SubGraph b = edge_dropout(g, 0.5, 7);
  CHECK(a.edge_mask == b.edge_mask);
  // Node set unchanged, no new edges possible by construction.
  CHECK(a.edge_mask.size() == g.edge_count());
  for (int u = 0; u < g.n_users; ++u) {
    const auto sub = item_neighbors(a, u);
    const auto parent = item_neighbors(g, u);
    for (int item : sub) {
      CHECK(std::find(parent.begin(), parent.end(), item) != parent.end());
    }
  }
}

TEST_CASE("a masked-out only edge leaves the node isolated") {
  const InteractionGraph g = build_graph({{0, 0}}, 1, 1);
  SubGraph s = full_view(g);
  s.edge_mask[0] = 0;
  CHECK(item_neighbors(s, 0).empty());
  CHECK(user_neighbors(s, 0).empty());
}

TEST_CASE("full view equals the parent graph") {
  const InteractionGraph g = tiny_graph();
  const SubGraph s = full_view(g);
  for (int u = 0; u < g.n_users; ++u) {
    CHECK(item_neighbors(s, u) == item_neighbors(g, u));
  }
}
