#include <doctest.h>

#include <random>

#include "mapfsel/errors.hpp"
#include "mapfsel/mapf_model.hpp"
#include "oracles/oracles.hpp"

using namespace mapfsel;

namespace {

GridMap rows(const std::vector<std::string>& lines) {
  std::vector<char> t;
  for (const auto& l : lines) t.insert(t.end(), l.begin(), l.end());
  return GridMap("t", static_cast<int>(lines[0].size()), static_cast<int>(lines.size()), t);
}

}  // namespace

TEST_CASE("cell graph sizes") {
  const CellGraph line(GridMap::open("a", 3, 1));
  CHECK(line.num_nodes() == 3);
  CHECK(line.num_edges() == 2);
  const CellGraph square(GridMap::open("b", 2, 2));
  CHECK(square.num_nodes() == 4);
  CHECK(square.num_edges() == 4);
  const CellGraph split(rows({".@."}));
  CHECK(split.num_nodes() == 2);
  CHECK(split.num_edges() == 0);
  CHECK(split.cell_node(1) == -1);
  CHECK(split.node_cell(1) == 2);
}

TEST_CASE("cell graph matches brute-force edges") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto g = oracle::random_grid(1 + static_cast<int>(rng() % 15), 1 + static_cast<int>(rng() % 15), 0.3, rng);
    const CellGraph cg(g);
    std::set<std::pair<int, int>> got;
    for (auto [u, v] : cg.edges()) {
      CHECK(u < v);
      got.emplace(cg.node_cell(u), cg.node_cell(v));
    }
    CHECK(got == oracle::grid_edges(g));
    for (int u = 0; u < cg.num_nodes(); ++u)
      CHECK(std::is_sorted(cg.neighbors_begin(u), cg.neighbors_end(u)));
  }
}

TEST_CASE("shortest path on a corridor") {
  const auto g = GridMap::open("c", 5, 1);
  const auto p = shortest_path(g, 0, 4);
  CHECK(p.cells == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(p.moves() == 4);
  const auto same = shortest_path(g, 2, 2);
  CHECK(same.cells == std::vector<int>{2});
  CHECK(same.moves() == 0);
}

TEST_CASE("shortest path errors") {
  const auto g = rows({"..@.."});
  CHECK_THROWS_AS(shortest_path(g, 0, 4), NoPathError);
  CHECK_THROWS_AS(shortest_path(g, 0, 2), DataError);
  CHECK_THROWS_AS(shortest_path(g, 0, 99), DataError);
}

TEST_CASE("tie-break follows expansion order") {
  // On an open 2x2 grid from (0,0) to (1,1) the Right move is expanded
  // before Down, so (1,1) is first discovered from (1,0).
  const auto g = GridMap::open("s", 2, 2);
  CHECK(shortest_path(g, 0, 3).cells == std::vector<int>{0, 1, 3});
  // From (1,1) to (0,0): Up is expanded before Left.
  CHECK(shortest_path(g, 3, 0).cells == std::vector<int>{3, 1, 0});
}

TEST_CASE("BFS distances equal Dijkstra and paths equal the oracle") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 60; ++i) {
    const auto g = oracle::random_grid(1 + static_cast<int>(rng() % 32), 1 + static_cast<int>(rng() % 32),
                                       0.35 * oracle::unit(rng), rng);
    std::vector<int> open;
    for (int c = 0; c < g.num_cells(); ++c)
      if (g.passable(c)) open.push_back(c);
    if (open.empty()) continue;
    const int s = open[rng() % open.size()];
    const auto d = bfs_distances(g, s);
    CHECK(d == oracle::dijkstra(g, s));
    const int t = open[rng() % open.size()];
    if (d[t] < 0) {
      CHECK_THROWS_AS(shortest_path(g, s, t), NoPathError);
    } else {
      const auto p = shortest_path(g, s, t);
      CHECK(p.moves() == d[t]);
      CHECK(p.cells == oracle::bfs_path(g, s, t));
    }
  }
}

TEST_CASE("instance validation") {
  auto g = std::make_shared<const GridMap>(rows({"...", ".@.", "..."}));
  CHECK_NOTHROW(MapfInstance(g, {0, 2}, {8, 6}));
  CHECK_THROWS_AS(MapfInstance(g, {0, 0}, {8, 6}), DataError);     // duplicate sources
  CHECK_THROWS_AS(MapfInstance(g, {0, 2}, {8, 8}), DataError);     // duplicate targets
  CHECK_THROWS_AS(MapfInstance(g, {4}, {8}), DataError);           // blocked
  CHECK_THROWS_AS(MapfInstance(g, {0}, {9}), DataError);           // out of bounds
  CHECK_THROWS_AS(MapfInstance(g, {0, 1}, {8}), DataError);        // length mismatch
  auto cut = std::make_shared<const GridMap>(rows({".@."}));
  CHECK_THROWS_AS(MapfInstance(cut, {0}, {2}), NoPathError);
  const MapfInstance inst(g, {0, 2}, {8, 6});
  REQUIRE(inst.paths().size() == 2);
  CHECK(inst.paths()[0].moves() == 4);
}

TEST_CASE("instance from scenario prefix") {
  auto g = std::make_shared<const GridMap>(GridMap::open("o", 4, 4));
  std::vector<ScenarioEntry> entries;
  for (int i = 0; i < 3; ++i) {
    ScenarioEntry e;
    e.start = {i, 0};
    e.goal = {i, 3};
    entries.push_back(e);
  }
  const auto inst = MapfInstance::from_scenario(g, entries, 2);
  CHECK(inst.num_agents() == 2);
  CHECK(inst.sources() == std::vector<int>{0, 1});
  CHECK(inst.targets() == std::vector<int>{12, 13});
  CHECK_THROWS_AS(MapfInstance::from_scenario(g, entries, 4), DataError);
  CHECK_THROWS_AS(MapfInstance::from_scenario(g, entries, 0), DataError);
}
