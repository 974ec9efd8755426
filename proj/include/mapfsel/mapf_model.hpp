#pragma once

#include <memory>
#include <vector>

#include "mapfsel/benchmark_io.hpp"

namespace mapfsel {

// 4-connected graph over the passable cells of a grid. Nodes are numbered
// row-major over passable cells; neighbor lists are sorted ascending.
class CellGraph {
 public:
  explicit CellGraph(const GridMap& grid);

  int num_nodes() const { return static_cast<int>(node_cell_.size()); }
  int num_edges() const { return static_cast<int>(neighbors_.size() / 2); }
  int degree(int node) const { return offsets_[node + 1] - offsets_[node]; }

  const int* neighbors_begin(int node) const { return neighbors_.data() + offsets_[node]; }
  const int* neighbors_end(int node) const { return neighbors_.data() + offsets_[node + 1]; }

  int node_cell(int node) const { return node_cell_[node]; }
  // -1 for blocked cells.
  int cell_node(int cell) const { return cell_node_[cell]; }

  // Undirected edges (u < v) in ascending order.
  std::vector<std::pair<int, int>> edges() const;

 private:
  std::vector<int> node_cell_;
  std::vector<int> cell_node_;
  std::vector<int> offsets_;
  std::vector<int> neighbors_;
};

inline CellGraph cell_graph(const GridMap& grid) { return CellGraph(grid); }

struct AgentPath {
  int agent = 0;
  std::vector<int> cells;  // cell ids, source first, target last
  int moves() const { return static_cast<int>(cells.size()) - 1; }
};

// BFS shortest path. Neighbors expand in the order Up, Left, Right, Down and
// each cell keeps its first-discovered parent. Throws NoPathError.
AgentPath shortest_path(const GridMap& grid, int source, int target);

// BFS distance from source to every cell; -1 where unreachable or blocked.
std::vector<int> bfs_distances(const GridMap& grid, int source);

// The tuple (k, G, s, t). Immutable; the grid is shared between instances
// built on the same map.
class MapfInstance {
 public:
  // Validates bounds, passability, distinctness and per-agent reachability.
  MapfInstance(std::shared_ptr<const GridMap> grid, std::vector<int> sources,
               std::vector<int> targets);

  // Uses the first k entries of a scenario.
  static MapfInstance from_scenario(std::shared_ptr<const GridMap> grid,
                                    const std::vector<ScenarioEntry>& entries, int k);

  int num_agents() const { return static_cast<int>(sources_.size()); }
  const GridMap& grid() const { return *grid_; }
  const std::shared_ptr<const GridMap>& grid_ptr() const { return grid_; }
  const std::vector<int>& sources() const { return sources_; }
  const std::vector<int>& targets() const { return targets_; }
  // Deterministic single-agent shortest paths, one per agent.
  const std::vector<AgentPath>& paths() const { return paths_; }

 private:
  std::shared_ptr<const GridMap> grid_;
  std::vector<int> sources_;
  std::vector<int> targets_;
  std::vector<AgentPath> paths_;
};

}  // namespace mapfsel
