#include "mapfsel/mapf_model.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <string>

#include "mapfsel/errors.hpp"

namespace mapfsel {

namespace {

// Up, Left, Right, Down.
constexpr std::array<std::array<int, 2>, 4> kMoves{{{0, -1}, {-1, 0}, {1, 0}, {0, 1}}};

std::string describe(const GridMap& grid, int cell) {
  const auto c = grid.cell(cell);
  return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

}  // namespace

CellGraph::CellGraph(const GridMap& grid) : cell_node_(grid.num_cells(), -1) {
  for (int id = 0; id < grid.num_cells(); ++id) {
    if (grid.passable(id)) {
      cell_node_[id] = static_cast<int>(node_cell_.size());
      node_cell_.push_back(id);
    }
  }
  offsets_.reserve(node_cell_.size() + 1);
  offsets_.push_back(0);
  for (const int id : node_cell_) {
    const auto c = grid.cell(id);
    // Ascending node order: up, left, right, down in row-major numbering.
    for (const auto& [dx, dy] : kMoves) {
      const int nx = c.x + dx;
      const int ny = c.y + dy;
      if (grid.in_bounds(nx, ny) && grid.passable(nx, ny)) {
        neighbors_.push_back(cell_node_[grid.cell_id(nx, ny)]);
      }
    }
    offsets_.push_back(static_cast<int>(neighbors_.size()));
  }
}

std::vector<std::pair<int, int>> CellGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(neighbors_.size() / 2);
  for (int u = 0; u < num_nodes(); ++u) {
    for (const int* v = neighbors_begin(u); v != neighbors_end(u); ++v) {
      if (u < *v) out.emplace_back(u, *v);
    }
  }
  return out;
}

AgentPath shortest_path(const GridMap& grid, int source, int target) {
  if (source < 0 || source >= grid.num_cells() || !grid.passable(source)) {
    throw DataError("source " + std::to_string(source) + " is not a passable cell");
  }
  if (target < 0 || target >= grid.num_cells() || !grid.passable(target)) {
    throw DataError("target " + std::to_string(target) + " is not a passable cell");
  }
  AgentPath path;
  if (source == target) {
    path.cells.push_back(source);
    return path;
  }

  std::vector<int> parent(grid.num_cells(), -1);
  std::vector<int> queue;
  queue.reserve(grid.num_cells());
  parent[source] = source;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int cur = queue[head];
    const auto c = grid.cell(cur);
    for (const auto& [dx, dy] : kMoves) {
      const int nx = c.x + dx;
      const int ny = c.y + dy;
      if (!grid.in_bounds(nx, ny) || !grid.passable(nx, ny)) continue;
      const int next = grid.cell_id(nx, ny);
      if (parent[next] != -1) continue;
      parent[next] = cur;
      if (next == target) {
        for (int at = target; at != source; at = parent[at]) path.cells.push_back(at);
        path.cells.push_back(source);
        std::reverse(path.cells.begin(), path.cells.end());
        return path;
      }
      queue.push_back(next);
    }
  }
  throw NoPathError("no path from " + describe(grid, source) + " to " + describe(grid, target) +
                    " on grid '" + grid.name() + "'");
}

std::vector<int> bfs_distances(const GridMap& grid, int source) {
  std::vector<int> dist(grid.num_cells(), -1);
  if (!grid.passable(source)) return dist;
  std::vector<int> queue;
  queue.reserve(grid.num_cells());
  dist[source] = 0;
  queue.push_back(source);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int cur = queue[head];
    const auto c = grid.cell(cur);
    for (const auto& [dx, dy] : kMoves) {
      const int nx = c.x + dx;
      const int ny = c.y + dy;
      if (!grid.in_bounds(nx, ny) || !grid.passable(nx, ny)) continue;
      const int next = grid.cell_id(nx, ny);
      if (dist[next] != -1) continue;
      dist[next] = dist[cur] + 1;
      queue.push_back(next);
    }
  }
  return dist;
}

MapfInstance::MapfInstance(std::shared_ptr<const GridMap> grid, std::vector<int> sources,
                           std::vector<int> targets)
    : grid_(std::move(grid)), sources_(std::move(sources)), targets_(std::move(targets)) {
  if (!grid_) throw DataError("instance has no grid");
  if (sources_.empty()) throw DataError("instance needs at least one agent");
  if (sources_.size() != targets_.size()) {
    throw DataError("sources and targets differ in length");
  }
  for (const auto* cells : {&sources_, &targets_}) {
    std::set<int> seen;
    for (const int cell : *cells) {
      if (cell < 0 || cell >= grid_->num_cells()) {
        throw DataError("agent cell " + std::to_string(cell) + " out of bounds");
      }
      if (!grid_->passable(cell)) {
        throw DataError("agent cell " + describe(*grid_, cell) + " is blocked");
      }
      if (!seen.insert(cell).second) {
        throw DataError(std::string(cells == &sources_ ? "source" : "target") + " " +
                        describe(*grid_, cell) + " shared by two agents");
      }
    }
  }
  paths_.reserve(sources_.size());
  for (std::size_t i = 0; i < sources_.size(); ++i) {
    paths_.push_back(shortest_path(*grid_, sources_[i], targets_[i]));
    paths_.back().agent = static_cast<int>(i);
  }
}

MapfInstance MapfInstance::from_scenario(std::shared_ptr<const GridMap> grid,
                                         const std::vector<ScenarioEntry>& entries, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > entries.size()) {
    throw DataError("scenario has " + std::to_string(entries.size()) + " agents, requested " +
                    std::to_string(k));
  }
  std::vector<int> sources;
  std::vector<int> targets;
  for (int i = 0; i < k; ++i) {
    const auto& e = entries[i];
    if (!grid->in_bounds(e.start.x, e.start.y) || !grid->in_bounds(e.goal.x, e.goal.y)) {
      throw DataError("scenario entry " + std::to_string(i) + " out of bounds");
    }
    sources.push_back(grid->cell_id(e.start.x, e.start.y));
    targets.push_back(grid->cell_id(e.goal.x, e.goal.y));
  }
  return MapfInstance(std::move(grid), std::move(sources), std::move(targets));
}

}  // namespace mapfsel
