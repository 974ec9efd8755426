#include "mapfsel/graph_encode.hpp"

#include <algorithm>
#include <array>

#include "mapfsel/errors.hpp"

namespace mapfsel {

void EncodedGraph::canonicalize() {
  for (auto& [u, v] : edges) {
    if (u > v) std::swap(u, v);
  }
  std::erase_if(edges, [](const auto& e) { return e.first == e.second; });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

EncodedGraph encode_g2v(const MapfInstance& instance) {
  const GridMap& grid = instance.grid();
  std::vector<int> local(grid.num_cells(), -1);
  for (const auto& path : instance.paths()) {
    for (const int cell : path.cells) local[cell] = 0;
  }

  EncodedGraph g;
  for (int cell = 0; cell < grid.num_cells(); ++cell) {
    if (local[cell] == 0) {
      local[cell] = g.num_nodes++;
      g.node_origin.push_back(cell);
    }
  }
  // Right and down neighbors enumerate every grid edge once.
  for (const int cell : g.node_origin) {
    const auto c = grid.cell(cell);
    for (const auto& [dx, dy] : std::array<std::array<int, 2>, 2>{{{1, 0}, {0, 1}}}) {
      const int nx = c.x + dx;
      const int ny = c.y + dy;
      if (!grid.in_bounds(nx, ny)) continue;
      const int other = local[grid.cell_id(nx, ny)];
      if (other >= 0 && grid.passable(nx, ny)) g.edges.emplace_back(local[cell], other);
    }
  }
  g.canonicalize();
  return g;
}

EncodedGraph encode_fg2v(const MapfInstance& instance) {
  const CellGraph cells(instance.grid());
  EncodedGraph g;
  g.num_nodes = cells.num_nodes();
  g.node_origin.reserve(g.num_nodes);
  for (int n = 0; n < g.num_nodes; ++n) g.node_origin.push_back(cells.node_cell(n));
  g.edges = cells.edges();
  for (int i = 0; i < instance.num_agents(); ++i) {
    const int s = cells.cell_node(instance.sources()[i]);
    const int t = cells.cell_node(instance.targets()[i]);
    if (s != t) g.edges.emplace_back(s, t);
  }
  g.canonicalize();
  return g;
}

std::string write_edge_list(const EncodedGraph& graph) {
  std::string out = std::to_string(graph.num_nodes) + ' ' + std::to_string(graph.edges.size()) + '\n';
  for (const auto& [u, v] : graph.edges) {
    out += std::to_string(u) + ' ' + std::to_string(v) + '\n';
  }
  return out;
}

EncodedGraph read_edge_list(std::string_view bytes) {
  const auto lines = split_lines(bytes);
  if (lines.empty()) throw ParseError("line 1: missing '<num_nodes> <num_edges>' header");
  auto pair_of = [](std::string_view line, std::size_t lineno) {
    const auto fields = split(line, ' ');
    if (fields.size() != 2) {
      throw ParseError("line " + std::to_string(lineno) + ": expected two integers");
    }
    try {
      return std::pair{parse_int(fields[0]), parse_int(fields[1])};
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  };
  EncodedGraph g;
  const auto [n, m] = pair_of(lines[0], 1);
  if (n < 0 || m < 0) throw ParseError("line 1: negative count");
  g.num_nodes = n;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto [u, v] = pair_of(lines[i], i + 1);
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw ParseError("line " + std::to_string(i + 1) + ": node id out of range");
    }
    g.edges.emplace_back(u, v);
  }
  if (g.edges.size() != static_cast<std::size_t>(m)) {
    throw ParseError("edge count " + std::to_string(g.edges.size()) + " != header " +
                     std::to_string(m));
  }
  g.canonicalize();
  return g;
}

}  // namespace mapfsel
