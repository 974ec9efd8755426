#include "mapfsel/handcrafted.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace mapfsel {

namespace {

struct Moments {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  m.min = *std::min_element(xs.begin(), xs.end());
  m.max = *std::max_element(xs.begin(), xs.end());
  for (const double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (const double x : xs) var += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(var / static_cast<double>(xs.size()));
  return m;
}

// Component sizes of the passable graph.
std::vector<int> component_sizes(const CellGraph& graph) {
  std::vector<int> label(graph.num_nodes(), -1);
  std::vector<int> sizes;
  std::vector<int> stack;
  for (int s = 0; s < graph.num_nodes(); ++s) {
    if (label[s] != -1) continue;
    const int id = static_cast<int>(sizes.size());
    sizes.push_back(0);
    label[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      ++sizes[id];
      for (const int* v = graph.neighbors_begin(u); v != graph.neighbors_end(u); ++v) {
        if (label[*v] == -1) {
          label[*v] = id;
          stack.push_back(*v);
        }
      }
    }
  }
  return sizes;
}

}  // namespace

KbsFeatures kbs_features(const MapfInstance& instance) {
  const GridMap& grid = instance.grid();
  const CellGraph graph(grid);
  const int k = instance.num_agents();
  const double cells = static_cast<double>(grid.num_cells());
  const double passable = static_cast<double>(graph.num_nodes());

  std::vector<double> lengths;
  std::vector<double> manhattan;
  std::vector<double> detour;
  std::vector<int> path_count(grid.num_cells(), 0);
  double length_sum = 0.0;
  for (const auto& path : instance.paths()) {
    const double len = path.moves();
    lengths.push_back(len);
    length_sum += len;
    const Cell s = grid.cell(path.cells.front());
    const Cell t = grid.cell(path.cells.back());
    const double md = std::abs(s.x - t.x) + std::abs(s.y - t.y);
    manhattan.push_back(md);
    detour.push_back(md > 0.0 ? len / md : 1.0);
    for (const int cell : path.cells) ++path_count[cell];
  }

  int shared = 0;
  int covered = 0;
  for (const int c : path_count) {
    if (c >= 1) ++covered;
    if (c >= 2) ++shared;
  }

  int corridor = 0;
  int open = 0;
  for (int u = 0; u < graph.num_nodes(); ++u) {
    const int d = graph.degree(u);
    if (d <= 2) ++corridor;
    if (d == 4) ++open;
  }
  const auto components = component_sizes(graph);
  const int largest =
      components.empty() ? 0 : *std::max_element(components.begin(), components.end());

  const Moments len = moments(lengths);
  const Moments md = moments(manhattan);
  const Moments det = moments(detour);

  KbsFeatures f;
  f.values = {static_cast<double>(grid.width()),
              static_cast<double>(grid.height()),
              passable,
              (cells - passable) / cells,
              static_cast<double>(k),
              k / passable,
              len.mean,
              len.max,
              len.min,
              len.std,
              length_sum / passable,
              static_cast<double>(shared),
              covered > 0 ? static_cast<double>(shared) / covered : 0.0,
              md.mean,
              md.std,
              det.mean,
              static_cast<double>(components.size()),
              corridor / passable,
              open / passable,
              largest / passable};
  return f;
}

}  // namespace mapfsel
