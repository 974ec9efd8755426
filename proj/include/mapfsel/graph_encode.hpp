#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mapfsel/mapf_model.hpp"

namespace mapfsel {

// Simple undirected graph with dense node ids 0..num_nodes-1.
struct EncodedGraph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;  // u < v, sorted, unique
  std::vector<int> node_origin;            // encoded node -> grid cell id (may be empty)

  // Sorts, drops self-loops and duplicate edges, orients pairs as u < v.
  void canonicalize();
};

// Subgraph induced by the cells on each agent's deterministic shortest path.
// Nodes are numbered in ascending cell-id order.
EncodedGraph encode_g2v(const MapfInstance& instance);

// Full passable grid plus one source-target edge per agent. Nodes follow the
// CellGraph numbering.
EncodedGraph encode_fg2v(const MapfInstance& instance);

// Debug edge list: "<num_nodes> <num_edges>" then one "u v" line per edge.
std::string write_edge_list(const EncodedGraph& graph);
EncodedGraph read_edge_list(std::string_view bytes);

}  // namespace mapfsel
