#pragma once

// Whole-graph embedding from random-walk weighted characteristic functions
// of node attributes.
//
// For a node u, attribute a, walk scale r and evaluation point theta_j the
// node embedding holds the pair
//   sum_v P^r[u,v] cos(theta_j X[v,a]),  sum_v P^r[u,v] sin(theta_j X[v,a])
// where P = D^-1 A is the random-walk transition matrix (rows of isolated
// nodes are zero). Node embeddings are pooled column-wise into one vector.
//
// Layout of the D = attributes * order * eval_points * 2 entries:
//   index = ((a * order + (r - 1)) * eval_points + (j - 1)) * 2 + part
// with part 0 = real (cosine), 1 = imaginary (sine).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mapfsel/execution.hpp"
#include "mapfsel/graph_encode.hpp"

namespace mapfsel {

enum class Pooling { mean, max };
enum class NodeAttribute { log_degree, clustering };

Pooling parse_pooling(std::string_view name);
std::string_view to_string(Pooling p);

struct FeatherConfig {
  int order = 5;
  int eval_points = 25;
  double theta_max = 2.5;
  Pooling pooling = Pooling::max;
  std::vector<NodeAttribute> attributes{NodeAttribute::log_degree, NodeAttribute::clustering};

  int dimension() const {
    return static_cast<int>(attributes.size()) * order * eval_points * 2;
  }
  double theta(int j) const { return j * theta_max / eval_points; }  // j = 1..eval_points
  // Throws UsageError on non-positive order/eval_points/theta_max or no attributes.
  void validate() const;
  std::string canonical_string() const;
  std::uint64_t fingerprint() const;
};

struct GraphEmbedding {
  std::vector<double> values;
  std::uint64_t config_fingerprint = 0;
};

// Dense row-major matrix.
struct NodeMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
};

// Columns in config.attributes order; defaults to (log-degree, clustering).
NodeMatrix node_attributes(const EncodedGraph& graph,
                           const std::vector<NodeAttribute>& attributes = {
                               NodeAttribute::log_degree, NodeAttribute::clustering});

// Random-walk transition operator P = D^-1 A in CSR form with ascending
// neighbor lists. Never materializes P^r.
class WalkOperator {
 public:
  explicit WalkOperator(const EncodedGraph& graph);

  int num_nodes() const { return static_cast<int>(offsets_.size()) - 1; }
  int degree(int u) const { return offsets_[u + 1] - offsets_[u]; }

  // out = P * in for row-major n x cols blocks. Each output row sums its
  // neighbors in ascending id order, so both paths agree bit for bit.
  void propagate(std::span<const double> in, std::span<double> out, int cols,
                 Execution exec = Execution::parallel) const;

  // P^power * in.
  std::vector<double> apply_power(std::span<const double> in, int cols, int power,
                                  Execution exec = Execution::parallel) const;

 private:
  std::vector<int> offsets_;
  std::vector<int> neighbors_;
};

NodeMatrix characteristic_node_embedding(const EncodedGraph& graph, const FeatherConfig& config,
                                         Execution exec = Execution::parallel);

// Column-wise mean or max; zero vector for a matrix without rows.
GraphEmbedding pool(const NodeMatrix& node_embeddings, Pooling pooling);

// Streams scale by scale and pools on the fly, so memory stays O(n * eval_points).
GraphEmbedding embed_graph(const EncodedGraph& graph, const FeatherConfig& config,
                           Execution exec = Execution::parallel);

}  // namespace mapfsel
