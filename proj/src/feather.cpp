#include "mapfsel/feather.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "mapfsel/errors.hpp"

namespace mapfsel {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 14;

std::vector<std::vector<int>> sorted_adjacency(const EncodedGraph& graph) {
  std::vector<std::vector<int>> adj(graph.num_nodes);
  for (const auto& [u, v] : graph.edges) {
    if (u == v) continue;
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

void propagate_serial(const std::vector<int>& offsets, const std::vector<int>& neighbors,
                      const double* in, double* out, int cols) {
  const int n = static_cast<int>(offsets.size()) - 1;
  for (int u = 0; u < n; ++u) {
    double* row = out + static_cast<std::size_t>(u) * cols;
    std::fill(row, row + cols, 0.0);
    const int deg = offsets[u + 1] - offsets[u];
    if (deg == 0) continue;
    const double w = 1.0 / deg;
    for (int k = offsets[u]; k < offsets[u + 1]; ++k) {
      const double* src = in + static_cast<std::size_t>(neighbors[k]) * cols;
      for (int c = 0; c < cols; ++c) row[c] += w * src[c];
    }
  }
}

void propagate_omp(const std::vector<int>& offsets, const std::vector<int>& neighbors,
                   const double* in, double* out, int cols) {
  const int n = static_cast<int>(offsets.size()) - 1;
#pragma omp parallel for schedule(static)
  for (int u = 0; u < n; ++u) {
    double* row = out + static_cast<std::size_t>(u) * cols;
    std::fill(row, row + cols, 0.0);
    const int deg = offsets[u + 1] - offsets[u];
    if (deg == 0) continue;
    const double w = 1.0 / deg;
    for (int k = offsets[u]; k < offsets[u + 1]; ++k) {
      const double* src = in + static_cast<std::size_t>(neighbors[k]) * cols;
      for (int c = 0; c < cols; ++c) row[c] += w * src[c];
    }
  }
}

// Pools each column of a row-major n x cols block into dst[0..cols).
void pool_block(const double* block, int n, int cols, Pooling pooling, double* dst,
                bool parallel) {
  if (n == 0) {
    std::fill(dst, dst + cols, 0.0);
    return;
  }
#pragma omp parallel for schedule(static) if (parallel)
  for (int c = 0; c < cols; ++c) {
    if (pooling == Pooling::max) {
      double best = -std::numeric_limits<double>::infinity();
      for (int u = 0; u < n; ++u) best = std::max(best, block[static_cast<std::size_t>(u) * cols + c]);
      dst[c] = best;
    } else {
      double sum = 0.0;
      for (int u = 0; u < n; ++u) sum += block[static_cast<std::size_t>(u) * cols + c];
      dst[c] = sum / n;
    }
  }
}

// Calls sink(attribute_index, scale, block) with the n x (2 * eval_points)
// block P^scale * [cos(theta X_a), sin(theta X_a)] for every attribute and scale.
template <typename Sink>
void for_each_scale(const EncodedGraph& graph, const FeatherConfig& config, Execution exec,
                    Sink&& sink) {
  config.validate();
  const WalkOperator walk(graph);
  const NodeMatrix attrs = node_attributes(graph, config.attributes);
  const int n = graph.num_nodes;
  const int cols = 2 * config.eval_points;
  std::vector<double> current(static_cast<std::size_t>(n) * cols);
  std::vector<double> next(current.size());

  for (int a = 0; a < attrs.cols; ++a) {
    for (int u = 0; u < n; ++u) {
      const double x = attrs.at(u, a);
      double* row = current.data() + static_cast<std::size_t>(u) * cols;
      for (int j = 1; j <= config.eval_points; ++j) {
        const double t = config.theta(j) * x;
        row[2 * (j - 1)] = std::cos(t);
        row[2 * (j - 1) + 1] = std::sin(t);
      }
    }
    for (int r = 1; r <= config.order; ++r) {
      walk.propagate(current, next, cols, exec);
      std::swap(current, next);
      sink(a, r, static_cast<const std::vector<double>&>(current));
    }
  }
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

Pooling parse_pooling(std::string_view name) {
  if (name == "max") return Pooling::max;
  if (name == "mean") return Pooling::mean;
  throw UsageError("unknown pooling '" + std::string(name) + "' (expected mean or max)");
}

std::string_view to_string(Pooling p) { return p == Pooling::max ? "max" : "mean"; }

void FeatherConfig::validate() const {
  if (order < 1) throw UsageError("feather order must be >= 1");
  if (eval_points < 1) throw UsageError("feather eval_points must be >= 1");
  if (!(theta_max > 0.0) || !std::isfinite(theta_max)) {
    throw UsageError("feather theta_max must be a positive number");
  }
  if (attributes.empty()) throw UsageError("feather needs at least one node attribute");
}

std::string FeatherConfig::canonical_string() const {
  std::string s = "feather/v1;order=" + std::to_string(order) +
                  ";eval_points=" + std::to_string(eval_points) +
                  ";theta_max=" + format_double(theta_max) + ";pooling=" +
                  std::string(to_string(pooling)) + ";attributes=";
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    if (i) s += ',';
    s += attributes[i] == NodeAttribute::log_degree ? "log_degree" : "clustering";
  }
  return s;
}

std::uint64_t FeatherConfig::fingerprint() const { return fnv1a(canonical_string()); }

NodeMatrix node_attributes(const EncodedGraph& graph,
                           const std::vector<NodeAttribute>& attributes) {
  const auto adj = sorted_adjacency(graph);
  const int n = graph.num_nodes;
  NodeMatrix m{n, static_cast<int>(attributes.size()),
               std::vector<double>(static_cast<std::size_t>(n) * attributes.size())};

  std::vector<double> clustering(n, 0.0);
  std::vector<char> mark(n, 0);
  for (int u = 0; u < n; ++u) {
    const auto deg = static_cast<double>(adj[u].size());
    if (adj[u].size() <= 1) continue;
    for (const int v : adj[u]) mark[v] = 1;
    long triangles = 0;
    for (const int v : adj[u]) {
      for (const int w : adj[v]) {
        if (w > v && mark[w]) ++triangles;
      }
    }
    for (const int v : adj[u]) mark[v] = 0;
    clustering[u] = triangles / (deg * (deg - 1.0) / 2.0);
  }

  for (int u = 0; u < n; ++u) {
    for (std::size_t a = 0; a < attributes.size(); ++a) {
      m.data[static_cast<std::size_t>(u) * m.cols + a] =
          attributes[a] == NodeAttribute::log_degree
              ? std::log1p(static_cast<double>(adj[u].size()))
              : clustering[u];
    }
  }
  return m;
}

WalkOperator::WalkOperator(const EncodedGraph& graph) {
  const auto adj = sorted_adjacency(graph);
  offsets_.reserve(adj.size() + 1);
  offsets_.push_back(0);
  for (const auto& list : adj) {
    neighbors_.insert(neighbors_.end(), list.begin(), list.end());
    offsets_.push_back(static_cast<int>(neighbors_.size()));
  }
}

void WalkOperator::propagate(std::span<const double> in, std::span<double> out, int cols,
                             Execution exec) const {
  const std::size_t expected = static_cast<std::size_t>(num_nodes()) * cols;
  if (in.size() != expected || out.size() != expected) {
    throw InvariantError("propagate: block size does not match graph");
  }
  const std::size_t work = neighbors_.size() * static_cast<std::size_t>(cols);
  if (exec == Execution::parallel && work >= kParallelWork && !omp_in_parallel()) {
    propagate_omp(offsets_, neighbors_, in.data(), out.data(), cols);
  } else {
    propagate_serial(offsets_, neighbors_, in.data(), out.data(), cols);
  }
}

std::vector<double> WalkOperator::apply_power(std::span<const double> in, int cols, int power,
                                              Execution exec) const {
  std::vector<double> current(in.begin(), in.end());
  std::vector<double> next(current.size());
  for (int r = 0; r < power; ++r) {
    propagate(current, next, cols, exec);
    std::swap(current, next);
  }
  return current;
}

NodeMatrix characteristic_node_embedding(const EncodedGraph& graph, const FeatherConfig& config,
                                         Execution exec) {
  const int n = graph.num_nodes;
  const int dim = config.dimension();
  const int cols = 2 * config.eval_points;
  NodeMatrix m{n, dim, std::vector<double>(static_cast<std::size_t>(n) * dim)};
  for_each_scale(graph, config, exec, [&](int a, int r, const std::vector<double>& block) {
    const int offset = (a * config.order + (r - 1)) * cols;
    for (int u = 0; u < n; ++u) {
      std::copy_n(block.data() + static_cast<std::size_t>(u) * cols, cols,
                  m.data.data() + static_cast<std::size_t>(u) * dim + offset);
    }
  });
  return m;
}

GraphEmbedding pool(const NodeMatrix& node_embeddings, Pooling pooling) {
  GraphEmbedding e;
  e.values.resize(node_embeddings.cols);
  pool_block(node_embeddings.data.data(), node_embeddings.rows, node_embeddings.cols, pooling,
             e.values.data(), false);
  return e;
}

GraphEmbedding embed_graph(const EncodedGraph& graph, const FeatherConfig& config,
                           Execution exec) {
  config.validate();
  GraphEmbedding e;
  e.config_fingerprint = config.fingerprint();
  e.values.assign(config.dimension(), 0.0);
  const int cols = 2 * config.eval_points;
  const bool parallel = exec == Execution::parallel && !omp_in_parallel() &&
                        static_cast<std::size_t>(graph.num_nodes) * cols >= kParallelWork;
  for_each_scale(graph, config, exec, [&](int a, int r, const std::vector<double>& block) {
    const int offset = (a * config.order + (r - 1)) * cols;
    pool_block(block.data(), graph.num_nodes, cols, config.pooling, e.values.data() + offset,
               parallel);
  });
  return e;
}

}  // namespace mapfsel
