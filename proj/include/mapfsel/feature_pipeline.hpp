#pragma once

// Full per-instance feature vector: hand-crafted block, then the embedding
// of the shortest-path graph, then the embedding of the full graph with
// agent edges. Under default settings that is 20 + 500 + 500 = 1020 values.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mapfsel/benchmark_io.hpp"
#include "mapfsel/execution.hpp"
#include "mapfsel/feather.hpp"
#include "mapfsel/handcrafted.hpp"
#include "mapfsel/mapf_model.hpp"

namespace mapfsel {

enum class FeatureBlock : unsigned { kbs = 1, g2v = 2, fg2v = 4 };

class FeatureSubset {
 public:
  FeatureSubset() = default;
  explicit FeatureSubset(unsigned mask);  // throws UsageError on an empty mask

  static FeatureSubset all() { return FeatureSubset(7); }
  // "kbs", "g2v", "fg2v", "all", or '+'-joined blocks such as "kbs+fg2v".
  static FeatureSubset parse(std::string_view text);
  // The seven non-empty subsets in ablation order.
  static std::vector<FeatureSubset> ablation_set();

  bool has(FeatureBlock b) const { return (mask_ & static_cast<unsigned>(b)) != 0; }
  unsigned mask() const { return mask_; }
  std::string name() const;
  int dimension(int embedding_dim) const;

  friend bool operator==(const FeatureSubset&, const FeatureSubset&) = default;

 private:
  unsigned mask_ = 7;
};

struct FeatureLayout {
  int embedding_dim = 500;
  int kbs_begin() const { return 0; }
  int g2v_begin() const { return kNumKbsFeatures; }
  int fg2v_begin() const { return kNumKbsFeatures + embedding_dim; }
  int total() const { return kNumKbsFeatures + 2 * embedding_dim; }
};

struct FeatureVector {
  InstanceKey key;
  std::vector<double> values;
};

FeatureVector extract(const MapfInstance& instance, const FeatherConfig& config,
                      Execution exec = Execution::parallel);

// Enabled blocks concatenated in canonical order.
std::vector<double> select_blocks(std::span<const double> values, FeatureSubset subset,
                                  int embedding_dim = 500);
// Positions in the full layout that select_blocks keeps.
std::vector<int> selected_columns(FeatureSubset subset, int embedding_dim = 500);

// Instance features keyed by (grid, scenario, num_agents).
class FeatureStore {
 public:
  explicit FeatureStore(int dimension = FeatureLayout{}.total()) : dimension_(dimension) {}

  int dimension() const { return dimension_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<double>* find(const InstanceKey& key) const;
  void insert(const InstanceKey& key, std::vector<double> values);
  const std::map<InstanceKey, std::vector<double>>& rows() const { return rows_; }

  // Header "grid,scenario,num_agents,f0..f{D-1}"; rows sorted by key; values
  // written in shortest round-trip form.
  std::string to_csv() const;
  std::string to_csv(const std::vector<InstanceKey>& order) const;
  static FeatureStore from_csv(std::string_view bytes);

 private:
  int dimension_;
  std::map<InstanceKey, std::vector<double>> rows_;
};

// On-disk store of extracted vectors for one feature configuration.
class FeatureCache {
 public:
  FeatureCache(std::string dir, const FeatherConfig& config);
  std::string path() const;
  FeatureStore load() const;  // empty store when no cache file exists
  void save(const FeatureStore& store) const;

 private:
  std::string dir_;
  std::uint64_t fingerprint_;
  int dimension_;
};

struct ExtractJob {
  InstanceKey key;
  std::shared_ptr<const GridMap> grid;
  std::shared_ptr<const std::vector<ScenarioEntry>> scenario;
};

// Extracts every job not already present in `store`, in parallel across
// jobs. Returns the number of newly extracted vectors.
std::size_t extract_batch(const std::vector<ExtractJob>& jobs, const FeatherConfig& config,
                          FeatureStore& store, Execution exec = Execution::parallel);

}  // namespace mapfsel
