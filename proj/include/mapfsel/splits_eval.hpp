#pragma once

// Labels, train/test splits for the three generalization setups, and the
// accuracy / coverage / runtime / regret metrics.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mapfsel/benchmark_io.hpp"
#include "mapfsel/feature_pipeline.hpp"

namespace mapfsel {

// Runtimes are floored at this value (minutes) before computing regret.
inline constexpr double kRegretRuntimeFloor = 0.001;

inline const std::vector<std::string>& grid_types() {
  static const std::vector<std::string> types{"empty", "random", "warehouse", "game",
                                              "city",  "maze",   "room"};
  return types;
}

// Grid name -> grid type.
class GridTaxonomy {
 public:
  GridTaxonomy() = default;
  explicit GridTaxonomy(std::map<std::string, std::string> types);

  // CSV "grid,type".
  static GridTaxonomy from_csv(std::string_view bytes);
  std::string to_csv() const;

  // Explicit entry first, then the MovingAI naming conventions (e.g.
  // "maze-32-32-2" -> maze, "Berlin_1_256" -> city, "den520d" -> game).
  // Throws DataError if neither applies.
  std::string type_of(const std::string& grid) const;
  static std::optional<std::string> infer(const std::string& grid);

  void set(const std::string& grid, const std::string& type);

 private:
  std::map<std::string, std::string> types_;
};

struct LabeledInstance {
  InstanceKey key;
  std::string grid_type;
  const std::vector<double>* features = nullptr;  // owned by a FeatureStore
  int label = 0;
  double oracle_runtime = kRuntimeCapMinutes;
  std::vector<double> runtimes;  // per portfolio solver, capped
  std::vector<char> solved;

  bool solvable() const;
};

// Label = fastest solved solver (ties -> portfolio order); when nothing
// solved, argmin over the capped runtimes with oracle runtime 5.0.
std::vector<LabeledInstance> derive_labels(const std::vector<RuntimeRecord>& records,
                                           const FeatureStore& features,
                                           const std::vector<std::string>& portfolio,
                                           const GridTaxonomy& taxonomy);

enum class Setup { in_grid, in_grid_type, between_grid_type };
Setup parse_setup(std::string_view name);
std::string_view to_string(Setup s);

struct SplitSpec {
  Setup setup = Setup::in_grid;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  // between_grid_type only: held-out type; chosen from the data by seed when empty.
  std::string test_type;
};

struct Split {
  std::vector<LabeledInstance> train;
  std::vector<LabeledInstance> test;
  std::string test_type;  // the held-out type for between_grid_type
};

Split make_split(const std::vector<LabeledInstance>& data, const SplitSpec& spec);

using Policy = std::function<int(const LabeledInstance&)>;

Policy oracle_policy();
// Constant policy: lowest mean capped runtime on train (ties -> lowest index).
Policy single_best_policy(const std::vector<LabeledInstance>& train, int* chosen = nullptr);

double regret_percent(double runtime, double oracle_runtime);

struct Metrics {
  double accuracy = 0.0;
  double coverage = 0.0;
  double runtime = 0.0;  // mean minutes
  double regret = 0.0;   // mean %Rg
  int count = 0;
};

enum class Aggregation { all, avg };

struct MethodReport {
  std::string method;
  Metrics all;  // mean over instances
  Metrics avg;  // mean of per-grid-type means
  std::map<std::string, Metrics> per_type;
};

Metrics evaluate(const Policy& policy, const std::vector<LabeledInstance>& test,
                 Aggregation mode);
MethodReport evaluate_method(const std::string& name, const Policy& policy,
                             const std::vector<LabeledInstance>& test);

struct EvalReport {
  std::string setup;
  std::vector<MethodReport> methods;

  // Rows = methods; All and Avg column groups.
  std::string to_csv() const;
  // Rows = (grid type, method).
  std::string per_type_csv() const;
  std::string to_json() const;
};

}  // namespace mapfsel
