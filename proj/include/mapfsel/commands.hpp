#pragma once

// Pipeline commands behind the `mapfsel` executable. Each command reads and
// writes files only; progress and timings go to stderr.

#include <cstdint>
#include <string>
#include <vector>

#include "mapfsel/feather.hpp"
#include "mapfsel/feature_pipeline.hpp"
#include "mapfsel/gbdt.hpp"
#include "mapfsel/splits_eval.hpp"

namespace mapfsel {

struct RunConfig {
  std::string maps_dir;
  std::string scens_dir;
  std::string results;     // runtime table CSV
  std::string grid_types;  // optional "grid,type" CSV; names are inferred otherwise
  std::string cache_dir;   // empty disables the feature cache
  std::string output_dir = "out";
  std::string features;  // feature matrix; default <output_dir>/features.csv
  std::string model;     // default <output_dir>/model.json

  FeatherConfig feather;
  FeatureSubset subset = FeatureSubset::all();
  SplitSpec split;
  HyperparamGrid grid;
  int folds = 4;
  std::uint64_t seed = 0;
  bool strict = false;
  std::vector<std::string> portfolio = default_portfolio();

  std::string features_path() const;
  std::string model_path() const;

  // Keys mirror the fields above; unknown keys are rejected.
  static RunConfig from_json(std::string_view text);
};

struct ExtractSummary {
  std::size_t instances = 0;
  std::size_t extracted = 0;  // the rest came from the cache
  double seconds = 0.0;
};

// Extracts features for every instance listed in the results table and
// writes the feature matrix.
ExtractSummary cmd_extract(const RunConfig& config);

struct TrainSummary {
  TuneResult tuning;
  GbdtModel model;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

// Tunes on the training split, fits the final model, writes the model file,
// the CV table and the importance report.
TrainSummary cmd_train(const RunConfig& config);

// Evaluates the saved model against Oracle and single-best on the test split
// recorded in the model; writes report_<setup>.{csv,json} and the per-type table.
EvalReport cmd_evaluate(const RunConfig& config);

// Trains and evaluates one selector per feature subset.
EvalReport cmd_ablate(const RunConfig& config);

struct SynthOptions {
  std::string out_dir;
  std::uint64_t seed = 0;
  int grids_per_type = 2;
  int scenarios_per_grid = 10;
  int agent_counts = 15;  // distinct agent counts per scenario
  int width = 32;
  int height = 32;
  double min_density = 0.01;
  double max_density = 0.08;
  // Runtimes are scaled by exp(u * noise), u uniform in [-1, 1].
  double noise = 0.0;
  // Planted rule: "density+corridor" (default) or "density", which uses only
  // the agent density and so transfers across grid types.
  std::string rule = "density+corridor";
};

struct SynthSummary {
  int grids = 0;
  int scenarios = 0;
  int instances = 0;
};

// Writes <out>/maps/*.map, <out>/scens/*.scen, <out>/results.csv and
// <out>/grid_types.csv.
SynthSummary cmd_synth(const SynthOptions& options);

// Solver the synthetic generator makes fastest, from the hand-crafted
// features of an instance.
int planted_solver(const KbsFeatures& features, bool use_corridors = true);

// Archetype generators used by cmd_synth.
GridMap generate_grid(const std::string& type, const std::string& name, int width, int height,
                      std::uint64_t seed);

}  // namespace mapfsel
