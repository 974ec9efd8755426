#include "mapfsel/commands.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "json.hpp"
#include "mapfsel/errors.hpp"

namespace mapfsel {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class StageTimer {
 public:
  explicit StageTimer(std::string stage)
      : stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  void done(const std::string& what) const {
    std::cerr << "[" << stage_ << "] " << what << " (" << seconds() << "s)\n";
  }

 private:
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

std::string with_extension(const std::string& name, const std::string& ext) {
  return name.ends_with(ext) ? name : name + ext;
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw UsageError("missing " + what + " path");
  if (!fs::is_regular_file(path)) throw DataError(what + " '" + path + "' does not exist");
}

void require_dir(const std::string& path, const std::string& what) {
  if (path.empty()) throw UsageError("missing " + what + " directory");
  if (!fs::is_directory(path)) throw DataError(what + " directory '" + path + "' does not exist");
}

// Rethrows parse errors with the file name attached.
template <typename F>
auto with_file(const std::string& path, F&& f) {
  try {
    return f(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError("'" + path + "': " + e.what());
  } catch (const DataError& e) {
    throw DataError("'" + path + "': " + e.what());
  }
}

std::vector<RuntimeRecord> load_records(const RunConfig& cfg) {
  require_file(cfg.results, "results table");
  auto records = with_file(cfg.results, [&](const std::string& bytes) {
    return load_results(bytes, cfg.portfolio, cfg.strict);
  });
  if (records.empty()) throw DataError("results table '" + cfg.results + "' has no rows");
  return records;
}

GridTaxonomy load_taxonomy(const RunConfig& cfg) {
  if (cfg.grid_types.empty()) return {};
  require_file(cfg.grid_types, "grid type table");
  return with_file(cfg.grid_types, [](const std::string& b) { return GridTaxonomy::from_csv(b); });
}

int embedding_dim_of(const FeatureStore& store) {
  const int dim = store.dimension() - kNumKbsFeatures;
  if (dim <= 0 || dim % 2 != 0) {
    throw DataError("feature matrix has " + std::to_string(store.dimension()) +
                    " columns, which is not a valid layout");
  }
  return dim / 2;
}

struct Prepared {
  FeatureStore store;
  std::vector<LabeledInstance> labels;
  Split split;
  int embedding_dim = 0;
};

Prepared prepare(const RunConfig& cfg, SplitSpec spec) {
  require_file(cfg.features_path(), "feature matrix");
  Prepared p;
  p.store = with_file(cfg.features_path(),
                      [](const std::string& b) { return FeatureStore::from_csv(b); });
  p.embedding_dim = embedding_dim_of(p.store);
  const auto records = load_records(cfg);
  p.labels = derive_labels(records, p.store, cfg.portfolio, load_taxonomy(cfg));
  p.split = make_split(p.labels, spec);
  return p;
}

SplitSpec split_spec(const RunConfig& cfg) {
  SplitSpec spec = cfg.split;
  spec.seed = cfg.seed;
  return spec;
}

TrainingSet training_set(const std::vector<LabeledInstance>& rows, FeatureSubset subset,
                         int embedding_dim, int num_classes) {
  TrainingSet ts;
  ts.num_features = subset.dimension(embedding_dim);
  ts.num_classes = num_classes;
  for (const auto& li : rows) {
    ts.add(select_blocks(*li.features, subset, embedding_dim), li.label);
    ts.keys.push_back(li.key);
  }
  return ts;
}

struct Fit {
  TuneResult tuning;
  GbdtModel model;
};

Fit fit_selector(const RunConfig& cfg, const Prepared& p, FeatureSubset subset) {
  const auto ts = training_set(p.split.train, subset, p.embedding_dim,
                               static_cast<int>(cfg.portfolio.size()));
  StageTimer timer("train:" + subset.name());
  Fit fit;
  fit.tuning = tune(ts, cfg.grid.points(), cfg.folds, cfg.seed);
  fit.model = train(ts, fit.tuning.best, cfg.seed);
  fit.model.class_names = cfg.portfolio;
  for (const int c : selected_columns(subset, p.embedding_dim)) {
    fit.model.feature_names.push_back("f" + std::to_string(c));
  }
  fit.model.metadata = {
      {"subset", subset.name()},
      {"setup", std::string(to_string(cfg.split.setup))},
      {"test_fraction", format_double(cfg.split.test_fraction)},
      {"test_type", p.split.test_type},
      {"seed", std::to_string(cfg.seed)},
      {"embedding_dim", std::to_string(p.embedding_dim)},
      {"feather", cfg.feather.canonical_string()},
  };
  timer.done(std::to_string(ts.size()) + " rows x " + std::to_string(ts.num_features) +
             " features, " + std::to_string(cfg.grid.points().size()) + " grid points");
  return fit;
}

Policy model_policy(const GbdtModel& model, FeatureSubset subset, int embedding_dim) {
  return [&model, subset, embedding_dim](const LabeledInstance& li) {
    return model.predict(select_blocks(*li.features, subset, embedding_dim)).label;
  };
}

std::string cv_table(const TuneResult& t) {
  std::string out = "max_depth,rounds,learning_rate,min_child_weight,l2_lambda,subsample,colsample";
  const std::size_t folds = t.table.empty() ? 0 : t.table.front().fold_accuracy.size();
  for (std::size_t f = 0; f < folds; ++f) out += ",fold" + std::to_string(f + 1);
  out += ",mean_accuracy,selected\n";
  for (const auto& row : t.table) {
    const auto& p = row.params;
    out += std::to_string(p.max_depth) + ',' + std::to_string(p.rounds) + ',' +
           format_double(p.learning_rate) + ',' + format_double(p.min_child_weight) + ',' +
           format_double(p.l2_lambda) + ',' + format_double(p.subsample) + ',' +
           format_double(p.colsample);
    for (const double a : row.fold_accuracy) out += ',' + format_double(a);
    out += ',' + format_double(row.mean_accuracy) + ',' + (p == t.best ? "1" : "0") + '\n';
  }
  return out;
}

// Importance over the full feature layout; unused and unselected columns are 0.
std::string importance_table(const GbdtModel& model, int embedding_dim) {
  const FeatureLayout layout{embedding_dim};
  std::vector<double> full(layout.total(), 0.0);
  const auto report = importance(model);
  for (int i = 0; i < model.num_features; ++i) {
    full[parse_int(std::string_view(model.feature_names[i]).substr(1))] = report.gain[i];
  }
  std::string out = "feature,block,importance\n";
  for (int c = 0; c < layout.total(); ++c) {
    const char* block = c < layout.g2v_begin() ? "kbs" : c < layout.fg2v_begin() ? "g2v" : "fg2v";
    out += "f" + std::to_string(c) + ',' + block + ',' + format_double(full[c]) + '\n';
  }
  return out;
}

void write_report(const EvalReport& report, const std::string& dir, const std::string& stem) {
  const fs::path root(dir);
  write_file_atomic((root / (stem + ".csv")).string(), report.to_csv());
  write_file_atomic((root / (stem + "_per_type.csv")).string(), report.per_type_csv());
  write_file_atomic((root / (stem + ".json")).string(), report.to_json());
}

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> keys,
                    const std::string& where) {
  for (const auto& [k, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw UsageError("unknown config key '" + where + k + "'");
    }
  }
}

}  // namespace

std::string RunConfig::features_path() const {
  return features.empty() ? (fs::path(output_dir) / "features.csv").string() : features;
}

std::string RunConfig::model_path() const {
  return model.empty() ? (fs::path(output_dir) / "model.json").string() : model;
}

RunConfig RunConfig::from_json(std::string_view text) {
  RunConfig cfg;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    reject_unknown(j,
                   {"maps_dir", "scens_dir", "results", "grid_types", "cache_dir", "output_dir",
                    "features", "model", "seed", "folds", "strict", "portfolio", "subset",
                    "feather", "split", "grid"},
                   "");
    read_key(j, "maps_dir", cfg.maps_dir);
    read_key(j, "scens_dir", cfg.scens_dir);
    read_key(j, "results", cfg.results);
    read_key(j, "grid_types", cfg.grid_types);
    read_key(j, "cache_dir", cfg.cache_dir);
    read_key(j, "output_dir", cfg.output_dir);
    read_key(j, "features", cfg.features);
    read_key(j, "model", cfg.model);
    read_key(j, "seed", cfg.seed);
    read_key(j, "folds", cfg.folds);
    read_key(j, "strict", cfg.strict);
    read_key(j, "portfolio", cfg.portfolio);
    if (j.contains("subset")) cfg.subset = FeatureSubset::parse(j.at("subset").get<std::string>());
    if (j.contains("feather")) {
      const auto& f = j.at("feather");
      reject_unknown(f, {"order", "eval_points", "theta_max", "pooling"}, "feather.");
      read_key(f, "order", cfg.feather.order);
      read_key(f, "eval_points", cfg.feather.eval_points);
      read_key(f, "theta_max", cfg.feather.theta_max);
      if (f.contains("pooling")) cfg.feather.pooling = parse_pooling(f.at("pooling").get<std::string>());
    }
    if (j.contains("split")) {
      const auto& s = j.at("split");
      reject_unknown(s, {"setup", "test_fraction", "test_type"}, "split.");
      if (s.contains("setup")) cfg.split.setup = parse_setup(s.at("setup").get<std::string>());
      read_key(s, "test_fraction", cfg.split.test_fraction);
      read_key(s, "test_type", cfg.split.test_type);
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      reject_unknown(g,
                     {"max_depth", "rounds", "learning_rate", "min_child_weight", "l2_lambda",
                      "subsample", "colsample"},
                     "grid.");
      read_key(g, "max_depth", cfg.grid.max_depth);
      read_key(g, "rounds", cfg.grid.rounds);
      read_key(g, "learning_rate", cfg.grid.learning_rate);
      read_key(g, "min_child_weight", cfg.grid.min_child_weight);
      read_key(g, "l2_lambda", cfg.grid.l2_lambda);
      read_key(g, "subsample", cfg.grid.subsample);
      read_key(g, "colsample", cfg.grid.colsample);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
  cfg.feather.validate();
  return cfg;
}

ExtractSummary cmd_extract(const RunConfig& cfg) {
  require_dir(cfg.maps_dir, "maps");
  require_dir(cfg.scens_dir, "scenarios");
  cfg.feather.validate();
  const auto records = load_records(cfg);
  StageTimer timer("extract");

  const FeatureLayout layout{cfg.feather.dimension()};
  std::optional<FeatureCache> cache;
  FeatureStore store(layout.total());
  if (!cfg.cache_dir.empty()) {
    cache.emplace(cfg.cache_dir, cfg.feather);
    store = cache->load();
  }

  // Map and scenario files are only read for instances the cache lacks.
  std::map<std::string, std::shared_ptr<const GridMap>> grids;
  std::map<std::string, std::shared_ptr<const std::vector<ScenarioEntry>>> scens;
  std::vector<ExtractJob> jobs;
  std::vector<InstanceKey> order;
  std::set<InstanceKey> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.key).second) continue;
    order.push_back(r.key);
    if (store.find(r.key)) continue;
    auto& grid = grids[r.key.grid];
    if (!grid) {
      const auto path = (fs::path(cfg.maps_dir) / with_extension(r.key.grid, ".map")).string();
      require_file(path, "map file");
      grid = std::make_shared<const GridMap>(
          with_file(path, [&](const std::string& b) { return parse_map(b, r.key.grid); }));
    }
    auto& scen = scens[r.key.grid + "\n" + r.key.scenario];
    if (!scen) {
      const auto path =
          (fs::path(cfg.scens_dir) / with_extension(r.key.scenario, ".scen")).string();
      require_file(path, "scenario file");
      scen = std::make_shared<const std::vector<ScenarioEntry>>(
          with_file(path, [&](const std::string& b) { return parse_scen(b, *grid); }));
    }
    jobs.push_back({r.key, grid, scen});
  }

  ExtractSummary summary;
  summary.instances = order.size();
  summary.extracted = extract_batch(jobs, cfg.feather, store);
  if (cache && summary.extracted > 0) cache->save(store);
  write_file_atomic(cfg.features_path(), store.to_csv(order));
  summary.seconds = timer.seconds();
  timer.done(std::to_string(summary.instances) + " instances, " +
             std::to_string(summary.extracted) + " extracted, " +
             std::to_string(summary.instances - summary.extracted) + " from cache");
  return summary;
}

TrainSummary cmd_train(const RunConfig& cfg) {
  const auto p = prepare(cfg, split_spec(cfg));
  auto fit = fit_selector(cfg, p, cfg.subset);
  const fs::path out(cfg.output_dir);
  write_file_atomic(cfg.model_path(), fit.model.to_json());
  write_file_atomic((out / "cv_report.csv").string(), cv_table(fit.tuning));
  write_file_atomic((out / "importance.csv").string(), importance_table(fit.model, p.embedding_dim));
  TrainSummary s;
  s.train_size = p.split.train.size();
  s.test_size = p.split.test.size();
  s.tuning = std::move(fit.tuning);
  s.model = std::move(fit.model);
  return s;
}

EvalReport cmd_evaluate(const RunConfig& cfg) {
  require_file(cfg.model_path(), "model file");
  const auto model = with_file(cfg.model_path(), [](const std::string& b) { return GbdtModel::from_json(b); });
  auto meta = [&](const std::string& key) {
    const auto it = model.metadata.find(key);
    if (it == model.metadata.end()) throw DataError("model file lacks '" + key + "' metadata");
    return it->second;
  };
  SplitSpec spec;
  spec.setup = parse_setup(meta("setup"));
  spec.test_fraction = parse_double(meta("test_fraction"));
  spec.test_type = meta("test_type");
  spec.seed = std::stoull(meta("seed"));
  const auto subset = FeatureSubset::parse(meta("subset"));

  StageTimer timer("evaluate");
  const auto p = prepare(cfg, spec);
  if (std::to_string(p.embedding_dim) != meta("embedding_dim")) {
    throw DataError("feature matrix layout does not match the model");
  }
  if (subset.dimension(p.embedding_dim) != model.num_features) {
    throw DataError("model expects " + std::to_string(model.num_features) + " features");
  }

  EvalReport report;
  report.setup = std::string(to_string(spec.setup));
  report.methods.push_back(
      evaluate_method("selector:" + subset.name(), model_policy(model, subset, p.embedding_dim), p.split.test));
  report.methods.push_back(evaluate_method("single-best", single_best_policy(p.split.train), p.split.test));
  report.methods.push_back(evaluate_method("oracle", oracle_policy(), p.split.test));
  write_report(report, cfg.output_dir, "report_" + report.setup);
  timer.done(std::to_string(p.split.test.size()) + " test instances");
  return report;
}

EvalReport cmd_ablate(const RunConfig& cfg) {
  const auto p = prepare(cfg, split_spec(cfg));
  EvalReport report;
  report.setup = std::string(to_string(cfg.split.setup));
  for (const auto subset : FeatureSubset::ablation_set()) {
    const auto fit = fit_selector(cfg, p, subset);
    report.methods.push_back(evaluate_method(
        subset.name(), model_policy(fit.model, subset, p.embedding_dim), p.split.test));
  }
  report.methods.push_back(evaluate_method("single-best", single_best_policy(p.split.train), p.split.test));
  report.methods.push_back(evaluate_method("oracle", oracle_policy(), p.split.test));
  write_report(report, cfg.output_dir, "ablation_" + report.setup);
  return report;
}

}  // namespace mapfsel
