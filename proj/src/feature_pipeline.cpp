#include "mapfsel/feature_pipeline.hpp"

#include <cstdio>
#include <exception>
#include <filesystem>

#include <omp.h>

#include "mapfsel/errors.hpp"
#include "mapfsel/graph_encode.hpp"

namespace mapfsel {

FeatureSubset::FeatureSubset(unsigned mask) : mask_(mask) {
  if (mask == 0 || mask > 7) throw UsageError("feature subset must enable at least one block");
}

FeatureSubset FeatureSubset::parse(std::string_view text) {
  if (text == "all") return all();
  unsigned mask = 0;
  for (auto part : split(text, '+')) {
    if (part == "kbs") {
      mask |= static_cast<unsigned>(FeatureBlock::kbs);
    } else if (part == "g2v") {
      mask |= static_cast<unsigned>(FeatureBlock::g2v);
    } else if (part == "fg2v") {
      mask |= static_cast<unsigned>(FeatureBlock::fg2v);
    } else {
      throw UsageError("unknown feature block '" + std::string(part) +
                       "' (expected kbs, g2v, fg2v or all)");
    }
  }
  return FeatureSubset(mask);
}

std::vector<FeatureSubset> FeatureSubset::ablation_set() {
  return {FeatureSubset(1), FeatureSubset(2), FeatureSubset(4), FeatureSubset(6),
          FeatureSubset(3), FeatureSubset(5), FeatureSubset(7)};
}

std::string FeatureSubset::name() const {
  if (mask_ == 7) return "all";
  std::string out;
  for (const auto& [block, label] : {std::pair{FeatureBlock::kbs, "kbs"},
                                     std::pair{FeatureBlock::g2v, "g2v"},
                                     std::pair{FeatureBlock::fg2v, "fg2v"}}) {
    if (!has(block)) continue;
    if (!out.empty()) out += '+';
    out += label;
  }
  return out;
}

int FeatureSubset::dimension(int embedding_dim) const {
  return (has(FeatureBlock::kbs) ? kNumKbsFeatures : 0) +
         (has(FeatureBlock::g2v) ? embedding_dim : 0) +
         (has(FeatureBlock::fg2v) ? embedding_dim : 0);
}

FeatureVector extract(const MapfInstance& instance, const FeatherConfig& config,
                      Execution exec) {
  const FeatureLayout layout{config.dimension()};
  FeatureVector v;
  v.values.reserve(layout.total());
  const auto kbs = kbs_features(instance);
  v.values.insert(v.values.end(), kbs.values.begin(), kbs.values.end());
  const auto g2v = embed_graph(encode_g2v(instance), config, exec);
  v.values.insert(v.values.end(), g2v.values.begin(), g2v.values.end());
  const auto fg2v = embed_graph(encode_fg2v(instance), config, exec);
  v.values.insert(v.values.end(), fg2v.values.begin(), fg2v.values.end());
  return v;
}

std::vector<int> selected_columns(FeatureSubset subset, int embedding_dim) {
  const FeatureLayout layout{embedding_dim};
  std::vector<int> cols;
  cols.reserve(subset.dimension(embedding_dim));
  auto add = [&](int begin, int count) {
    for (int i = 0; i < count; ++i) cols.push_back(begin + i);
  };
  if (subset.has(FeatureBlock::kbs)) add(layout.kbs_begin(), kNumKbsFeatures);
  if (subset.has(FeatureBlock::g2v)) add(layout.g2v_begin(), embedding_dim);
  if (subset.has(FeatureBlock::fg2v)) add(layout.fg2v_begin(), embedding_dim);
  return cols;
}

std::vector<double> select_blocks(std::span<const double> values, FeatureSubset subset,
                                  int embedding_dim) {
  if (values.size() != static_cast<std::size_t>(FeatureLayout{embedding_dim}.total())) {
    throw DataError("feature vector has " + std::to_string(values.size()) +
                    " entries, expected " + std::to_string(FeatureLayout{embedding_dim}.total()));
  }
  std::vector<double> out;
  for (const int c : selected_columns(subset, embedding_dim)) out.push_back(values[c]);
  return out;
}

const std::vector<double>* FeatureStore::find(const InstanceKey& key) const {
  const auto it = rows_.find(key);
  return it == rows_.end() ? nullptr : &it->second;
}

void FeatureStore::insert(const InstanceKey& key, std::vector<double> values) {
  if (values.size() != static_cast<std::size_t>(dimension_)) {
    throw InvariantError("feature row for " + key.to_string() + " has wrong dimension");
  }
  rows_[key] = std::move(values);
}

std::string FeatureStore::to_csv() const {
  std::vector<InstanceKey> order;
  order.reserve(rows_.size());
  for (const auto& [key, _] : rows_) order.push_back(key);
  return to_csv(order);
}

std::string FeatureStore::to_csv(const std::vector<InstanceKey>& order) const {
  std::string out = "grid,scenario,num_agents";
  for (int i = 0; i < dimension_; ++i) out += ",f" + std::to_string(i);
  out += '\n';
  for (const auto& key : order) {
    const auto* values = find(key);
    if (!values) throw InvariantError("no features for " + key.to_string());
    out += key.grid + ',' + key.scenario + ',' + std::to_string(key.num_agents);
    for (const double v : *values) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

FeatureStore FeatureStore::from_csv(std::string_view bytes) {
  const auto lines = split_lines(bytes);
  if (lines.empty()) throw ParseError("feature file is empty");
  const auto header = split(lines[0], ',');
  if (header.size() < 4 || header[0] != "grid" || header[1] != "scenario" ||
      header[2] != "num_agents") {
    throw ParseError("line 1: expected header 'grid,scenario,num_agents,f0,...'");
  }
  const int dim = static_cast<int>(header.size()) - 3;
  for (int i = 0; i < dim; ++i) {
    if (header[3 + i] != "f" + std::to_string(i)) {
      throw ParseError("line 1: column " + std::to_string(4 + i) + " should be f" +
                       std::to_string(i));
    }
  }
  FeatureStore store(dim);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split(lines[i], ',');
    const std::string where = "line " + std::to_string(i + 1) + ": ";
    if (fields.size() != header.size()) throw ParseError(where + "wrong number of columns");
    InstanceKey key{std::string(fields[0]), std::string(fields[1]), 0};
    std::vector<double> values(dim);
    try {
      key.num_agents = parse_int(fields[2]);
      for (int c = 0; c < dim; ++c) values[c] = parse_double(fields[3 + c]);
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
    store.rows_[key] = std::move(values);
  }
  return store;
}

FeatureCache::FeatureCache(std::string dir, const FeatherConfig& config)
    : dir_(std::move(dir)),
      fingerprint_(config.fingerprint()),
      dimension_(FeatureLayout{config.dimension()}.total()) {}

std::string FeatureCache::path() const {
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fingerprint_));
  return (std::filesystem::path(dir_) / ("features-" + std::string(hex) + ".csv")).string();
}

FeatureStore FeatureCache::load() const {
  if (!std::filesystem::exists(path())) return FeatureStore(dimension_);
  auto store = FeatureStore::from_csv(read_file(path()));
  if (store.dimension() != dimension_) {
    throw DataError("cache file '" + path() + "' has the wrong dimension");
  }
  return store;
}

void FeatureCache::save(const FeatureStore& store) const { write_file_atomic(path(), store.to_csv()); }

std::size_t extract_batch(const std::vector<ExtractJob>& jobs, const FeatherConfig& config,
                          FeatureStore& store, Execution exec) {
  std::vector<const ExtractJob*> todo;
  for (const auto& job : jobs) {
    if (!store.find(job.key)) todo.push_back(&job);
  }
  std::vector<std::vector<double>> results(todo.size());
  std::vector<std::exception_ptr> errors(todo.size());
  const int n = static_cast<int>(todo.size());

  auto run = [&](int i) {
    try {
      const auto& job = *todo[i];
      const auto instance =
          MapfInstance::from_scenario(job.grid, *job.scenario, job.key.num_agents);
      // Instances already run in parallel; keep the per-graph kernels serial.
      results[i] = extract(instance, config, Execution::serial).values;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < n; ++i) run(i);
  } else {
    for (int i = 0; i < n; ++i) run(i);
  }

  for (int i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw DataError("instance " + todo[i]->key.to_string() + ": " + e.what());
    }
  }
  for (int i = 0; i < n; ++i) store.insert(todo[i]->key, std::move(results[i]));
  return todo.size();
}

}  // namespace mapfsel
