#include "mapfsel/splits_eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "json.hpp"
#include "mapfsel/errors.hpp"

namespace mapfsel {

namespace {

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(static_cast<double>(rng() >> 11) * 0x1.0p-53 * i);
    std::swap(v[i - 1], v[j]);
  }
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool starts_with_any(const std::string& s, std::initializer_list<std::string_view> prefixes) {
  return std::any_of(prefixes.begin(), prefixes.end(),
                     [&](std::string_view p) { return s.starts_with(p); });
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

Metrics mean_over(const std::vector<Metrics>& parts) {
  Metrics m;
  if (parts.empty()) return m;
  for (const auto& p : parts) {
    m.accuracy += p.accuracy;
    m.coverage += p.coverage;
    m.runtime += p.runtime;
    m.regret += p.regret;
    m.count += p.count;
  }
  const double k = static_cast<double>(parts.size());
  m.accuracy /= k;
  m.coverage /= k;
  m.runtime /= k;
  m.regret /= k;
  return m;
}

}  // namespace

GridTaxonomy::GridTaxonomy(std::map<std::string, std::string> types) : types_(std::move(types)) {
  for (const auto& [grid, type] : types_) set(grid, type);
}

void GridTaxonomy::set(const std::string& grid, const std::string& type) {
  const auto& known = grid_types();
  if (std::find(known.begin(), known.end(), type) == known.end()) {
    throw DataError("grid '" + grid + "' has unknown type '" + type + "'");
  }
  types_[grid] = type;
}

GridTaxonomy GridTaxonomy::from_csv(std::string_view bytes) {
  const auto lines = split_lines(bytes);
  if (lines.empty() || lines[0] != "grid,type") throw ParseError("line 1: expected header 'grid,type'");
  GridTaxonomy t;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split(lines[i], ',');
    if (fields.size() != 2) throw ParseError("line " + std::to_string(i + 1) + ": expected grid,type");
    t.set(std::string(fields[0]), std::string(fields[1]));
  }
  return t;
}

std::string GridTaxonomy::to_csv() const {
  std::string out = "grid,type\n";
  for (const auto& [grid, type] : types_) out += grid + ',' + type + '\n';
  return out;
}

std::optional<std::string> GridTaxonomy::infer(const std::string& grid) {
  const std::string g = lower(grid);
  for (const auto& type : grid_types()) {
    if (g.starts_with(type)) return type;
  }
  if (starts_with_any(g, {"berlin", "boston", "paris"})) return "city";
  if (starts_with_any(g, {"den", "brc", "lak", "ost", "orz", "ht_", "lt_", "w_", "arena"})) {
    return "game";
  }
  return std::nullopt;
}

std::string GridTaxonomy::type_of(const std::string& grid) const {
  if (const auto it = types_.find(grid); it != types_.end()) return it->second;
  if (auto t = infer(grid)) return *t;
  throw DataError("no grid type known for grid '" + grid + "'");
}

bool LabeledInstance::solvable() const {
  return std::any_of(solved.begin(), solved.end(), [](char s) { return s != 0; });
}

std::vector<LabeledInstance> derive_labels(const std::vector<RuntimeRecord>& records,
                                           const FeatureStore& features,
                                           const std::vector<std::string>& portfolio,
                                           const GridTaxonomy& taxonomy) {
  std::vector<LabeledInstance> out;
  out.reserve(records.size());
  for (const auto& record : records) {
    LabeledInstance li;
    li.key = record.key;
    li.grid_type = taxonomy.type_of(record.key.grid);
    li.features = features.find(record.key);
    if (!li.features) throw DataError("no features extracted for " + record.key.to_string());
    for (const auto& solver : portfolio) {
      const auto it = record.solver_runtimes.find(solver);
      const SolverRun run = it == record.solver_runtimes.end() ? SolverRun{} : it->second;
      li.runtimes.push_back(run.solved ? std::min(run.runtime_min, kRuntimeCapMinutes)
                                       : kRuntimeCapMinutes);
      li.solved.push_back(run.solved ? 1 : 0);
    }
    int best = -1;
    for (std::size_t c = 0; c < portfolio.size(); ++c) {
      if (li.solved[c] && (best < 0 || li.runtimes[c] < li.runtimes[best])) best = static_cast<int>(c);
    }
    if (best < 0) {
      best = 0;
      for (std::size_t c = 1; c < portfolio.size(); ++c) {
        if (li.runtimes[c] < li.runtimes[best]) best = static_cast<int>(c);
      }
    }
    li.label = best;
    li.oracle_runtime = li.runtimes[best];
    out.push_back(std::move(li));
  }
  return out;
}

Setup parse_setup(std::string_view name) {
  if (name == "in_grid") return Setup::in_grid;
  if (name == "in_grid_type") return Setup::in_grid_type;
  if (name == "between_grid_type") return Setup::between_grid_type;
  throw UsageError("unknown setup '" + std::string(name) +
                   "' (expected in_grid, in_grid_type or between_grid_type)");
}

std::string_view to_string(Setup s) {
  switch (s) {
    case Setup::in_grid: return "in_grid";
    case Setup::in_grid_type: return "in_grid_type";
    case Setup::between_grid_type: return "between_grid_type";
  }
  return "?";
}

Split make_split(const std::vector<LabeledInstance>& data, const SplitSpec& spec) {
  if (data.empty()) throw DataError("cannot split an empty dataset");
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw UsageError("test_fraction must be in (0, 1)");
  }
  std::mt19937_64 rng(spec.seed);
  std::vector<char> is_test(data.size(), 0);
  Split split;

  std::map<std::string, std::vector<std::size_t>> by_grid;
  std::map<std::string, std::set<std::string>> grids_of_type;
  for (std::size_t i = 0; i < data.size(); ++i) {
    by_grid[data[i].key.grid].push_back(i);
    grids_of_type[data[i].grid_type].insert(data[i].key.grid);
  }

  switch (spec.setup) {
    case Setup::in_grid: {
      for (auto& [grid, rows] : by_grid) {
        std::sort(rows.begin(), rows.end(),
                  [&](std::size_t a, std::size_t b) { return data[a].key < data[b].key; });
        shuffle(rows, rng);
        const auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * rows.size()));
        for (std::size_t k = 0; k < n_test && k < rows.size(); ++k) is_test[rows[k]] = 1;
      }
      break;
    }
    case Setup::in_grid_type: {
      bool any = false;
      std::set<std::string> test_grids;
      for (const auto& [type, grid_set] : grids_of_type) {
        if (grid_set.size() < 2) continue;
        any = true;
        std::vector<std::string> grids(grid_set.begin(), grid_set.end());
        std::vector<std::size_t> order(grids.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        shuffle(order, rng);
        const auto n_test = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(spec.test_fraction * grids.size())), 1,
            grids.size() - 1);
        for (std::size_t k = 0; k < n_test; ++k) test_grids.insert(grids[order[k]]);
      }
      if (!any) {
        throw DataError("in_grid_type split needs a grid type with at least two grids");
      }
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (test_grids.contains(data[i].key.grid)) is_test[i] = 1;
      }
      break;
    }
    case Setup::between_grid_type: {
      if (grids_of_type.size() < 2) {
        throw DataError("between_grid_type split needs at least two grid types");
      }
      std::string held_out = spec.test_type;
      if (held_out.empty()) {
        std::vector<std::size_t> order(grids_of_type.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        shuffle(order, rng);
        held_out = std::next(grids_of_type.begin(), static_cast<long>(order[0]))->first;
      } else if (!grids_of_type.contains(held_out)) {
        throw DataError("test grid type '" + held_out + "' has no instances");
      }
      split.test_type = held_out;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].grid_type == held_out) is_test[i] = 1;
      }
      break;
    }
  }

  for (std::size_t i = 0; i < data.size(); ++i) {
    (is_test[i] ? split.test : split.train).push_back(data[i]);
  }
  if (split.train.empty() || split.test.empty()) {
    throw DataError(std::string(to_string(spec.setup)) +
                    " split leaves an empty train or test set");
  }
  return split;
}

Policy oracle_policy() {
  return [](const LabeledInstance& li) { return li.label; };
}

Policy single_best_policy(const std::vector<LabeledInstance>& train, int* chosen) {
  if (train.empty()) throw DataError("single-best policy needs training data");
  const std::size_t c = train.front().runtimes.size();
  std::vector<double> total(c, 0.0);
  for (const auto& li : train) {
    for (std::size_t k = 0; k < c; ++k) total[k] += li.runtimes[k];
  }
  int best = 0;
  for (std::size_t k = 1; k < c; ++k) {
    if (total[k] < total[best]) best = static_cast<int>(k);
  }
  if (chosen) *chosen = best;
  return [best](const LabeledInstance&) { return best; };
}

double regret_percent(double runtime, double oracle_runtime) {
  const double alg = std::max(runtime, kRegretRuntimeFloor);
  const double oracle = std::max(oracle_runtime, kRegretRuntimeFloor);
  return 100.0 * (alg - oracle) / oracle;
}

namespace {

std::map<std::string, Metrics> per_type_metrics(const Policy& policy,
                                                const std::vector<LabeledInstance>& test,
                                                Metrics& overall) {
  std::map<std::string, Metrics> per_type;
  overall = {};
  for (const auto& li : test) {
    const int pick = policy(li);
    if (pick < 0 || static_cast<std::size_t>(pick) >= li.runtimes.size()) {
      throw InvariantError("policy chose solver index " + std::to_string(pick));
    }
    const double acc = pick == li.label ? 1.0 : 0.0;
    const double cov = li.solved[pick] ? 1.0 : 0.0;
    const double rt = li.runtimes[pick];
    const double rg = regret_percent(rt, li.oracle_runtime);
    for (Metrics* m : {&overall, &per_type[li.grid_type]}) {
      m->accuracy += acc;
      m->coverage += cov;
      m->runtime += rt;
      m->regret += rg;
      ++m->count;
    }
  }
  for (Metrics* m : {&overall}) {
    if (m->count == 0) continue;
    m->accuracy /= m->count;
    m->coverage /= m->count;
    m->runtime /= m->count;
    m->regret /= m->count;
  }
  for (auto& [_, m] : per_type) {
    m.accuracy /= m.count;
    m.coverage /= m.count;
    m.runtime /= m.count;
    m.regret /= m.count;
  }
  return per_type;
}

}  // namespace

Metrics evaluate(const Policy& policy, const std::vector<LabeledInstance>& test,
                 Aggregation mode) {
  Metrics overall;
  const auto per_type = per_type_metrics(policy, test, overall);
  if (mode == Aggregation::all) return overall;
  std::vector<Metrics> parts;
  for (const auto& [_, m] : per_type) parts.push_back(m);
  return mean_over(parts);
}

MethodReport evaluate_method(const std::string& name, const Policy& policy,
                             const std::vector<LabeledInstance>& test) {
  MethodReport r;
  r.method = name;
  r.per_type = per_type_metrics(policy, test, r.all);
  std::vector<Metrics> parts;
  for (const auto& [_, m] : r.per_type) parts.push_back(m);
  r.avg = mean_over(parts);
  return r;
}

std::string EvalReport::to_csv() const {
  std::string out =
      "method,all_acc,all_cov,all_rt,all_rg,avg_acc,avg_cov,avg_rt,avg_rg,instances\n";
  for (const auto& m : methods) {
    out += m.method + ',' + fmt(m.all.accuracy) + ',' + fmt(m.all.coverage) + ',' +
           fmt(m.all.runtime) + ',' + fmt(m.all.regret) + ',' + fmt(m.avg.accuracy) + ',' +
           fmt(m.avg.coverage) + ',' + fmt(m.avg.runtime) + ',' + fmt(m.avg.regret) + ',' +
           std::to_string(m.all.count) + '\n';
  }
  return out;
}

std::string EvalReport::per_type_csv() const {
  std::string out = "grid_type,method,acc,cov,rt,rg,instances\n";
  std::set<std::string> types;
  for (const auto& m : methods) {
    for (const auto& [t, _] : m.per_type) types.insert(t);
  }
  for (const auto& t : types) {
    for (const auto& m : methods) {
      const auto it = m.per_type.find(t);
      if (it == m.per_type.end()) continue;
      const auto& x = it->second;
      out += t + ',' + m.method + ',' + fmt(x.accuracy) + ',' + fmt(x.coverage) + ',' +
             fmt(x.runtime) + ',' + fmt(x.regret) + ',' + std::to_string(x.count) + '\n';
    }
  }
  return out;
}

std::string EvalReport::to_json() const {
  using nlohmann::json;
  auto metrics = [](const Metrics& m) {
    return json{{"acc", m.accuracy}, {"cov", m.coverage}, {"rt", m.runtime},
                {"rg", m.regret},    {"instances", m.count}};
  };
  json rows = json::array();
  for (const auto& m : methods) {
    json per_type = json::object();
    for (const auto& [t, x] : m.per_type) per_type[t] = metrics(x);
    rows.push_back({{"method", m.method},
                    {"all", metrics(m.all)},
                    {"avg", metrics(m.avg)},
                    {"per_grid_type", per_type}});
  }
  return json{{"setup", setup}, {"methods", rows}}.dump(2) + "\n";
}

}  // namespace mapfsel
