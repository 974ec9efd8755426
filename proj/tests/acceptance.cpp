// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.
//
//   acceptance --work-dir DIR --cli PATH/TO/mapfsel [--only NAME]

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "mapfsel/commands.hpp"
#include "mapfsel/errors.hpp"
#include "mapfsel/feather.hpp"
#include "mapfsel/feature_pipeline.hpp"
#include "mapfsel/gbdt.hpp"
#include "mapfsel/graph_encode.hpp"
#include "mapfsel/splits_eval.hpp"
#include "oracles/oracles.hpp"

using namespace mapfsel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path work;
  std::string cli;
};

// Tolerances and limits.
constexpr int kEmbedGraphs = 1000;
constexpr int kEmbedMaxNodes = 20;
constexpr double kEmbedEdgeProb = 0.3;
constexpr double kEmbedTol = 1e-9;
constexpr int kIsoGraphs = 1000;
constexpr int kIsoMaxNodes = 30;
constexpr double kIsoTol = 1e-12;
constexpr int kEncodingGrids = 200;
constexpr int kEncodingMaxSide = 16;
constexpr int kEncodingMaxAgents = 8;
constexpr int kPathGrids = 500;
constexpr int kPathMaxSide = 32;
constexpr int kFdPoints = 100;
constexpr double kFdTol = 1e-6;
constexpr int kMonotoneSets = 20;
constexpr double kBlobAccuracy = 0.90;
constexpr double kE2eAccuracy = 0.90;
constexpr double kBetweenMargin = 0.10;
constexpr double kExtractSecondsPerInstance = 2.0;

std::string fixed(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s.precision(2);
  s << std::scientific << v;
  return s.str();
}

int run(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<int> open_cells(const GridMap& g) {
  std::vector<int> out;
  for (int c = 0; c < g.num_cells(); ++c)
    if (g.passable(c)) out.push_back(c);
  return out;
}

// ---------------------------------------------------------------------------

Outcome embedding_oracle(const Context&) {
  std::mt19937_64 rng(20240101);
  const FeatherConfig cfg;
  double worst = 0;
  for (int i = 0; i < kEmbedGraphs; ++i) {
    const int n = 1 + static_cast<int>(rng() % kEmbedMaxNodes);
    const auto g = oracle::random_graph(n, kEmbedEdgeProb, rng);
    const auto got = embed_graph(g, cfg).values;
    const auto want = oracle::feather(g, cfg.order, cfg.eval_points, cfg.theta_max, true);
    for (std::size_t k = 0; k < got.size(); ++k) worst = std::max(worst, std::abs(got[k] - want[k]));
  }
  return {worst <= kEmbedTol, std::to_string(kEmbedGraphs) + " graphs, max |diff| " + sci(worst) +
                                  " (tol " + sci(kEmbedTol) + ")"};
}

Outcome isomorphism(const Context&) {
  std::mt19937_64 rng(20240102);
  const FeatherConfig cfg;
  double worst = 0;
  for (int i = 0; i < kIsoGraphs; ++i) {
    const int n = 1 + static_cast<int>(rng() % kIsoMaxNodes);
    const auto g = oracle::random_graph(n, 0.05 + 0.4 * oracle::unit(rng), rng);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto a = embed_graph(g, cfg).values;
    const auto b = embed_graph(oracle::permute(g, perm), cfg).values;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  return {worst <= kIsoTol,
          std::to_string(kIsoGraphs) + " graphs, max |diff| " + sci(worst) + " (tol " + sci(kIsoTol) + ")"};
}

Outcome encoding(const Context&) {
  std::mt19937_64 rng(20240103);
  int done = 0, bad = 0;
  while (done < kEncodingGrids) {
    const int w = 2 + static_cast<int>(rng() % (kEncodingMaxSide - 1));
    const int h = 2 + static_cast<int>(rng() % (kEncodingMaxSide - 1));
    auto grid = std::make_shared<const GridMap>(oracle::random_grid(w, h, 0.3 * oracle::unit(rng), rng));
    const auto open = open_cells(*grid);
    if (open.size() < 2) continue;
    const int k = 1 + static_cast<int>(rng() % std::min<std::size_t>(kEncodingMaxAgents, open.size() / 2 + 1));
    auto s = open, t = open;
    std::shuffle(s.begin(), s.end(), rng);
    std::shuffle(t.begin(), t.end(), rng);
    s.resize(k);
    t.resize(k);
    std::vector<std::vector<int>> paths;
    for (int a = 0; a < k; ++a) paths.push_back(oracle::bfs_path(*grid, s[a], t[a]));
    if (std::any_of(paths.begin(), paths.end(), [](const auto& p) { return p.empty(); })) continue;
    ++done;
    const MapfInstance inst(grid, s, t);

    std::set<int> cells;
    for (const auto& p : paths) cells.insert(p.begin(), p.end());
    const auto g2v = encode_g2v(inst);
    std::set<std::pair<int, int>> induced, got_g2v;
    for (auto e : oracle::grid_edges(*grid))
      if (cells.count(e.first) && cells.count(e.second)) induced.insert(e);
    for (auto [u, v] : g2v.edges) got_g2v.emplace(g2v.node_origin[u], g2v.node_origin[v]);
    const bool g2v_ok = std::set<int>(g2v.node_origin.begin(), g2v.node_origin.end()) == cells &&
                        g2v.num_nodes == static_cast<int>(cells.size()) && got_g2v == induced;

    const auto fg2v = encode_fg2v(inst);
    auto expected = oracle::grid_edges(*grid);
    for (int a = 0; a < k; ++a)
      if (s[a] != t[a]) expected.emplace(std::min(s[a], t[a]), std::max(s[a], t[a]));
    std::set<std::pair<int, int>> got_fg2v;
    for (auto [u, v] : fg2v.edges) {
      int a = fg2v.node_origin[u], b = fg2v.node_origin[v];
      got_fg2v.emplace(std::min(a, b), std::max(a, b));
    }
    const bool fg2v_ok = fg2v.num_nodes == grid->passable_count() && got_fg2v == expected &&
                         got_fg2v.size() == fg2v.edges.size();
    bad += !(g2v_ok && fg2v_ok);
  }
  return {bad == 0, std::to_string(done) + " instances, " + std::to_string(bad) + " mismatches"};
}

Outcome shortest_paths(const Context&) {
  std::mt19937_64 rng(20240104);
  int bad = 0, sources = 0;
  for (int i = 0; i < kPathGrids; ++i) {
    const int w = 1 + static_cast<int>(rng() % kPathMaxSide);
    const int h = 1 + static_cast<int>(rng() % kPathMaxSide);
    const auto grid = oracle::random_grid(w, h, 0.4 * oracle::unit(rng), rng);
    const auto open = open_cells(grid);
    for (int r = 0; r < 3 && !open.empty(); ++r) {
      const int s = open[rng() % open.size()];
      ++sources;
      bad += bfs_distances(grid, s) != oracle::dijkstra(grid, s);
    }
  }
  return {bad == 0, std::to_string(kPathGrids) + " grids, " + std::to_string(sources) + " sources, " +
                        std::to_string(bad) + " mismatches"};
}

TrainingSet blobs(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double cx[] = {0.0, 8.0, 0.0}, cy[] = {0.0, 0.0, 8.0};
  TrainingSet d{2, 3, {}, {}, {}};
  for (int i = 0; i < n; ++i) {
    const int c = static_cast<int>(rng() % 3);
    const double x[] = {cx[c] + noise(rng), cy[c] + noise(rng)};
    d.add(x, c);
  }
  return d;
}

Outcome learner(const Context&) {
  std::mt19937_64 rng(20240105);
  std::normal_distribution<double> z(0.0, 2.0);
  double fd_worst = 0;
  const double h = 1e-5;
  for (int i = 0; i < kFdPoints; ++i) {
    const int k = 2 + static_cast<int>(rng() % 5);
    std::vector<double> s(k), g(k), H(k), gp(k), gm(k), tmp(k);
    for (auto& v : s) v = z(rng);
    const int y = static_cast<int>(rng() % k);
    softmax_gradients(s, y, g, H);
    for (int c = 0; c < k; ++c) {
      auto plus = s, minus = s;
      plus[c] += h;
      minus[c] -= h;
      const double fd_g = (softmax_logloss(plus, y) - softmax_logloss(minus, y)) / (2 * h);
      softmax_gradients(plus, y, gp, tmp);
      softmax_gradients(minus, y, gm, tmp);
      const double fd_h = (gp[c] - gm[c]) / (2 * h);
      fd_worst = std::max({fd_worst, std::abs(fd_g - g[c]), std::abs(fd_h - H[c])});
    }
  }

  int increases = 0;
  for (int d = 0; d < kMonotoneSets; ++d) {
    const int n = 50 + static_cast<int>(rng() % 200), f = 1 + static_cast<int>(rng() % 8);
    const int c = 2 + static_cast<int>(rng() % 4);
    TrainingSet set{f, c, {}, {}, {}};
    std::vector<double> x(f);
    for (int i = 0; i < n; ++i) {
      for (auto& v : x) v = z(rng);
      set.add(x, static_cast<int>(rng() % c));
    }
    Hyperparams p;
    p.rounds = 30;
    p.max_depth = 1 + static_cast<int>(rng() % 6);
    p.learning_rate = 0.05 + 0.5 * oracle::unit(rng);
    TrainingTrace trace;
    train(set, p, d, Execution::parallel, &trace);
    for (std::size_t r = 1; r < trace.logloss.size(); ++r)
      increases += trace.logloss[r] > trace.logloss[r - 1] + 1e-12;
  }

  const auto train_set = blobs(300, 11), test_set = blobs(300, 12);
  Hyperparams p;
  p.rounds = 50;
  p.max_depth = 3;
  const auto model = train(train_set, p, 0);
  int correct = 0;
  for (int i = 0; i < test_set.size(); ++i) correct += model.predict(test_set.row(i)).label == test_set.labels[i];
  const double acc = static_cast<double>(correct) / test_set.size();

  const bool ok = fd_worst <= kFdTol && increases == 0 && acc >= kBlobAccuracy;
  return {ok, "fd max err " + sci(fd_worst) + " (tol " + sci(kFdTol) + "), loss increases " +
                  std::to_string(increases) + " over " + std::to_string(kMonotoneSets) +
                  " datasets, blobs held-out acc " + fixed(acc) + " (min " + fixed(kBlobAccuracy, 2) + ")"};
}

Outcome metrics(const Context&) {
  std::mt19937_64 rng(20240106);
  const auto portfolio = default_portfolio();
  bool oracle_ok = true;
  for (int d = 0; d < 100; ++d) {
    std::vector<RuntimeRecord> records;
    FeatureStore store(1);
    GridTaxonomy tax;
    const int n = 1 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      const std::string grid = grid_types()[rng() % grid_types().size()] + "-" + std::to_string(rng() % 3);
      RuntimeRecord r{{grid, "s", i + 1}, {}};
      const std::size_t forced = rng() % portfolio.size();
      for (std::size_t c = 0; c < portfolio.size(); ++c) {
        const bool solved = c == forced || oracle::unit(rng) < 0.5;
        // Include exact ties and sub-floor runtimes.
        const double rt = rng() % 4 == 0 ? 0.0005 : std::round(oracle::unit(rng) * 8) / 2;
        r.solver_runtimes[portfolio[c]] = {solved ? std::min(rt, 5.0) : 5.0, solved};
      }
      store.insert(r.key, {0.0});
      records.push_back(r);
    }
    const auto labeled = derive_labels(records, store, portfolio, tax);
    for (const auto mode : {Aggregation::all, Aggregation::avg}) {
      const auto m = evaluate(oracle_policy(), labeled, mode);
      oracle_ok &= m.accuracy == 1.0 && m.coverage == 1.0 && m.regret == 0.0;
    }
  }
  const bool eq_ok = regret_percent(3.0, 1.5) == 100.0 && regret_percent(1.5, 1.5) == 0.0 &&
                     regret_percent(0.0005, 0.0) == 0.0 && regret_percent(5.0, 2.5) == 100.0 &&
                     regret_percent(0.002, 0.001) == 100.0;
  return {oracle_ok && eq_ok, std::string("oracle rows exact on 100 datasets: ") + (oracle_ok ? "yes" : "no") +
                                  ", hand-checked regret cases: " + (eq_ok ? "yes" : "no")};
}

// Fields of one CSV row keyed by header name.
std::map<std::string, std::string> csv_row(const std::string& text, const std::string& first_field) {
  const auto lines = split_lines(text);
  const auto header = split(lines.at(0), ',');
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (!f.empty() && f[0] == first_field) {
      std::map<std::string, std::string> out;
      for (std::size_t k = 0; k < header.size() && k < f.size(); ++k) out[std::string(header[k])] = f[k];
      return out;
    }
  }
  throw DataError("no row '" + first_field + "'");
}

struct PipelineRun {
  fs::path dir;
  double seconds = 0;
  bool ok = false;
  std::string error;
};

PipelineRun pipeline(const Context& ctx, const std::string& name, const std::string& synth_flags,
                     const std::string& train_flags) {
  PipelineRun r;
  r.dir = ctx.work / name;
  fs::remove_all(r.dir);
  fs::create_directories(r.dir);
  const auto d = r.dir.string();
  const std::string log = " 2>>" + (r.dir / "log.txt").string();
  const std::string data = " --features " + d + "/out/features.csv --results " + d +
                           "/results.csv --grid-types " + d + "/grid_types.csv --out-dir " + d + "/out";
  const std::vector<std::string> steps{
      ctx.cli + " --seed 7 synth --out " + d + " " + synth_flags + log,
      ctx.cli + " --seed 7 extract --maps " + d + "/maps --scens " + d + "/scens" + data + log,
      ctx.cli + " --seed 7 train" + data + " " + train_flags + log,
      ctx.cli + " --seed 7 evaluate" + data + " >/dev/null" + log,
  };
  const auto start = std::chrono::steady_clock::now();
  for (const auto& s : steps) {
    if (const int rc = run(s); rc != 0) {
      r.error = "exit " + std::to_string(rc) + " from: " + s;
      return r;
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.ok = true;
  return r;
}

// Shared between the end-to-end and determinism checks.
std::optional<PipelineRun> g_e2e;

Outcome end_to_end(const Context& ctx) {
  g_e2e = pipeline(ctx, "e2e", "", "--setup in_grid");
  if (!g_e2e->ok) return {false, g_e2e->error};
  const auto report = read_file((g_e2e->dir / "out" / "report_in_grid.csv").string());
  const auto sel = csv_row(report, "selector:all");
  const auto sb = csv_row(report, "single-best");
  const double acc = parse_double(sel.at("all_acc"));
  const double rg = parse_double(sel.at("all_rg"));
  const double sb_rg = parse_double(sb.at("all_rg"));
  const int instances = parse_int(sel.at("instances"));
  const auto total = load_results(read_file((g_e2e->dir / "results.csv").string()), default_portfolio()).size();
  return {acc >= kE2eAccuracy && rg < sb_rg,
          std::to_string(total) + " instances (" + std::to_string(instances) + " test), acc " + fixed(acc) +
              " (min " + fixed(kE2eAccuracy, 2) + "), %Rg " + fixed(rg, 2) + " vs single-best " +
              fixed(sb_rg, 2) + ", pipeline " + fixed(g_e2e->seconds, 1) + "s"};
}

Outcome between_type(const Context& ctx) {
  // Planted rule on agent density only; every grid type is held out once.
  const fs::path base = ctx.work / "between";
  auto first = pipeline(ctx, "between", "--rule density", "--setup between_grid_type");
  if (!first.ok) return {false, first.error};
  const auto d = base.string();
  const std::string data = " --features " + d + "/out/features.csv --results " + d +
                           "/results.csv --grid-types " + d + "/grid_types.csv";
  const auto cfg = (base / "grid.json").string();
  write_file_atomic(cfg, R"({"grid": {"max_depth": [3], "rounds": [100], "learning_rate": [0.3], "subsample": [1.0]}})");

  std::string detail;
  bool ok = true;
  for (const auto& type : grid_types()) {
    const auto out = (base / ("holdout_" + type)).string();
    const std::string log = " 2>>" + (base / "log.txt").string();
    if (run(ctx.cli + " --seed 7 --config " + cfg + " train" + data + " --out-dir " + out +
            " --setup between_grid_type --test-type " + type + log) != 0 ||
        run(ctx.cli + " --seed 7 evaluate" + data + " --out-dir " + out + " >/dev/null" + log) != 0) {
      return {false, "pipeline failed for held-out type " + type};
    }
    // Majority-class rate: frequency of the most common oracle label among test instances.
    const auto report = read_file(out + "/report_between_grid_type.csv");
    const double acc = parse_double(csv_row(report, "selector:all").at("all_acc"));
    const auto features = FeatureStore::from_csv(read_file(d + "/out/features.csv"));
    const auto records = load_results(read_file(d + "/results.csv"), default_portfolio());
    const auto tax = GridTaxonomy::from_csv(read_file(d + "/grid_types.csv"));
    std::map<int, int> counts;
    int n = 0;
    for (const auto& li : derive_labels(records, features, default_portfolio(), tax)) {
      if (li.grid_type != type) continue;
      ++counts[li.label];
      ++n;
    }
    int top = 0;
    for (const auto& [_, c] : counts) top = std::max(top, c);
    const double majority = static_cast<double>(top) / n;
    ok &= acc >= majority + kBetweenMargin;
    detail += (detail.empty() ? "" : ", ") + type + " " + fixed(acc, 2) + "/" + fixed(majority, 2);
  }
  return {ok, "acc/majority per held-out type: " + detail + " (margin " + fixed(kBetweenMargin, 2) + ")"};
}

Outcome extraction_throughput(const Context&) {
  auto grid = std::make_shared<const GridMap>(GridMap::open("empty-256-256", 256, 256));
  std::mt19937_64 rng(20240107);
  std::vector<int> cells(grid->num_cells());
  std::iota(cells.begin(), cells.end(), 0);
  const FeatherConfig cfg;
  constexpr int kInstances = 3;
  double total = 0;
  for (int i = 0; i < kInstances; ++i) {
    auto s = cells, t = cells;
    std::shuffle(s.begin(), s.end(), rng);
    std::shuffle(t.begin(), t.end(), rng);
    s.resize(100);
    t.resize(100);
    const auto start = std::chrono::steady_clock::now();
    const MapfInstance inst(grid, s, t);
    const auto v = extract(inst, cfg);
    total += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (v.values.size() != 1020) return {false, "wrong vector length"};
  }
  const double mean = total / kInstances;
  return {mean <= kExtractSecondsPerInstance,
          "mean " + fixed(mean) + " s/instance over " + std::to_string(kInstances) +
              " instances (max " + fixed(kExtractSecondsPerInstance, 1) + ")"};
}

Outcome determinism(const Context& ctx) {
  if (!g_e2e || !g_e2e->ok) g_e2e = pipeline(ctx, "e2e", "", "--setup in_grid");
  if (!g_e2e->ok) return {false, g_e2e->error};
  const auto second = pipeline(ctx, "e2e_repeat", "", "--setup in_grid");
  if (!second.ok) return {false, second.error};
  int compared = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(g_e2e->dir)) {
    if (!e.is_regular_file() || e.path().filename() == "log.txt") continue;
    const auto other = second.dir / fs::relative(e.path(), g_e2e->dir);
    ++compared;
    differ += !fs::exists(other) || read_file(e.path().string()) != read_file(other.string());
  }
  return {differ == 0 && compared > 0, std::to_string(compared) + " files compared (maps, scenarios, results, "
                                           "features, model, reports), " + std::to_string(differ) + " differ"};
}

struct Criterion {
  std::string name;
  double limit_seconds;
  std::function<Outcome(const Context&)> check;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  Context ctx;
  std::string work = (fs::temp_directory_path() / "mapfsel_acceptance").string();
  std::string only;
  app.add_option("--work-dir", work);
  app.add_option("--cli", ctx.cli)->required();
  app.add_option("--only", only, "run a single criterion");
  CLI11_PARSE(app, argc, argv);
  ctx.work = work;
  fs::create_directories(ctx.work);

  const std::vector<Criterion> criteria{
      {"embedding_oracle", 30, embedding_oracle},
      {"isomorphism_invariance", 60, isomorphism},
      {"encoding_correctness", 30, encoding},
      {"shortest_path_oracle", 30, shortest_paths},
      {"learner_correctness", 120, learner},
      {"metric_correctness", 30, metrics},
      {"end_to_end_in_grid", 900, end_to_end},
      {"between_type_generalization", 900, between_type},
      {"extraction_throughput", 60, extraction_throughput},
      {"determinism", 900, determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && c.name != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs <= c.limit_seconds;
    failed += !pass;
    std::cout << (pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << " [" << fixed(secs, 1)
              << "s, limit " << fixed(c.limit_seconds, 0) << "s]" << std::endl;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " failed" : std::string("acceptance: all passed"))
            << std::endl;
  return failed ? 1 : 0;
}
