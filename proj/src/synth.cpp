#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>

#include "mapfsel/commands.hpp"
#include "mapfsel/errors.hpp"

namespace mapfsel {

namespace {

constexpr double kLowDensity = 0.025;
constexpr double kHighDensity = 0.05;
constexpr double kCorridorThreshold = 0.3;

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(uniform(rng) * (hi - lo + 1));
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[static_cast<std::size_t>(uniform(rng) * i)]);
  }
}

class Canvas {
 public:
  Canvas(int w, int h, char fill) : w_(w), h_(h), cells_(static_cast<std::size_t>(w) * h, fill) {}
  void set(int x, int y, char c) {
    if (x >= 0 && y >= 0 && x < w_ && y < h_) cells_[static_cast<std::size_t>(y) * w_ + x] = c;
  }
  char get(int x, int y) const { return cells_[static_cast<std::size_t>(y) * w_ + x]; }
  std::vector<char> take() { return std::move(cells_); }

 private:
  int w_, h_;
  std::vector<char> cells_;
};

void carve_maze(Canvas& c, int w, int h, std::mt19937_64& rng) {
  std::vector<std::pair<int, int>> stack{{1, 1}};
  c.set(1, 1, '.');
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    std::vector<std::pair<int, int>> options;
    for (const auto& [dx, dy] : {std::pair{0, -2}, {-2, 0}, {2, 0}, {0, 2}}) {
      const int nx = x + dx;
      const int ny = y + dy;
      if (nx >= 1 && ny >= 1 && nx < w - 1 && ny < h - 1 && c.get(nx, ny) == '@') {
        options.emplace_back(nx, ny);
      }
    }
    if (options.empty()) {
      stack.pop_back();
      continue;
    }
    const auto [nx, ny] = options[uniform_int(rng, 0, static_cast<int>(options.size()) - 1)];
    c.set((x + nx) / 2, (y + ny) / 2, '.');
    c.set(nx, ny, '.');
    stack.emplace_back(nx, ny);
  }
}

// Cells of the largest 4-connected passable component, ascending.
std::vector<int> largest_component(const GridMap& grid) {
  const CellGraph graph(grid);
  std::vector<int> label(graph.num_nodes(), -1);
  std::vector<int> best;
  for (int s = 0; s < graph.num_nodes(); ++s) {
    if (label[s] != -1) continue;
    std::vector<int> members{s};
    label[s] = s;
    for (std::size_t head = 0; head < members.size(); ++head) {
      const int u = members[head];
      for (const int* v = graph.neighbors_begin(u); v != graph.neighbors_end(u); ++v) {
        if (label[*v] == -1) {
          label[*v] = s;
          members.push_back(*v);
        }
      }
    }
    if (members.size() > best.size()) best = std::move(members);
  }
  for (auto& n : best) n = graph.node_cell(n);
  std::sort(best.begin(), best.end());
  return best;
}

}  // namespace

GridMap generate_grid(const std::string& type, const std::string& name, int w, int h,
                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Canvas c(w, h, '.');
  if (type == "empty") {
    // open
  } else if (type == "random") {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (uniform(rng) < 0.2) c.set(x, y, '@');
  } else if (type == "warehouse") {
    for (int y = 3; y < h - 3; y += 3) {
      for (int x = 3; x < w - 3; ++x) {
        if (x % 8 != 2) c.set(x, y, '@');
      }
    }
  } else if (type == "room") {
    constexpr int kRoom = 8;
    for (int k = kRoom; k < std::max(w, h); k += kRoom) {
      for (int i = 0; i < std::max(w, h); ++i) {
        c.set(k, i, '@');
        c.set(i, k, '@');
      }
    }
    // One door per wall segment.
    for (int wall = kRoom; wall < std::max(w, h); wall += kRoom) {
      for (int seg = 0; seg < std::max(w, h); seg += kRoom) {
        const int hi = std::min(seg + kRoom - 1, std::max(w, h) - 1);
        const int lo = seg == 0 ? 0 : seg + 1;
        if (lo > hi) continue;
        c.set(wall, uniform_int(rng, lo, hi), '.');
        c.set(uniform_int(rng, lo, hi), wall, '.');
      }
    }
  } else if (type == "maze") {
    c = Canvas(w, h, '@');
    carve_maze(c, w, h, rng);
  } else if (type == "city") {
    constexpr int kTile = 6;
    for (int by = 0; by < h; by += kTile) {
      for (int bx = 0; bx < w; bx += kTile) {
        if (uniform(rng) < 0.3) continue;  // park
        for (int y = by + 1; y < std::min(by + kTile - 1, h); ++y)
          for (int x = bx + 1; x < std::min(bx + kTile - 1, w); ++x) c.set(x, y, '@');
      }
    }
  } else if (type == "game") {
    const int blobs = 6 + uniform_int(rng, 0, 4);
    for (int b = 0; b < blobs; ++b) {
      const int cx = uniform_int(rng, 0, w - 1);
      const int cy = uniform_int(rng, 0, h - 1);
      const int r = uniform_int(rng, 2, 4);
      for (int y = cy - r; y <= cy + r; ++y)
        for (int x = cx - r; x <= cx + r; ++x)
          if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r + uniform_int(rng, 0, r)) {
            c.set(x, y, '@');
          }
    }
  } else {
    throw UsageError("unknown grid type '" + type + "'");
  }
  return GridMap(name, w, h, c.take());
}

int planted_solver(const KbsFeatures& f, bool use_corridors) {
  const double density = f.values[5];
  const bool corridors = use_corridors && f.values[17] >= kCorridorThreshold;
  if (density < kLowDensity) return 0;
  if (density < kHighDensity) return corridors ? 1 : 3;
  return corridors ? 2 : 4;
}

SynthSummary cmd_synth(const SynthOptions& o) {
  namespace fs = std::filesystem;
  if (o.out_dir.empty()) throw UsageError("synth needs an output directory");
  if (o.grids_per_type < 1 || o.scenarios_per_grid < 1 || o.agent_counts < 1) {
    throw UsageError("synth counts must be positive");
  }
  if (o.width < 8 || o.height < 8) throw UsageError("synthetic grids must be at least 8x8");
  if (!(o.min_density > 0.0 && o.min_density <= o.max_density)) {
    throw UsageError("synth densities must satisfy 0 < min <= max");
  }
  if (!(o.noise >= 0.0)) throw UsageError("synth noise must be >= 0");
  if (o.rule != "density+corridor" && o.rule != "density") {
    throw UsageError("unknown planted rule '" + o.rule + "'");
  }
  const bool use_corridors = o.rule == "density+corridor";
  const auto start = std::chrono::steady_clock::now();

  const fs::path root(o.out_dir);
  const auto portfolio = default_portfolio();
  std::mt19937_64 rng(o.seed);
  GridTaxonomy taxonomy;
  std::vector<RuntimeRecord> records;
  SynthSummary summary;

  for (const auto& type : grid_types()) {
    for (int g = 1; g <= o.grids_per_type; ++g) {
      const std::string name =
          type + "-" + std::to_string(o.width) + "-" + std::to_string(o.height) + "-" + std::to_string(g);
      const auto grid =
          std::make_shared<const GridMap>(generate_grid(type, name, o.width, o.height, rng()));
      write_file_atomic((root / "maps" / (name + ".map")).string(), serialize_map(*grid));
      taxonomy.set(name, type);
      ++summary.grids;

      const auto component = largest_component(*grid);
      const int passable = grid->passable_count();
      std::vector<int> counts;
      for (int i = 0; i < o.agent_counts; ++i) {
        const double d = o.agent_counts == 1
                             ? o.min_density
                             : o.min_density + (o.max_density - o.min_density) * i / (o.agent_counts - 1);
        counts.push_back(std::max(1, static_cast<int>(std::lround(d * passable))));
      }
      counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
      const int max_k = counts.back();
      if (static_cast<std::size_t>(max_k) > component.size()) {
        throw DataError("grid '" + name + "' is too small for " + std::to_string(max_k) + " agents");
      }

      for (int s = 1; s <= o.scenarios_per_grid; ++s) {
        const std::string scen_name = name + "-even-" + std::to_string(s);
        auto starts = component;
        auto goals = component;
        shuffle(starts, rng);
        shuffle(goals, rng);
        auto entries = std::make_shared<std::vector<ScenarioEntry>>();
        for (int a = 0; a < max_k; ++a) {
          ScenarioEntry e;
          e.bucket = a / 10;
          e.map_name = name + ".map";
          e.map_width = o.width;
          e.map_height = o.height;
          e.start = grid->cell(starts[a]);
          e.goal = grid->cell(goals[a]);
          e.optimal_length = shortest_path(*grid, starts[a], goals[a]).moves();
          entries->push_back(e);
        }
        write_file_atomic((root / "scens" / (scen_name + ".scen")).string(), serialize_scen(*entries));
        ++summary.scenarios;

        for (const int k : counts) {
          const auto instance = MapfInstance::from_scenario(grid, *entries, k);
          const auto features = kbs_features(instance);
          const int fastest = planted_solver(features, use_corridors);
          const double base = 0.02 + 4.0 * features.values[5] * (1.0 + features.values[17]);
          RuntimeRecord record{{name, scen_name, k}, {}};
          for (std::size_t c = 0; c < portfolio.size(); ++c) {
            const double slowdown = static_cast<int>(c) == fastest ? 1.0 : 1.5 + 10.0 * uniform(rng);
            const double jitter = std::exp(o.noise * (2.0 * uniform(rng) - 1.0));
            const double runtime = base * slowdown * jitter;
            const bool solved = runtime <= kRuntimeCapMinutes;
            record.solver_runtimes[portfolio[c]] =
                SolverRun{solved ? runtime : kRuntimeCapMinutes, solved};
          }
          records.push_back(std::move(record));
          ++summary.instances;
        }
      }
    }
  }
  write_file_atomic((root / "results.csv").string(), serialize_results(records, portfolio));
  write_file_atomic((root / "grid_types.csv").string(), taxonomy.to_csv());
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "[synth] " << summary.grids << " grids, " << summary.scenarios << " scenarios, "
            << summary.instances << " instances in " << secs << "s\n";
  return summary;
}

}  // namespace mapfsel
