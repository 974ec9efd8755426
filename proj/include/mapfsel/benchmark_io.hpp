#pragma once

// Readers and writers for the MovingAI grid benchmark formats (.map, .scen)
// and the solver runtime table.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mapfsel {

// Unsolved runs are charged the full time limit (minutes).
inline constexpr double kRuntimeCapMinutes = 5.0;

struct Cell {
  int x = 0;  // column
  int y = 0;  // row, 0 = top
  friend bool operator==(const Cell&, const Cell&) = default;
};

// 2D passability grid. Cell ids are row-major: id = y * width + x.
class GridMap {
 public:
  GridMap() = default;
  // terrain holds height rows of width raw map characters.
  GridMap(std::string name, int width, int height, std::vector<char> terrain);

  // All-passable grid, handy for tests and synthetic data.
  static GridMap open(std::string name, int width, int height);

  const std::string& name() const { return name_; }
  int width() const { return width_; }
  int height() const { return height_; }
  int num_cells() const { return width_ * height_; }

  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  bool passable(int x, int y) const { return passable_[cell_id(x, y)] != 0; }
  bool passable(int id) const { return passable_[id] != 0; }
  char terrain(int x, int y) const { return terrain_[cell_id(x, y)]; }

  int cell_id(int x, int y) const { return y * width_ + x; }
  Cell cell(int id) const { return {id % width_, id / width_}; }

  int passable_count() const;

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  std::string name_;
  int width_ = 0;
  int height_ = 0;
  std::vector<char> terrain_;
  std::vector<std::uint8_t> passable_;
};

bool is_passable_char(char c);
bool is_blocked_char(char c);

GridMap parse_map(std::string_view bytes, std::string name = {});
// Writes the four-line header and the raw terrain rows (LF line endings).
std::string serialize_map(const GridMap& map);

struct ScenarioEntry {
  int bucket = 0;
  std::string map_name;
  int map_width = 0;
  int map_height = 0;
  Cell start;
  Cell goal;
  double optimal_length = 0.0;
  friend bool operator==(const ScenarioEntry&, const ScenarioEntry&) = default;
};

std::vector<ScenarioEntry> parse_scen(std::string_view bytes, const GridMap& map);
std::string serialize_scen(const std::vector<ScenarioEntry>& entries);

struct SolverRun {
  double runtime_min = kRuntimeCapMinutes;
  bool solved = false;
  friend bool operator==(const SolverRun&, const SolverRun&) = default;
};

struct InstanceKey {
  std::string grid;
  std::string scenario;
  int num_agents = 0;
  auto operator<=>(const InstanceKey&) const = default;
  std::string to_string() const;
};

struct RuntimeRecord {
  InstanceKey key;
  std::map<std::string, SolverRun> solver_runtimes;
};

// Canonical results table header.
inline constexpr std::string_view kResultsHeader =
    "grid,scenario,num_agents,solver,runtime_min,solved";

// The five optimal solvers in fixed tie-break order.
std::vector<std::string> default_portfolio();

// Groups rows into one record per instance, in first-appearance order.
// strict: a record lacking a portfolio solver is an error; otherwise the
// missing solver is filled in as unsolved.
std::vector<RuntimeRecord> load_results(std::string_view bytes,
                                        const std::vector<std::string>& portfolio,
                                        bool strict = false);
std::string serialize_results(const std::vector<RuntimeRecord>& records,
                              const std::vector<std::string>& portfolio);

// File helpers shared by the CLI and the cache.
std::string read_file(const std::string& path);
// Writes via a temporary file and rename so readers never see partial files.
void write_file_atomic(const std::string& path, std::string_view bytes);

// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);
int parse_int(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);
// Splits on LF, dropping a trailing CR from each line.
std::vector<std::string_view> split_lines(std::string_view text);

}  // namespace mapfsel
