#include "mapfsel/benchmark_io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "mapfsel/errors.hpp"

namespace mapfsel {

namespace {

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Parses "<keyword> <integer>".
int header_value(std::string_view line, std::string_view keyword, std::size_t lineno) {
  line = trim(line);
  if (line.substr(0, keyword.size()) != keyword || line.size() <= keyword.size() ||
      (line[keyword.size()] != ' ' && line[keyword.size()] != '\t')) {
    throw ParseError(at_line(lineno) + "expected '" + std::string(keyword) + " <n>'");
  }
  int value = 0;
  try {
    value = parse_int(trim(line.substr(keyword.size())));
  } catch (const ParseError&) {
    throw ParseError(at_line(lineno) + "bad " + std::string(keyword) + " value");
  }
  if (value < 1) throw ParseError(at_line(lineno) + std::string(keyword) + " must be >= 1");
  return value;
}

}  // namespace

bool is_passable_char(char c) { return c == '.' || c == 'G' || c == 'S'; }
bool is_blocked_char(char c) { return c == '@' || c == 'O' || c == 'T' || c == 'W'; }

GridMap::GridMap(std::string name, int width, int height, std::vector<char> terrain)
    : name_(std::move(name)), width_(width), height_(height), terrain_(std::move(terrain)) {
  if (width < 1 || height < 1) throw DataError("grid dimensions must be positive");
  if (terrain_.size() != static_cast<std::size_t>(width) * height) {
    throw DataError("terrain size does not match grid dimensions");
  }
  passable_.resize(terrain_.size());
  for (std::size_t i = 0; i < terrain_.size(); ++i) {
    const char c = terrain_[i];
    if (is_passable_char(c)) {
      passable_[i] = 1;
    } else if (!is_blocked_char(c)) {
      throw DataError(std::string("unknown terrain character '") + c + "'");
    }
  }
}

GridMap GridMap::open(std::string name, int width, int height) {
  return GridMap(std::move(name), width, height,
                 std::vector<char>(static_cast<std::size_t>(width) * height, '.'));
}

int GridMap::passable_count() const {
  return static_cast<int>(std::count(passable_.begin(), passable_.end(), 1));
}

GridMap parse_map(std::string_view bytes, std::string name) {
  const auto lines = split_lines(bytes);
  if (lines.size() < 4) throw ParseError("map header truncated: expected 4 header lines");

  const auto type_line = trim(lines[0]);
  if (type_line.substr(0, 5) != "type " || trim(type_line.substr(5)).empty()) {
    throw ParseError(at_line(1) + "expected 'type <name>'");
  }
  const int height = header_value(lines[1], "height", 2);
  const int width = header_value(lines[2], "width", 3);
  if (trim(lines[3]) != "map") throw ParseError(at_line(4) + "expected 'map'");

  std::size_t last = lines.size();
  while (last > 4 && lines[last - 1].empty()) --last;
  const std::size_t rows = last - 4;
  if (rows != static_cast<std::size_t>(height)) {
    throw ParseError("map has " + std::to_string(rows) + " rows, header says height " +
                     std::to_string(height));
  }

  std::vector<char> terrain;
  terrain.reserve(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    const std::size_t lineno = 5 + static_cast<std::size_t>(y);
    const auto row = lines[4 + y];
    if (row.size() != static_cast<std::size_t>(width)) {
      throw ParseError(at_line(lineno) + "row length " + std::to_string(row.size()) +
                       " != width " + std::to_string(width));
    }
    for (int x = 0; x < width; ++x) {
      const char c = row[x];
      if (!is_passable_char(c) && !is_blocked_char(c)) {
        throw ParseError(at_line(lineno) + "column " + std::to_string(x + 1) +
                         ": unknown map character '" + std::string(1, c) + "'");
      }
      terrain.push_back(c);
    }
  }
  return GridMap(std::move(name), width, height, std::move(terrain));
}

std::string serialize_map(const GridMap& map) {
  std::string out = "type octile\nheight " + std::to_string(map.height()) + "\nwidth " +
                    std::to_string(map.width()) + "\nmap\n";
  out.reserve(out.size() + static_cast<std::size_t>(map.height()) * (map.width() + 1));
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) out.push_back(map.terrain(x, y));
    out.push_back('\n');
  }
  return out;
}

std::vector<ScenarioEntry> parse_scen(std::string_view bytes, const GridMap& map) {
  const auto lines = split_lines(bytes);
  if (lines.empty() || trim(lines[0]).substr(0, 8) != "version ") {
    throw ParseError(at_line(1) + "expected 'version 1'");
  }
  const auto version = trim(trim(lines[0]).substr(8));
  if (version != "1" && version != "1.0") {
    throw ParseError(at_line(1) + "unsupported scenario version '" + std::string(version) + "'");
  }

  std::vector<ScenarioEntry> entries;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (trim(lines[i]).empty()) continue;
    const auto fields = split(lines[i], '\t');
    if (fields.size() != 9) {
      throw ParseError(at_line(lineno) + "expected 9 tab-separated fields, got " +
                       std::to_string(fields.size()));
    }
    ScenarioEntry e;
    try {
      e.bucket = parse_int(fields[0]);
      e.map_name = std::string(fields[1]);
      e.map_width = parse_int(fields[2]);
      e.map_height = parse_int(fields[3]);
      e.start = {parse_int(fields[4]), parse_int(fields[5])};
      e.goal = {parse_int(fields[6]), parse_int(fields[7])};
      e.optimal_length = parse_double(fields[8]);
    } catch (const ParseError& err) {
      throw ParseError(at_line(lineno) + err.what());
    }
    if (e.bucket < 0) throw ParseError(at_line(lineno) + "negative bucket");
    for (const auto& [what, c] : {std::pair{"start", e.start}, std::pair{"goal", e.goal}}) {
      if (!map.in_bounds(c.x, c.y)) {
        throw ParseError(at_line(lineno) + what + " (" + std::to_string(c.x) + "," +
                         std::to_string(c.y) + ") out of bounds");
      }
      if (!map.passable(c.x, c.y)) {
        throw ParseError(at_line(lineno) + what + " (" + std::to_string(c.x) + "," +
                         std::to_string(c.y) + ") is on a blocked cell");
      }
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string serialize_scen(const std::vector<ScenarioEntry>& entries) {
  std::string out = "version 1\n";
  for (const auto& e : entries) {
    out += std::to_string(e.bucket) + '\t' + e.map_name + '\t' + std::to_string(e.map_width) +
           '\t' + std::to_string(e.map_height) + '\t' + std::to_string(e.start.x) + '\t' +
           std::to_string(e.start.y) + '\t' + std::to_string(e.goal.x) + '\t' +
           std::to_string(e.goal.y) + '\t' + format_double(e.optimal_length) + '\n';
  }
  return out;
}

std::string InstanceKey::to_string() const {
  return grid + "/" + scenario + "/" + std::to_string(num_agents);
}

std::vector<std::string> default_portfolio() {
  return {"ICTS", "EPEA*", "SAT-MDD", "CBSH", "Lazy CBS"};
}

std::vector<RuntimeRecord> load_results(std::string_view bytes,
                                        const std::vector<std::string>& portfolio,
                                        bool strict) {
  const auto lines = split_lines(bytes);
  if (lines.empty() || trim(lines[0]) != kResultsHeader) {
    throw ParseError(at_line(1) + "expected header '" + std::string(kResultsHeader) + "'");
  }
  const std::set<std::string, std::less<>> known(portfolio.begin(), portfolio.end());

  std::vector<RuntimeRecord> records;
  std::map<InstanceKey, std::size_t> index;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (trim(lines[i]).empty()) continue;
    const auto fields = split(lines[i], ',');
    if (fields.size() != 6) {
      throw ParseError(at_line(lineno) + "expected 6 comma-separated fields");
    }
    InstanceKey key;
    key.grid = std::string(trim(fields[0]));
    key.scenario = std::string(trim(fields[1]));
    const std::string solver(trim(fields[3]));
    double runtime = 0.0;
    bool solved = false;
    try {
      key.num_agents = parse_int(trim(fields[2]));
      runtime = parse_double(trim(fields[4]));
    } catch (const ParseError& err) {
      throw ParseError(at_line(lineno) + err.what());
    }
    const auto solved_text = trim(fields[5]);
    if (solved_text == "true") {
      solved = true;
    } else if (solved_text != "false") {
      throw ParseError(at_line(lineno) + "solved must be 'true' or 'false'");
    }
    if (key.num_agents < 1) throw ParseError(at_line(lineno) + "num_agents must be >= 1");
    if (!known.contains(solver)) {
      throw DataError(at_line(lineno) + "unknown solver '" + solver + "'");
    }
    if (!(runtime >= 0.0)) throw DataError(at_line(lineno) + "negative runtime");
    // A run past the time limit did not finish within it.
    if (!solved || runtime > kRuntimeCapMinutes) {
      solved = false;
      runtime = kRuntimeCapMinutes;
    }

    auto [it, inserted] = index.try_emplace(key, records.size());
    if (inserted) records.push_back(RuntimeRecord{key, {}});
    auto& record = records[it->second];
    if (!record.solver_runtimes.try_emplace(solver, SolverRun{runtime, solved}).second) {
      throw DataError(at_line(lineno) + "duplicate entry for " + key.to_string() + " solver '" +
                      solver + "'");
    }
  }

  for (auto& record : records) {
    for (const auto& solver : portfolio) {
      if (record.solver_runtimes.contains(solver)) continue;
      if (strict) {
        throw DataError("instance " + record.key.to_string() + " has no result for solver '" +
                        solver + "'");
      }
      record.solver_runtimes.emplace(solver, SolverRun{});
    }
  }
  return records;
}

std::string serialize_results(const std::vector<RuntimeRecord>& records,
                              const std::vector<std::string>& portfolio) {
  std::string out(kResultsHeader);
  out += '\n';
  for (const auto& r : records) {
    for (const auto& solver : portfolio) {
      const auto it = r.solver_runtimes.find(solver);
      if (it == r.solver_runtimes.end()) continue;
      out += r.key.grid + ',' + r.key.scenario + ',' + std::to_string(r.key.num_agents) + ',' +
             solver + ',' + format_double(it->second.runtime_min) + ',' +
             (it->second.solved ? "true" : "false") + '\n';
    }
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  static std::atomic<unsigned> counter{0};
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

int parse_int(std::string_view text) {
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError("not an integer: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    auto line = text.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = pos + 1;
  }
  return lines;
}

}  // namespace mapfsel
