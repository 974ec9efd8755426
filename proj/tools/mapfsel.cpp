// mapfsel: per-instance solver selection for grid MAPF.
//
//   mapfsel synth    --out DIR
//   mapfsel extract  --maps DIR --scens DIR --results CSV
//   mapfsel train    --features CSV --results CSV
//   mapfsel evaluate --features CSV --results CSV --model JSON
//   mapfsel ablate   --features CSV --results CSV
//   mapfsel predict  --model JSON (--features CSV | --map M --scen S --agents K)
//   mapfsel features --map M --scen S --agents K[,K...]
//   mapfsel embed    (--edges FILE | --map M --scen S --agents K --encoder g2v|fg2v)
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 internal invariant violation.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "mapfsel/commands.hpp"
#include "mapfsel/errors.hpp"
#include "mapfsel/graph_encode.hpp"

namespace {

using namespace mapfsel;

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string cache_dir;
  std::string maps, scens, results, grid_types, output, features, model;
  std::string subset = "all";
  std::string setup = "in_grid";
  double test_fraction = 0.2;
  std::string test_type;
  int folds = 4;
  bool strict = false;
  int order = 5, eval_points = 25;
  double theta_max = 2.5;
  std::string pooling = "max";
  // single-instance commands
  std::string map, scen, agents, edges, encoder = "fg2v", out;
};

void add_feather_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--order", f.order, "random-walk scales");
  cmd->add_option("--eval-points", f.eval_points, "characteristic-function evaluation points");
  cmd->add_option("--theta-max", f.theta_max, "largest evaluation point");
  cmd->add_option("--pooling", f.pooling, "node pooling")->check(CLI::IsMember({"mean", "max"}));
}

void add_data_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--features", f.features, "feature matrix CSV");
  cmd->add_option("--results", f.results, "runtime table CSV");
  cmd->add_option("--grid-types", f.grid_types, "grid,type CSV (inferred from names otherwise)");
  cmd->add_option("--out-dir", f.output, "output directory");
  cmd->add_flag("--strict", f.strict, "reject instances missing a portfolio solver");
}

void add_split_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--setup", f.setup, "in_grid | in_grid_type | between_grid_type")
      ->check(CLI::IsMember({"in_grid", "in_grid_type", "between_grid_type"}));
  cmd->add_option("--test-fraction", f.test_fraction, "test share of scenarios or grids");
  cmd->add_option("--test-type", f.test_type, "held-out grid type for between_grid_type");
  cmd->add_option("--subset", f.subset, "feature blocks, e.g. all, kbs, kbs+fg2v");
  cmd->add_option("--folds", f.folds, "cross-validation folds");
}

// Config file first, then any flag given on the command line.
RunConfig build_config(const CLI::App& app, const CLI::App& cmd, const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : RunConfig::from_json(read_file(f.config));
  auto given = [&](const char* name) {
    return (cmd.get_option_no_throw(name) && cmd.get_option_no_throw(name)->count() > 0) ||
           (app.get_option_no_throw(name) && app.get_option_no_throw(name)->count() > 0);
  };
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--cache-dir")) cfg.cache_dir = f.cache_dir;
  if (given("--maps")) cfg.maps_dir = f.maps;
  if (given("--scens")) cfg.scens_dir = f.scens;
  if (given("--results")) cfg.results = f.results;
  if (given("--grid-types")) cfg.grid_types = f.grid_types;
  if (given("--out-dir")) cfg.output_dir = f.output;
  if (given("--features")) cfg.features = f.features;
  if (given("--model")) cfg.model = f.model;
  if (given("--strict")) cfg.strict = f.strict;
  if (given("--subset")) cfg.subset = FeatureSubset::parse(f.subset);
  if (given("--setup")) cfg.split.setup = parse_setup(f.setup);
  if (given("--test-fraction")) cfg.split.test_fraction = f.test_fraction;
  if (given("--test-type")) cfg.split.test_type = f.test_type;
  if (given("--folds")) cfg.folds = f.folds;
  if (given("--order")) cfg.feather.order = f.order;
  if (given("--eval-points")) cfg.feather.eval_points = f.eval_points;
  if (given("--theta-max")) cfg.feather.theta_max = f.theta_max;
  if (given("--pooling")) cfg.feather.pooling = parse_pooling(f.pooling);
  cfg.feather.validate();
  return cfg;
}

MapfInstance load_instance(const std::string& map_path, const std::string& scen_path, int k) {
  const auto stem = std::filesystem::path(map_path).stem().string();
  auto grid = std::make_shared<const GridMap>(parse_map(read_file(map_path), stem));
  const auto entries = parse_scen(read_file(scen_path), *grid);
  return MapfInstance::from_scenario(grid, entries, k);
}

std::vector<int> parse_agent_list(const std::string& text) {
  std::vector<int> out;
  for (const auto part : split(text, ',')) out.push_back(parse_int(part));
  if (out.empty()) throw UsageError("--agents needs at least one count");
  return out;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

std::string csv_row(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  return out + '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-instance optimal MAPF solver selection"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "JSON run configuration");
  app.add_option("--seed", f.seed, "random seed");
  app.add_option("--threads", f.threads, "OpenMP threads (0 = runtime default)");
  app.add_option("--cache-dir", f.cache_dir, "feature cache directory");

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic benchmark");
  synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();
  synth_cmd->add_option("--grids-per-type", synth.grids_per_type);
  synth_cmd->add_option("--scenarios", synth.scenarios_per_grid, "scenarios per grid");
  synth_cmd->add_option("--agent-counts", synth.agent_counts, "agent counts per scenario");
  synth_cmd->add_option("--width", synth.width);
  synth_cmd->add_option("--height", synth.height);
  synth_cmd->add_option("--min-density", synth.min_density);
  synth_cmd->add_option("--max-density", synth.max_density);
  synth_cmd->add_option("--noise", synth.noise, "log-runtime noise amplitude");
  synth_cmd->add_option("--rule", synth.rule, "planted rule")
      ->check(CLI::IsMember({"density+corridor", "density"}));

  auto* extract_cmd = app.add_subcommand("extract", "extract the feature matrix");
  extract_cmd->add_option("--maps", f.maps, "directory of .map files");
  extract_cmd->add_option("--scens", f.scens, "directory of .scen files");
  add_data_flags(extract_cmd, f);
  add_feather_flags(extract_cmd, f);

  auto* train_cmd = app.add_subcommand("train", "tune and train a selector");
  add_data_flags(train_cmd, f);
  add_split_flags(train_cmd, f);
  train_cmd->add_option("--model", f.model, "model output path");

  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a trained selector");
  add_data_flags(eval_cmd, f);
  eval_cmd->add_option("--model", f.model, "model file");

  auto* ablate_cmd = app.add_subcommand("ablate", "train and evaluate every feature subset");
  add_data_flags(ablate_cmd, f);
  add_split_flags(ablate_cmd, f);

  auto* predict_cmd = app.add_subcommand("predict", "choose a solver per instance");
  predict_cmd->add_option("--model", f.model, "model file")->required();
  predict_cmd->add_option("--features", f.features, "feature matrix CSV");
  predict_cmd->add_option("--map", f.map);
  predict_cmd->add_option("--scen", f.scen);
  predict_cmd->add_option("--agents", f.agents);
  predict_cmd->add_option("--out", f.out, "output CSV (stdout by default)");
  add_feather_flags(predict_cmd, f);

  auto* features_cmd = app.add_subcommand("features", "hand-crafted features of instances");
  features_cmd->add_option("--map", f.map)->required();
  features_cmd->add_option("--scen", f.scen)->required();
  features_cmd->add_option("--agents", f.agents, "comma-separated agent counts")->required();
  features_cmd->add_option("--out", f.out, "output CSV (stdout by default)");

  auto* embed_cmd = app.add_subcommand("embed", "embed one graph");
  embed_cmd->add_option("--edges", f.edges, "edge-list file");
  embed_cmd->add_option("--map", f.map);
  embed_cmd->add_option("--scen", f.scen);
  embed_cmd->add_option("--agents", f.agents);
  embed_cmd->add_option("--encoder", f.encoder)->check(CLI::IsMember({"g2v", "fg2v"}));
  embed_cmd->add_option("--out", f.out, "output CSV (stdout by default)");
  add_feather_flags(embed_cmd, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (f.threads > 0) set_threads(f.threads);
    if (app.got_subcommand(synth_cmd)) {
      if (!f.config.empty()) synth.seed = RunConfig::from_json(read_file(f.config)).seed;
      if (app.get_option("--seed")->count() > 0) synth.seed = f.seed;
      cmd_synth(synth);
    } else if (app.got_subcommand(extract_cmd)) {
      cmd_extract(build_config(app, *extract_cmd, f));
    } else if (app.got_subcommand(train_cmd)) {
      const auto s = cmd_train(build_config(app, *train_cmd, f));
      std::cerr << "[train] best: depth " << s.tuning.best.max_depth << ", rounds "
                << s.tuning.best.rounds << ", lr " << s.tuning.best.learning_rate
                << ", subsample " << s.tuning.best.subsample << "\n";
    } else if (app.got_subcommand(eval_cmd)) {
      const auto report = cmd_evaluate(build_config(app, *eval_cmd, f));
      std::cerr << report.to_csv();
    } else if (app.got_subcommand(ablate_cmd)) {
      const auto report = cmd_ablate(build_config(app, *ablate_cmd, f));
      std::cerr << report.to_csv();
    } else if (app.got_subcommand(predict_cmd)) {
      const auto cfg = build_config(app, *predict_cmd, f);
      const auto model = GbdtModel::from_json(read_file(f.model));
      const auto subset = FeatureSubset::parse(model.metadata.at("subset"));
      const int emb = std::stoi(model.metadata.at("embedding_dim"));
      std::string out = "grid,scenario,num_agents,solver";
      for (const auto& c : model.class_names) out += ",p_" + c;
      out += '\n';
      auto row = [&](const InstanceKey& key, const std::vector<double>& full) {
        const auto pred = model.predict(select_blocks(full, subset, emb));
        out += key.grid + ',' + key.scenario + ',' + std::to_string(key.num_agents) + ',' +
               model.class_names[pred.label];
        for (const double p : pred.probabilities) out += ',' + format_double(p);
        out += '\n';
      };
      if (!f.features.empty()) {
        const auto store = FeatureStore::from_csv(read_file(f.features));
        for (const auto& [key, values] : store.rows()) row(key, values);
      } else {
        if (f.map.empty() || f.scen.empty() || f.agents.empty()) {
          throw UsageError("predict needs --features or --map, --scen and --agents");
        }
        if (cfg.feather.canonical_string() != model.metadata.at("feather")) {
          throw UsageError("feather flags differ from the model's feature configuration");
        }
        for (const int k : parse_agent_list(f.agents)) {
          const auto instance = load_instance(f.map, f.scen, k);
          const InstanceKey key{instance.grid().name(),
                                std::filesystem::path(f.scen).stem().string(), k};
          row(key, extract(instance, cfg.feather).values);
        }
      }
      emit(f.out, out);
    } else if (app.got_subcommand(features_cmd)) {
      std::string out = "grid,scenario,num_agents";
      for (const auto name : kKbsFeatureNames) out += "," + std::string(name);
      out += '\n';
      for (const int k : parse_agent_list(f.agents)) {
        const auto instance = load_instance(f.map, f.scen, k);
        out += instance.grid().name() + ',' + std::filesystem::path(f.scen).stem().string() +
               ',' + std::to_string(k);
        for (const double v : kbs_features(instance).values) out += ',' + format_double(v);
        out += '\n';
      }
      emit(f.out, out);
    } else if (app.got_subcommand(embed_cmd)) {
      const auto cfg = build_config(app, *embed_cmd, f);
      EncodedGraph graph;
      if (!f.edges.empty()) {
        graph = read_edge_list(read_file(f.edges));
      } else {
        if (f.map.empty() || f.scen.empty() || f.agents.empty()) {
          throw UsageError("embed needs --edges or --map, --scen, --agents and --encoder");
        }
        const auto instance = load_instance(f.map, f.scen, parse_int(f.agents));
        graph = f.encoder == "g2v" ? encode_g2v(instance) : encode_fg2v(instance);
      }
      emit(f.out, csv_row(embed_graph(graph, cfg.feather).values));
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
