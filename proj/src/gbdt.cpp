#include "mapfsel/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>

#include <omp.h>

#include "json.hpp"
#include "mapfsel/errors.hpp"

namespace mapfsel {

namespace {

constexpr double kMinSplitGain = 1e-10;
constexpr double kAbsentClassPrior = 1e-6;
constexpr std::size_t kParallelWork = 1 << 15;

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct SplitCandidate {
  double gain = 0.0;
  double threshold = 0.0;
  int feature = -1;  // original feature index
};

double leaf_objective(double g, double h, double lambda) { return g * g / (h + lambda); }

// Exact greedy scan of one feature over a node's rows (sorted by value).
SplitCandidate scan_feature(const double* x, const int* rows, int count, const double* grad,
                            const double* hess, double g_total, double h_total,
                            const Hyperparams& p, int feature) {
  SplitCandidate best;
  best.feature = feature;
  const double parent = leaf_objective(g_total, h_total, p.l2_lambda);
  double gl = 0.0;
  double hl = 0.0;
  for (int k = 0; k + 1 < count; ++k) {
    const int i = rows[k];
    gl += grad[i];
    hl += hess[i];
    const double v = x[i];
    const double v_next = x[rows[k + 1]];
    if (v == v_next) continue;
    const double hr = h_total - hl;
    if (hl < p.min_child_weight || hr < p.min_child_weight) continue;
    const double gr = g_total - gl;
    const double gain = 0.5 * (leaf_objective(gl, hl, p.l2_lambda) +
                               leaf_objective(gr, hr, p.l2_lambda) - parent);
    if (gain > best.gain) {
      best.gain = gain;
      double t = v + (v_next - v) * 0.5;
      if (!(v < t)) t = v_next;  // adjacent doubles
      best.threshold = t;
    }
  }
  return best;
}

struct NodeTask {
  int node = 0;
  int begin = 0;
  int end = 0;
  int depth = 0;
  double g = 0.0;
  double h = 0.0;
};

// Rows of one tree's training sample, kept as one value-sorted list per
// candidate feature. Each open node owns the same [begin, end) segment in
// every list.
class TreeBuilder {
 public:
  TreeBuilder(const std::vector<double>& columns, int num_rows, const std::vector<int>& features,
              std::vector<int> lists, const Hyperparams& params, Execution exec)
      : columns_(columns),
        n_total_(num_rows),
        features_(features),
        lists_(std::move(lists)),
        sample_size_(features.empty() ? 0 : static_cast<int>(lists_.size() / features.size())),
        params_(params),
        exec_(exec),
        goes_left_(num_rows, 0) {}

  RegressionTree build(const std::vector<double>& grad, const std::vector<double>& hess) {
    RegressionTree tree;
    tree.nodes.emplace_back();
    NodeTask root{0, 0, sample_size_, 0, 0.0, 0.0};
    for (int k = 0; k < sample_size_; ++k) {
      const int i = lists_[k];
      root.g += grad[i];
      root.h += hess[i];
    }
    std::vector<NodeTask> open{root};
    while (!open.empty()) {
      const NodeTask task = open.back();
      open.pop_back();
      const SplitCandidate split = find_split(task, grad, hess);
      if (split.feature < 0 || split.gain <= kMinSplitGain) {
        auto& leaf = tree.nodes[task.node];
        leaf.value = -params_.learning_rate * task.g / (task.h + params_.l2_lambda);
        continue;
      }
      const int mid = partition(task, split);
      NodeTask left{static_cast<int>(tree.nodes.size()), task.begin, mid, task.depth + 1, 0, 0};
      NodeTask right{left.node + 1, mid, task.end, task.depth + 1, 0, 0};
      for (int k = left.begin; k < left.end; ++k) {
        left.g += grad[lists_[k]];
        left.h += hess[lists_[k]];
      }
      right.g = task.g - left.g;
      right.h = task.h - left.h;
      auto& node = tree.nodes[task.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.gain = split.gain;
      node.left = left.node;
      node.right = right.node;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      // Right first so the left child is expanded next (depth-first order).
      open.push_back(right);
      open.push_back(left);
    }
    return tree;
  }

 private:
  const double* column(int f) const {
    return columns_.data() + static_cast<std::size_t>(f) * n_total_;
  }
  int* list(std::size_t fi) { return lists_.data() + fi * sample_size_; }

  bool use_parallel(int count) const {
    return exec_ == Execution::parallel && !omp_in_parallel() &&
           static_cast<std::size_t>(count) * features_.size() >= kParallelWork;
  }

  SplitCandidate find_split(const NodeTask& t, const std::vector<double>& grad,
                            const std::vector<double>& hess) {
    const int count = t.end - t.begin;
    if (t.depth >= params_.max_depth || count < 2 || t.h < 2.0 * params_.min_child_weight) {
      return {};
    }
    const int nf = static_cast<int>(features_.size());
    std::vector<SplitCandidate> per_feature(nf);
    if (use_parallel(count)) {
#pragma omp parallel for schedule(dynamic, 8)
      for (int fi = 0; fi < nf; ++fi) {
        per_feature[fi] = scan_feature(column(features_[fi]), list(fi) + t.begin, count,
                                       grad.data(), hess.data(), t.g, t.h, params_, features_[fi]);
      }
    } else {
      for (int fi = 0; fi < nf; ++fi) {
        per_feature[fi] = scan_feature(column(features_[fi]), list(fi) + t.begin, count,
                                       grad.data(), hess.data(), t.g, t.h, params_, features_[fi]);
      }
    }
    // Ascending feature order: ties keep the lowest index.
    SplitCandidate best;
    for (const auto& c : per_feature) {
      if (c.gain > best.gain) best = c;
    }
    return best;
  }

  // Stable-partitions the node segment of every list; returns the boundary.
  int partition(const NodeTask& t, const SplitCandidate& split) {
    const double* x = column(split.feature);
    const int count = t.end - t.begin;
    const int* any = list(0) + t.begin;
    int left_count = 0;
    for (int k = 0; k < count; ++k) {
      const int i = any[k];
      goes_left_[i] = x[i] < split.threshold ? 1 : 0;
      left_count += goes_left_[i];
    }
    const int nf = static_cast<int>(features_.size());
    auto part = [&](int fi, std::vector<int>& buffer) {
      int* seg = list(fi) + t.begin;
      buffer.clear();
      int w = 0;
      for (int k = 0; k < count; ++k) {
        if (goes_left_[seg[k]]) {
          seg[w++] = seg[k];
        } else {
          buffer.push_back(seg[k]);
        }
      }
      std::copy(buffer.begin(), buffer.end(), seg + w);
    };
    if (use_parallel(count)) {
#pragma omp parallel
      {
        std::vector<int> buffer;
        buffer.reserve(count);
#pragma omp for schedule(static)
        for (int fi = 0; fi < nf; ++fi) part(fi, buffer);
      }
    } else {
      std::vector<int> buffer;
      buffer.reserve(count);
      for (int fi = 0; fi < nf; ++fi) part(fi, buffer);
    }
    return t.begin + left_count;
  }

  const std::vector<double>& columns_;
  int n_total_;
  const std::vector<int>& features_;
  std::vector<int> lists_;
  int sample_size_;
  const Hyperparams& params_;
  Execution exec_;
  std::vector<char> goes_left_;
};

double predict_column_major(const RegressionTree& tree, const std::vector<double>& columns,
                            int n, int row) {
  int at = 0;
  while (!tree.nodes[at].is_leaf()) {
    const auto& node = tree.nodes[at];
    const double v = columns[static_cast<std::size_t>(node.feature) * n + row];
    at = v < node.threshold ? node.left : node.right;
  }
  return tree.nodes[at].value;
}

double mean_logloss(const std::vector<double>& scores, const std::vector<int>& labels, int c) {
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total += softmax_logloss({scores.data() + i * c, static_cast<std::size_t>(c)}, labels[i]);
  }
  return total / static_cast<double>(labels.size());
}

using nlohmann::json;

json tree_to_json(const RegressionTree& tree, int at) {
  const auto& node = tree.nodes[at];
  if (node.is_leaf()) return json{{"leaf", node.value}};
  return json{{"feature", node.feature},
              {"threshold", node.threshold},
              {"gain", node.gain},
              {"left", tree_to_json(tree, node.left)},
              {"right", tree_to_json(tree, node.right)}};
}

int tree_from_json(const json& j, RegressionTree& tree, int num_features) {
  const int at = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("leaf")) {
    tree.nodes[at].value = j.at("leaf").get<double>();
    return at;
  }
  const int feature = j.at("feature").get<int>();
  if (feature < 0 || feature >= num_features) {
    throw DataError("model tree references feature " + std::to_string(feature));
  }
  const double threshold = j.at("threshold").get<double>();
  const double gain = j.at("gain").get<double>();
  const int left = tree_from_json(j.at("left"), tree, num_features);
  const int right = tree_from_json(j.at("right"), tree, num_features);
  auto& node = tree.nodes[at];
  node.feature = feature;
  node.threshold = threshold;
  node.gain = gain;
  node.left = left;
  node.right = right;
  return at;
}

constexpr std::string_view kModelFormat = "mapfsel-gbdt";
constexpr int kModelVersion = 1;

}  // namespace

void Hyperparams::validate() const {
  if (max_depth < 0) throw UsageError("max_depth must be >= 0");
  if (rounds < 0) throw UsageError("rounds must be >= 0");
  if (!(learning_rate > 0.0)) throw UsageError("learning_rate must be > 0");
  if (!(min_child_weight >= 0.0)) throw UsageError("min_child_weight must be >= 0");
  if (!(l2_lambda >= 0.0)) throw UsageError("l2_lambda must be >= 0");
  if (!(subsample > 0.0 && subsample <= 1.0)) throw UsageError("subsample must be in (0, 1]");
  if (!(colsample > 0.0 && colsample <= 1.0)) throw UsageError("colsample must be in (0, 1]");
}

HyperparamGrid HyperparamGrid::single(const Hyperparams& p) {
  return {{p.max_depth}, {p.rounds},    {p.learning_rate}, {p.min_child_weight},
          {p.l2_lambda}, {p.subsample}, {p.colsample}};
}

std::vector<Hyperparams> HyperparamGrid::points() const {
  std::vector<Hyperparams> out;
  for (const int d : max_depth)
    for (const int r : rounds)
      for (const double lr : learning_rate)
        for (const double mcw : min_child_weight)
          for (const double l2 : l2_lambda)
            for (const double ss : subsample)
              for (const double cs : colsample) out.push_back({d, r, lr, mcw, l2, ss, cs});
  return out;
}

void TrainingSet::add(std::span<const double> x, int label) {
  if (x.size() != static_cast<std::size_t>(num_features)) {
    throw DataError("training row has " + std::to_string(x.size()) + " features, expected " +
                    std::to_string(num_features));
  }
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

TrainingSet TrainingSet::subset(std::span<const int> rows) const {
  TrainingSet out{num_features, num_classes, {}, {}, {}};
  out.features.reserve(rows.size() * num_features);
  for (const int i : rows) {
    out.add(row(i), labels[i]);
    if (!keys.empty()) out.keys.push_back(keys[i]);
  }
  return out;
}

void TrainingSet::validate() const {
  if (labels.empty()) throw DataError("training set is empty");
  if (num_features < 1) throw DataError("training set has no features");
  if (num_classes < 1) throw DataError("training set has no classes");
  if (features.size() != labels.size() * static_cast<std::size_t>(num_features)) {
    throw DataError("feature matrix shape does not match label count");
  }
  if (!keys.empty() && keys.size() != labels.size()) {
    throw DataError("instance keys do not match label count");
  }
  for (const int y : labels) {
    if (y < 0 || y >= num_classes) throw DataError("label " + std::to_string(y) + " out of range");
  }
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (!std::isfinite(features[i])) {
      throw DataError("missing or non-finite feature value at row " +
                      std::to_string(i / num_features) + ", column " +
                      std::to_string(i % num_features));
    }
  }
}

double RegressionTree::predict(std::span<const double> x) const {
  int at = 0;
  while (!nodes[at].is_leaf()) {
    const auto& node = nodes[at];
    at = x[node.feature] < node.threshold ? node.left : node.right;
  }
  return nodes[at].value;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> p(scores.begin(), scores.end());
  if (p.empty()) return p;
  const double m = *std::max_element(p.begin(), p.end());
  double z = 0.0;
  for (auto& v : p) {
    v = std::exp(v - m);
    z += v;
  }
  for (auto& v : p) v /= z;
  return p;
}

double softmax_logloss(std::span<const double> scores, int label) {
  const double m = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (const double s : scores) z += std::exp(s - m);
  return std::log(z) + m - scores[label];
}

void softmax_gradients(std::span<const double> scores, int label, std::span<double> grad,
                       std::span<double> hess) {
  const auto p = softmax(scores);
  for (std::size_t c = 0; c < p.size(); ++c) {
    grad[c] = p[c] - (static_cast<int>(c) == label ? 1.0 : 0.0);
    hess[c] = p[c] * (1.0 - p[c]);
  }
}

std::vector<double> GbdtModel::raw_scores(std::span<const double> x, int use_rounds) const {
  if (x.size() != static_cast<std::size_t>(num_features)) {
    throw DataError("feature vector has " + std::to_string(x.size()) +
                    " entries, model expects " + std::to_string(num_features));
  }
  std::vector<double> s = base_score;
  const int r = use_rounds < 0 ? rounds() : std::min(use_rounds, rounds());
  for (int round = 0; round < r; ++round) {
    for (int c = 0; c < num_classes; ++c) {
      s[c] += trees[static_cast<std::size_t>(round) * num_classes + c].predict(x);
    }
  }
  return s;
}

Prediction GbdtModel::predict(std::span<const double> x, int use_rounds) const {
  Prediction out;
  out.probabilities = softmax(raw_scores(x, use_rounds));
  for (int c = 1; c < num_classes; ++c) {
    if (out.probabilities[c] > out.probabilities[out.label]) out.label = c;
  }
  return out;
}

std::string GbdtModel::to_json() const {
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["num_classes"] = num_classes;
  j["num_features"] = num_features;
  j["class_names"] = class_names;
  j["feature_names"] = feature_names;
  j["hyperparams"] = {{"max_depth", hyperparams.max_depth},
                      {"rounds", hyperparams.rounds},
                      {"learning_rate", hyperparams.learning_rate},
                      {"min_child_weight", hyperparams.min_child_weight},
                      {"l2_lambda", hyperparams.l2_lambda},
                      {"subsample", hyperparams.subsample},
                      {"colsample", hyperparams.colsample}};
  j["base_score"] = base_score;
  j["metadata"] = metadata;
  json trees_json = json::array();
  for (const auto& tree : trees) trees_json.push_back(tree_to_json(tree, 0));
  j["trees"] = std::move(trees_json);
  return j.dump() + "\n";
}

GbdtModel GbdtModel::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw DataError("not a " + std::string(kModelFormat) + " model file");
    }
    if (j.at("version").get<int>() != kModelVersion) {
      throw DataError("unsupported model version " + std::to_string(j.at("version").get<int>()));
    }
    GbdtModel m;
    m.num_classes = j.at("num_classes").get<int>();
    m.num_features = j.at("num_features").get<int>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const auto& hp = j.at("hyperparams");
    m.hyperparams = {hp.at("max_depth").get<int>(),          hp.at("rounds").get<int>(),
                     hp.at("learning_rate").get<double>(),   hp.at("min_child_weight").get<double>(),
                     hp.at("l2_lambda").get<double>(),       hp.at("subsample").get<double>(),
                     hp.at("colsample").get<double>()};
    m.base_score = j.at("base_score").get<std::vector<double>>();
    m.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    for (const auto& t : j.at("trees")) {
      RegressionTree tree;
      tree_from_json(t, tree, m.num_features);
      m.trees.push_back(std::move(tree));
    }
    if (m.num_classes < 1 || m.base_score.size() != static_cast<std::size_t>(m.num_classes) ||
        m.trees.size() % m.num_classes != 0) {
      throw DataError("model file has inconsistent class counts");
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
}

GbdtModel train(const TrainingSet& data, const Hyperparams& params, std::uint64_t seed,
                Execution exec, TrainingTrace* trace) {
  data.validate();
  params.validate();
  const int n = data.size();
  const int d = data.num_features;
  const int c = data.num_classes;

  GbdtModel model;
  model.num_classes = c;
  model.num_features = d;
  model.hyperparams = params;
  std::vector<int> counts(c, 0);
  for (const int y : data.labels) ++counts[y];
  for (int k = 0; k < c; ++k) {
    model.base_score.push_back(
        std::log(std::max(static_cast<double>(counts[k]) / n, kAbsentClassPrior)));
  }

  std::vector<double> columns(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < d; ++f) columns[static_cast<std::size_t>(f) * n + i] = data.row(i)[f];
  }
  std::vector<int> presorted(static_cast<std::size_t>(n) * d);
#pragma omp parallel for schedule(dynamic, 16) if (exec == Execution::parallel)
  for (int f = 0; f < d; ++f) {
    int* order = presorted.data() + static_cast<std::size_t>(f) * n;
    std::iota(order, order + n, 0);
    const double* x = columns.data() + static_cast<std::size_t>(f) * n;
    std::stable_sort(order, order + n, [x](int a, int b) { return x[a] < x[b]; });
  }

  std::vector<double> scores(static_cast<std::size_t>(n) * c);
  for (int i = 0; i < n; ++i) std::copy_n(model.base_score.begin(), c, scores.begin() + i * c);
  if (trace) trace->logloss.push_back(mean_logloss(scores, data.labels, c));

  std::mt19937_64 rng(seed);
  std::vector<char> in_sample(n, 1);
  std::vector<int> all_features(d);
  std::iota(all_features.begin(), all_features.end(), 0);
  std::vector<std::vector<double>> grad(c, std::vector<double>(n));
  std::vector<std::vector<double>> hess(c, std::vector<double>(n));
  std::vector<double> g_row(c), h_row(c);

  for (int round = 0; round < params.rounds; ++round) {
    int sample_size = n;
    if (params.subsample < 1.0) {
      sample_size = 0;
      for (int i = 0; i < n; ++i) {
        in_sample[i] = uniform01(rng) < params.subsample ? 1 : 0;
        sample_size += in_sample[i];
      }
      if (sample_size == 0) {
        in_sample[static_cast<int>(uniform01(rng) * n)] = 1;
        sample_size = 1;
      }
    }
    std::vector<int> features = all_features;
    if (params.colsample < 1.0) {
      const int keep = std::max(1, static_cast<int>(std::lround(params.colsample * d)));
      for (int k = 0; k < keep; ++k) {
        const int pick = k + static_cast<int>(uniform01(rng) * (d - k));
        std::swap(features[k], features[pick]);
      }
      features.resize(keep);
      std::sort(features.begin(), features.end());
    }

    std::vector<int> root_lists(static_cast<std::size_t>(sample_size) * features.size());
    for (std::size_t fi = 0; fi < features.size(); ++fi) {
      const int* order = presorted.data() + static_cast<std::size_t>(features[fi]) * n;
      int* out = root_lists.data() + fi * sample_size;
      for (int k = 0; k < n; ++k) {
        if (in_sample[order[k]]) *out++ = order[k];
      }
    }

    for (int i = 0; i < n; ++i) {
      softmax_gradients({scores.data() + static_cast<std::size_t>(i) * c, static_cast<std::size_t>(c)},
                        data.labels[i], g_row, h_row);
      for (int k = 0; k < c; ++k) {
        grad[k][i] = g_row[k];
        hess[k][i] = h_row[k];
      }
    }

    for (int k = 0; k < c; ++k) {
      TreeBuilder builder(columns, n, features, root_lists, params, exec);
      model.trees.push_back(builder.build(grad[k], hess[k]));
    }
    for (int k = 0; k < c; ++k) {
      const auto& tree = model.trees[model.trees.size() - c + k];
      for (int i = 0; i < n; ++i) {
        scores[static_cast<std::size_t>(i) * c + k] += predict_column_major(tree, columns, n, i);
      }
    }
    if (trace) trace->logloss.push_back(mean_logloss(scores, data.labels, c));
  }
  return model;
}

std::vector<int> assign_folds(std::span<const int> labels, int folds, std::uint64_t seed,
                              bool* stratified) {
  const int n = static_cast<int>(labels.size());
  if (folds < 2) throw UsageError("cross-validation needs at least 2 folds");
  if (n < folds) {
    throw UsageError("cross-validation needs at least " + std::to_string(folds) + " rows, got " +
                     std::to_string(n));
  }
  std::mt19937_64 rng(seed);
  auto shuffle = [&rng](std::vector<int>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[static_cast<int>(uniform01(rng) * (i + 1))]);
    }
  };

  std::map<int, std::vector<int>> by_class;
  for (int i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
  bool strat = true;
  for (const auto& [_, rows] : by_class) {
    if (static_cast<int>(rows.size()) < folds) strat = false;
  }
  if (stratified) *stratified = strat;

  std::vector<int> fold(n, 0);
  if (strat) {
    int next = 0;
    for (auto& [_, rows] : by_class) {
      shuffle(rows);
      for (const int i : rows) fold[i] = next++ % folds;
    }
  } else {
    std::cerr << "warning: a class has fewer than " << folds
              << " examples; using non-stratified folds\n";
    std::vector<int> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    shuffle(rows);
    for (int k = 0; k < n; ++k) fold[rows[k]] = k % folds;
  }
  return fold;
}

TuneResult tune(const TrainingSet& data, const std::vector<Hyperparams>& grid, int folds,
                std::uint64_t seed, Execution exec) {
  data.validate();
  if (grid.empty()) throw UsageError("hyperparameter grid is empty");
  for (const auto& p : grid) p.validate();

  TuneResult result;
  const auto fold_of = assign_folds(data.labels, folds, seed, &result.stratified);
  result.table.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    result.table[g].params = grid[g];
    result.table[g].fold_accuracy.assign(folds, 0.0);
  }

  // Points that differ only in rounds share one fit: a model's first r
  // rounds are exactly the model trained for r rounds.
  auto same_but_rounds = [](Hyperparams a, const Hyperparams& b) {
    a.rounds = b.rounds;
    return a == b;
  };
  std::vector<char> done(grid.size(), 0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (done[g]) continue;
    std::vector<std::size_t> group;
    Hyperparams fit = grid[g];
    for (std::size_t h = g; h < grid.size(); ++h) {
      if (!done[h] && same_but_rounds(grid[h], grid[g])) {
        group.push_back(h);
        done[h] = 1;
        fit.rounds = std::max(fit.rounds, grid[h].rounds);
      }
    }
    for (int f = 0; f < folds; ++f) {
      std::vector<int> train_rows;
      std::vector<int> test_rows;
      for (int i = 0; i < data.size(); ++i) (fold_of[i] == f ? test_rows : train_rows).push_back(i);
      const auto model = train(data.subset(train_rows), fit, seed + 7919ULL * (f + 1), exec);
      for (const std::size_t h : group) {
        int correct = 0;
        for (const int i : test_rows) {
          if (model.predict(data.row(i), grid[h].rounds).label == data.labels[i]) ++correct;
        }
        result.table[h].fold_accuracy[f] =
            test_rows.empty() ? 0.0 : static_cast<double>(correct) / test_rows.size();
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto& row = result.table[g];
    row.mean_accuracy = 0.0;
    for (const double a : row.fold_accuracy) row.mean_accuracy += a;
    row.mean_accuracy /= folds;
  }
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const auto& a = result.table[g];
    const auto& b = result.table[best];
    if (a.mean_accuracy > b.mean_accuracy ||
        (a.mean_accuracy == b.mean_accuracy &&
         (a.params.rounds < b.params.rounds ||
          (a.params.rounds == b.params.rounds && a.params.max_depth < b.params.max_depth)))) {
      best = g;
    }
  }
  result.best = grid[best];
  return result;
}

ImportanceReport importance(const GbdtModel& model) {
  ImportanceReport report;
  report.gain.assign(model.num_features, 0.0);
  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) report.gain[node.feature] += node.gain;
    }
  }
  return report;
}

}  // namespace mapfsel
