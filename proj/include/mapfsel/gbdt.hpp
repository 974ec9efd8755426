#pragma once

// Multi-class gradient-boosted decision trees with a softmax objective.
// Every boosting round fits one regression tree per class to the softmax
// gradients/hessians using exact greedy split search.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mapfsel/benchmark_io.hpp"
#include "mapfsel/execution.hpp"

namespace mapfsel {

struct Hyperparams {
  int max_depth = 6;
  int rounds = 100;
  double learning_rate = 0.3;
  double min_child_weight = 1.0;
  double l2_lambda = 1.0;
  double subsample = 1.0;
  double colsample = 1.0;

  void validate() const;
  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

// Cartesian product of per-parameter candidate lists.
struct HyperparamGrid {
  std::vector<int> max_depth{3, 6};
  std::vector<int> rounds{100, 300};
  std::vector<double> learning_rate{0.1, 0.3};
  std::vector<double> min_child_weight{1.0};
  std::vector<double> l2_lambda{1.0};
  std::vector<double> subsample{0.8, 1.0};
  std::vector<double> colsample{1.0};

  static HyperparamGrid single(const Hyperparams& p);
  std::vector<Hyperparams> points() const;
};

// Row-major N x D feature matrix with class labels.
struct TrainingSet {
  int num_features = 0;
  int num_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;
  std::vector<InstanceKey> keys;  // optional, parallel to labels

  int size() const { return static_cast<int>(labels.size()); }
  std::span<const double> row(int i) const {
    return {features.data() + static_cast<std::size_t>(i) * num_features,
            static_cast<std::size_t>(num_features)};
  }
  void add(std::span<const double> x, int label);
  TrainingSet subset(std::span<const int> rows) const;
  // Throws DataError on shape mismatch, NaN/inf features or out-of-range labels.
  void validate() const;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // x[feature] < threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output, already scaled by the learning rate
  double gain = 0.0;
  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(std::span<const double> x) const;
};

struct Prediction {
  int label = 0;
  std::vector<double> probabilities;
};

class GbdtModel {
 public:
  int num_classes = 0;
  int num_features = 0;
  Hyperparams hyperparams;
  std::vector<double> base_score;
  std::vector<RegressionTree> trees;  // round-major: trees[round * num_classes + class]
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::map<std::string, std::string> metadata;

  int rounds() const { return num_classes ? static_cast<int>(trees.size()) / num_classes : 0; }

  // Margin scores using the first `rounds` rounds (all when negative).
  std::vector<double> raw_scores(std::span<const double> x, int rounds = -1) const;
  // Argmax of the softmax; ties go to the lowest class index.
  Prediction predict(std::span<const double> x, int rounds = -1) const;

  std::string to_json() const;
  static GbdtModel from_json(std::string_view text);
};

// Softmax probabilities of margin scores (numerically stable).
std::vector<double> softmax(std::span<const double> scores);
// Multiclass log-loss -log softmax(scores)[label].
double softmax_logloss(std::span<const double> scores, int label);
// g_c = p_c - [label == c], h_c = p_c (1 - p_c).
void softmax_gradients(std::span<const double> scores, int label, std::span<double> grad,
                       std::span<double> hess);

struct TrainingTrace {
  std::vector<double> logloss;  // mean training log-loss before round 1, then after each round
};

GbdtModel train(const TrainingSet& data, const Hyperparams& params, std::uint64_t seed,
                Execution exec = Execution::parallel, TrainingTrace* trace = nullptr);

struct CvResult {
  Hyperparams params;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
};

struct TuneResult {
  Hyperparams best;
  std::vector<CvResult> table;  // one entry per grid point, in grid order
  bool stratified = true;
};

// Fold index per row. Stratified by class unless some present class has
// fewer rows than folds, in which case it falls back to a plain shuffle.
std::vector<int> assign_folds(std::span<const int> labels, int folds, std::uint64_t seed,
                              bool* stratified = nullptr);

// k-fold cross-validated grid search on mean fold accuracy. Ties go to fewer
// rounds, then shallower trees, then earlier grid points.
TuneResult tune(const TrainingSet& data, const std::vector<Hyperparams>& grid, int folds,
                std::uint64_t seed, Execution exec = Execution::parallel);

struct ImportanceReport {
  std::vector<double> gain;  // total split gain per feature
};

ImportanceReport importance(const GbdtModel& model);

}  // namespace mapfsel
