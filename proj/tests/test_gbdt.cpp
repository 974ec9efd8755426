#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mapfsel/errors.hpp"
#include "mapfsel/gbdt.hpp"

using namespace mapfsel;

namespace {

// Three axis-aligned clusters separated by well over 5 sigma.
TrainingSet blobs(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.5);
  const double cx[] = {0.0, 10.0, 0.0}, cy[] = {0.0, 0.0, 10.0};
  TrainingSet d{2, 3, {}, {}, {}};
  for (int i = 0; i < n; ++i) {
    const int c = i % 3;
    const double x[] = {cx[c] + noise(rng), cy[c] + noise(rng)};
    d.add(x, c);
  }
  return d;
}

TrainingSet xor_set(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TrainingSet d{2, 2, {}, {}, {}};
  for (int i = 0; i < n; ++i) {
    const double x[] = {u(rng), u(rng)};
    d.add(x, (x[0] > 0) != (x[1] > 0) ? 1 : 0);
  }
  return d;
}

TrainingSet random_set(int n, int features, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> u(0.0, 1.0);
  TrainingSet d{features, classes, {}, {}, {}};
  std::vector<double> x(features);
  for (int i = 0; i < n; ++i) {
    for (auto& v : x) v = u(rng);
    d.add(x, static_cast<int>(rng() % classes));
  }
  return d;
}

double accuracy(const GbdtModel& m, const TrainingSet& d) {
  int ok = 0;
  for (int i = 0; i < d.size(); ++i) ok += m.predict(d.row(i)).label == d.labels[i];
  return static_cast<double>(ok) / d.size();
}

}  // namespace

TEST_CASE("softmax gradients match finite differences") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> u(0.0, 2.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 4);
    std::vector<double> s(k);
    for (auto& v : s) v = u(rng);
    const int label = static_cast<int>(rng() % k);
    std::vector<double> g(k), H(k);
    softmax_gradients(s, label, g, H);
    for (int c = 0; c < k; ++c) {
      auto plus = s, minus = s;
      plus[c] += h;
      minus[c] -= h;
      const double fd_g = (softmax_logloss(plus, label) - softmax_logloss(minus, label)) / (2 * h);
      CHECK(std::abs(fd_g - g[c]) <= 1e-6);
      std::vector<double> gp(k), gm(k), tmp(k);
      softmax_gradients(plus, label, gp, tmp);
      softmax_gradients(minus, label, gm, tmp);
      CHECK(std::abs((gp[c] - gm[c]) / (2 * h) - H[c]) <= 1e-6);
    }
  }
}

TEST_CASE("softmax is stable for large scores") {
  const std::vector<double> s{1000.0, 0.0, -1000.0};
  const auto p = softmax(s);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(std::isfinite(softmax_logloss(s, 2)));
}

TEST_CASE("training loss never increases") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = random_set(120, 5, 3, seed);
    Hyperparams p;
    p.rounds = 20;
    p.max_depth = 3;
    TrainingTrace trace;
    train(d, p, seed, Execution::serial, &trace);
    REQUIRE(trace.logloss.size() == 21);
    for (std::size_t r = 1; r < trace.logloss.size(); ++r)
      CHECK(trace.logloss[r] <= trace.logloss[r - 1] + 1e-12);
  }
}

TEST_CASE("separable blobs are fit exactly and generalize") {
  const auto d = blobs(300, 3);
  Hyperparams p;
  p.rounds = 50;
  p.max_depth = 3;
  const auto m = train(d, p, 1);
  CHECK(accuracy(m, d) == 1.0);
  CHECK(accuracy(m, blobs(300, 4)) >= 0.9);
}

TEST_CASE("degenerate models") {
  TrainingSet one{1, 3, {}, {}, {}};
  for (int i = 0; i < 10; ++i) {
    const double x[] = {static_cast<double>(i)};
    one.add(x, 2);
  }
  const auto m = train(one, Hyperparams{}, 0);
  const double probe[] = {-100.0};
  CHECK(m.predict(probe).label == 2);

  GbdtModel constant;
  constant.num_classes = 3;
  constant.num_features = 1;
  constant.base_score = {0.0, 1.0, 0.0};
  const auto pred = constant.predict(probe);
  CHECK(pred.label == 1);
  CHECK(pred.probabilities == softmax(constant.base_score));

  constant.base_score = {0.0, 0.0, 0.0};
  CHECK(constant.predict(probe).label == 0);
  CHECK(importance(constant).gain == std::vector<double>{0.0});
}

TEST_CASE("huge lambda shrinks leaves to zero") {
  auto d = blobs(90, 5);
  for (int i = 0; i < 10; ++i) {
    const double x[] = {0.0, 10.0};
    d.add(x, 2);
  }
  Hyperparams p;
  p.rounds = 5;
  p.l2_lambda = 1e12;
  const auto m = train(d, p, 0);
  for (const auto& t : m.trees)
    for (const auto& n : t.nodes)
      if (n.is_leaf()) CHECK(std::abs(n.value) < 1e-9);
  for (int i = 0; i < d.size(); ++i) CHECK(m.predict(d.row(i)).label == 2);
}

TEST_CASE("prediction is the argmax of the probabilities") {
  const auto d = random_set(200, 4, 4, 9);
  Hyperparams p;
  p.rounds = 10;
  const auto m = train(d, p, 3);
  for (int i = 0; i < d.size(); ++i) {
    const auto pr = m.predict(d.row(i));
    const auto best = std::max_element(pr.probabilities.begin(), pr.probabilities.end());
    CHECK(pr.label == best - pr.probabilities.begin());
    CHECK(std::accumulate(pr.probabilities.begin(), pr.probabilities.end(), 0.0) ==
          doctest::Approx(1.0));
  }
}

TEST_CASE("rounds prefix equals a shorter model") {
  const auto d = random_set(150, 6, 3, 2);
  Hyperparams p;
  p.rounds = 12;
  p.subsample = 0.7;
  p.colsample = 0.5;
  const auto long_model = train(d, p, 5);
  p.rounds = 7;
  const auto short_model = train(d, p, 5);
  for (int i = 0; i < d.size(); ++i)
    CHECK(long_model.raw_scores(d.row(i), 7) == short_model.raw_scores(d.row(i)));
}

TEST_CASE("serial and parallel training produce the same model") {
  const auto d = random_set(3000, 20, 3, 4);
  Hyperparams p;
  p.rounds = 5;
  p.subsample = 0.8;
  CHECK(train(d, p, 1, Execution::serial).to_json() == train(d, p, 1, Execution::parallel).to_json());
}

TEST_CASE("tuning") {
  const auto x = xor_set(400, 2);
  Hyperparams shallow;
  shallow.max_depth = 1;
  shallow.rounds = 30;
  Hyperparams deep = shallow;
  deep.max_depth = 3;
  const auto r = tune(x, {shallow, deep}, 4, 11);
  CHECK(r.best == deep);
  CHECK(r.table.size() == 2);
  CHECK(r.table[1].mean_accuracy > r.table[0].mean_accuracy);
  CHECK(tune(x, {shallow, deep}, 4, 11).best == r.best);
  CHECK(tune(x, {shallow}, 4, 11).best == shallow);
  CHECK_THROWS_AS(tune(x, {}, 4, 11), UsageError);
}

TEST_CASE("tuning with rounds candidates matches separate training") {
  const auto d = random_set(120, 3, 3, 8);
  HyperparamGrid grid;
  grid.max_depth = {2};
  grid.rounds = {3, 8};
  grid.learning_rate = {0.3};
  grid.subsample = {0.9};
  const auto r = tune(d, grid.points(), 3, 4);
  for (const auto& point : grid.points()) {
    const auto single = tune(d, {point}, 3, 4);
    const auto it = std::find_if(r.table.begin(), r.table.end(),
                                 [&](const CvResult& c) { return c.params == point; });
    REQUIRE(it != r.table.end());
    CHECK(it->fold_accuracy == single.table[0].fold_accuracy);
  }
}

TEST_CASE("folds") {
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(i % 4);
  bool stratified = false;
  const auto f = assign_folds(labels, 4, 1, &stratified);
  CHECK(stratified);
  for (int fold = 0; fold < 4; ++fold)
    for (int c = 0; c < 4; ++c) {
      int n = 0;
      for (int i = 0; i < 40; ++i) n += f[i] == fold && labels[i] == c;
      CHECK((n == 2 || n == 3));
    }
  labels.push_back(9);
  assign_folds(labels, 4, 1, &stratified);
  CHECK_FALSE(stratified);
}

TEST_CASE("importance concentrates on the informative feature") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TrainingSet d{5, 3, {}, {}, {}};
  for (int i = 0; i < 300; ++i) {
    double x[5];
    for (auto& v : x) v = u(rng);
    d.add(x, x[0] < 0.33 ? 0 : x[0] < 0.66 ? 1 : 2);
  }
  Hyperparams p;
  p.rounds = 30;
  p.max_depth = 3;
  const auto rep = importance(train(d, p, 0));
  REQUIRE(rep.gain.size() == 5);
  const double total = std::accumulate(rep.gain.begin(), rep.gain.end(), 0.0);
  CHECK(rep.gain[0] / total > 0.95);
}

TEST_CASE("invariant to feature order") {
  const auto d = blobs(150, 7);
  TrainingSet swapped{2, 3, {}, {}, {}};
  for (int i = 0; i < d.size(); ++i) {
    const double x[] = {d.row(i)[1], d.row(i)[0]};
    swapped.add(x, d.labels[i]);
  }
  Hyperparams p;
  p.rounds = 10;
  p.max_depth = 2;
  const auto a = train(d, p, 0), b = train(swapped, p, 0);
  const auto probe = blobs(60, 8);
  for (int i = 0; i < probe.size(); ++i) {
    const double x[] = {probe.row(i)[1], probe.row(i)[0]};
    CHECK(a.predict(probe.row(i)).label == b.predict(x).label);
  }
}

TEST_CASE("json round trip is exact") {
  const auto d = random_set(100, 4, 3, 1);
  Hyperparams p;
  p.rounds = 6;
  auto m = train(d, p, 2);
  m.metadata["note"] = "x";
  m.class_names = {"a", "b", "c"};
  const auto text = m.to_json();
  const auto back = GbdtModel::from_json(text);
  CHECK(back.to_json() == text);
  for (int i = 0; i < d.size(); ++i) CHECK(back.raw_scores(d.row(i)) == m.raw_scores(d.row(i)));
  CHECK_THROWS_AS(GbdtModel::from_json("{}"), DataError);
  CHECK_THROWS_AS(GbdtModel::from_json("not json"), DataError);
}

TEST_CASE("input validation") {
  TrainingSet d{1, 2, {}, {}, {}};
  const double nan[] = {std::nan("")};
  d.add(nan, 0);
  CHECK_THROWS_AS(train(d, Hyperparams{}, 0), DataError);
  TrainingSet empty{1, 2, {}, {}, {}};
  CHECK_THROWS_AS(train(empty, Hyperparams{}, 0), DataError);
  Hyperparams bad;
  bad.learning_rate = 0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}
