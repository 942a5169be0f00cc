#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mobpat/predict.hpp"
#include "mobpat/rng.hpp"

using namespace mobpat;
using namespace mobpat::predict;

namespace {

matrices::TimeOrientedMatrix tom_from(const std::vector<std::vector<int>>& rows,
                                      std::int64_t bin_seconds = 3600) {
  matrices::TimeOrientedMatrix tom;
  tom.n_objects = static_cast<int>(rows.size());
  tom.binning.start = 0;
  tom.binning.bin_seconds = bin_seconds;
  tom.binning.n_bins = rows.empty() ? 0 : static_cast<int>(rows[0].size());
  for (const auto& r : rows) tom.cells.insert(tom.cells.end(), r.begin(), r.end());
  return tom;
}

WindowedSet set_from(int width, int n_classes, const std::vector<std::vector<int>>& inputs,
                     const std::vector<int>& labels, const std::vector<int>& objects = {}) {
  WindowedSet ws;
  ws.width = width;
  ws.n_classes = n_classes;
  ws.inputs = inputs;
  ws.labels = labels;
  ws.objects = objects.empty() ? std::vector<int>(labels.size(), 0) : objects;
  ws.label_bins.assign(labels.size(), width);
  return ws;
}

// three perfectly separable patterns: a constant window of c predicts c
WindowedSet separable_set(int copies = 4) {
  std::vector<std::vector<int>> inputs;
  std::vector<int> labels;
  for (int rep = 0; rep < copies; ++rep) {
    for (int c = 1; c <= 3; ++c) {
      inputs.push_back({c, c, c});
      labels.push_back(c);
    }
  }
  return set_from(3, 4, inputs, labels);
}

double training_accuracy(const BaselineModel& model, const WindowedSet& ws) {
  int correct = 0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (predict_next(model, ws.inputs[i]).label == ws.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ws.size());
}

}  // namespace

TEST_CASE("fixed window extraction takes the trailing bin as the label") {
  const auto tom = tom_from({{2, 2, 3, 5}});
  const auto ws = make_windows(tom, 6, 3);
  REQUIRE(ws.size() == 1);
  CHECK(ws.width == 3);
  CHECK(ws.inputs[0] == std::vector<int>{2, 2, 3});
  CHECK(ws.labels[0] == 5);
  CHECK(ws.objects[0] == 0);
  CHECK(ws.label_bins[0] == 3);
}

TEST_CASE("window equal to the row length leaves no label") {
  const auto tom = tom_from({{1, 2, 3, 4}});
  CHECK_THROWS_AS(make_windows(tom, 5, 4), WindowTooLongError);
  CHECK_NOTHROW(make_windows(tom, 5, 3));
}

TEST_CASE("all-absent examples are dropped unless asked for") {
  const auto tom = tom_from({{0, 0, 0, 0}, {1, 0, 0, 0}});
  const auto dropped = make_windows(tom, 2, 2);
  REQUIRE(dropped.size() == 1);
  CHECK(dropped.inputs[0] == std::vector<int>{1, 0});

  const auto kept = make_windows(tom, 2, 2, 1, false);
  CHECK(kept.size() == 4);
}

TEST_CASE("stride and bin range select which examples exist") {
  const auto tom = tom_from({{1, 2, 3, 4, 5, 6}});
  const auto strided = make_windows(tom, 7, 2, 2);
  REQUIRE(strided.size() == 2);
  CHECK(strided.inputs[0] == std::vector<int>{1, 2});
  CHECK(strided.labels[0] == 3);
  CHECK(strided.inputs[1] == std::vector<int>{3, 4});
  CHECK(strided.labels[1] == 5);

  const auto ranged = make_windows(tom, 7, 2, 1, true, 1, 5);
  REQUIRE(ranged.size() == 2);
  CHECK(ranged.inputs[0] == std::vector<int>{2, 3});
  CHECK(ranged.labels[0] == 4);
  CHECK(ranged.label_bins[1] == 4);
}

TEST_CASE("cell values outside the class range are rejected") {
  const auto tom = tom_from({{1, 2, 9, 1}});
  CHECK_THROWS_AS(make_windows(tom, 3, 2), std::invalid_argument);
}

TEST_CASE("prefix extraction grows the input one bin at a time") {
  const auto tom = tom_from({{1, 2, 3}});
  const auto ws = make_prefix_set(tom, 4);
  REQUIRE(ws.size() == 2);
  CHECK(ws.width == 2);
  CHECK(ws.inputs[0] == std::vector<int>{1});
  CHECK(ws.labels[0] == 2);
  CHECK(ws.inputs[1] == std::vector<int>{1, 2});
  CHECK(ws.labels[1] == 3);
  CHECK(ws.label_bins[1] == 2);
}

TEST_CASE("zero learning rate leaves the network at its seeded start") {
  const auto ws = separable_set(1);
  RnnConfig config;
  config.hidden = 4;
  config.epochs = 3;
  config.lr = 0.0;
  config.seed = 9;
  const auto result = train_rnn(ws, config);
  CHECK(result.loss_trace.size() == 3);
  CHECK(result.model.params == init_rnn(4, 4, 9, CellKind::elman).params);
}

TEST_CASE("a single example is memorized") {
  const auto ws = set_from(3, 3, {{1, 1, 1}}, {1});
  RnnConfig config;
  config.hidden = 8;
  config.epochs = 200;
  config.lr = 0.05;
  config.seed = 2;
  for (const auto cell : {CellKind::elman, CellKind::lstm}) {
    config.cell = cell;
    const auto result = train_rnn(ws, config);
    const auto pred = predict_next(result.model, {1, 1, 1});
    CHECK(pred.label == 1);
    CHECK(pred.probs[1] > 0.9);
    CHECK(result.loss_trace.back() < result.loss_trace.front());
  }
}

TEST_CASE("a deterministic cycle is learned to full accuracy") {
  std::vector<std::vector<int>> inputs;
  std::vector<int> labels;
  for (int rep = 0; rep < 6; ++rep) {
    inputs.push_back({1, 2, 3});
    labels.push_back(1);
    inputs.push_back({2, 3, 1});
    labels.push_back(2);
    inputs.push_back({3, 1, 2});
    labels.push_back(3);
  }
  const auto ws = set_from(3, 4, inputs, labels);

  RnnConfig config;
  config.hidden = 12;
  config.epochs = 120;
  config.lr = 0.1;
  config.seed = 4;
  const auto result = train_rnn(ws, config);
  CHECK(result.loss_trace.back() < 0.5 * result.loss_trace.front());
  for (std::size_t i = 0; i < ws.size(); ++i) {
    CHECK(predict_next(result.model, ws.inputs[i]).label == ws.labels[i]);
  }
}

TEST_CASE("analytic gradients agree with central differences") {
  const std::vector<int> window = {1, 3, 0, 2, 2};
  for (const auto cell : {CellKind::elman, CellKind::lstm}) {
    const auto model = init_rnn(4, 6, 11, cell);
    CHECK(rnn_gradient_check(model, window, 2, 1e-4, 60, 5) < 1e-3);
    CHECK(rnn_gradient_check(model, window, 2, 1e-5, 60, 6) < 1e-3);
  }
}

TEST_CASE("training the recurrent kinds needs at least one example") {
  WindowedSet empty;
  empty.width = 2;
  empty.n_classes = 3;
  CHECK_THROWS_AS(train_rnn(empty, RnnConfig{}), EmptySetError);
  CHECK_THROWS_AS(train_baseline(ModelKind::knn, empty, BaselineHyper{}, 0), EmptySetError);
  CHECK_NOTHROW(train_baseline(ModelKind::uniform, empty, BaselineHyper{}, 0));
}

TEST_CASE("an unfitted model refuses to predict") {
  CHECK_THROWS_AS(predict_next(BaselineModel{}, {1, 2}), UnfittedModelError);
  CHECK_THROWS_AS(predict_next(RnnModel{}, {1, 2}), UnfittedModelError);
}

TEST_CASE("model names round-trip") {
  CHECK(baseline_kinds().size() == 8);
  for (const auto kind : baseline_kinds()) {
    CHECK(model_kind_of(to_string(kind)) == kind);
  }
  CHECK(model_kind_of("lstm") == ModelKind::lstm);
  CHECK(!model_kind_of("nonsense").has_value());
}

TEST_CASE("the uniform baseline draws a deterministic label with flat odds") {
  const auto ws = separable_set();
  const auto model = train_baseline(ModelKind::uniform, ws, BaselineHyper{}, 7);
  const auto again = train_baseline(ModelKind::uniform, ws, BaselineHyper{}, 7);

  const auto p = predict_next(model, {1, 2, 3}, 5);
  CHECK(p.label >= 0);
  CHECK(p.label < 4);
  CHECK(p.probs.size() == 4);
  for (const double v : p.probs) CHECK(v == doctest::Approx(0.25));
  CHECK(predict_next(again, {1, 2, 3}, 5).label == p.label);

  // a different seed shifts at least one draw across a batch of queries
  const auto other = train_baseline(ModelKind::uniform, ws, BaselineHyper{}, 8);
  bool differs = false;
  for (int q = 0; q < 32 && !differs; ++q) {
    differs = predict_next(other, {q % 4, (q / 4) % 4}, q).label !=
              predict_next(model, {q % 4, (q / 4) % 4}, q).label;
  }
  CHECK(differs);
}

TEST_CASE("most_frequent answers the per-object mode, else the window mode") {
  const auto ws = set_from(3, 5,
                           {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {2, 2, 2}, {2, 2, 2}},
                           {4, 4, 3, 1, 1}, {0, 0, 0, 1, 1});
  const auto model = train_baseline(ModelKind::most_frequent, ws, BaselineHyper{}, 0);

  CHECK(predict_next(model, {}, 0).label == 4);
  CHECK(predict_next(model, {}, 1).label == 1);
  // unseen object falls back to the global modal label; 4 and 1 tie at two
  // examples each, so the smaller id wins
  CHECK(predict_next(model, {}, 9).label == 1);
  // no hint: the most common window value answers
  CHECK(predict_next(model, {2, 2, 3}).label == 2);
  const auto p = predict_next(model, {2, 2, 3});
  CHECK(p.probs[2] == doctest::Approx(1.0));
}

TEST_CASE("nearest neighbor recalls training windows and shares votes") {
  const auto ws = set_from(3, 4, {{1, 1, 1}, {2, 2, 2}, {3, 3, 3}, {1, 1, 2}}, {1, 2, 3, 1});
  BaselineHyper hyper;
  hyper.knn_k = 1;
  const auto model = train_baseline(ModelKind::knn, ws, hyper, 0);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    CHECK(predict_next(model, ws.inputs[i]).label == ws.labels[i]);
  }

  hyper.knn_k = 3;
  const auto voting = train_baseline(ModelKind::knn, ws, hyper, 0);
  // neighbors of (1,1,3): (1,1,1) d=1, (1,1,2) d=1, then (2,2,2) d=3 beats
  // (3,3,3) d=2? no: (3,3,3) d=2 enters third; votes 1,1 for class 1, 1 for 3
  const auto p = predict_next(voting, {1, 1, 3});
  CHECK(p.label == 1);
  CHECK(p.probs[1] == doctest::Approx(2.0 / 3.0));
  CHECK(p.probs[3] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("equidistant neighbors break ties toward the earlier example") {
  const auto ws = set_from(2, 4, {{1, 2}, {2, 1}}, {3, 1});
  BaselineHyper hyper;
  hyper.knn_k = 1;
  const auto model = train_baseline(ModelKind::knn, ws, hyper, 0);
  // (1,1) is one substitution from both rows; index 0 wins
  CHECK(predict_next(model, {1, 1}).label == 3);
}

TEST_CASE("naive bayes separates constant patterns") {
  const auto ws = separable_set();
  const auto model = train_baseline(ModelKind::naive_bayes, ws, BaselineHyper{}, 0);
  CHECK(training_accuracy(model, ws) == doctest::Approx(1.0));
  const auto p = predict_next(model, {1, 1, 1});
  CHECK(p.label == 1);
  CHECK(std::accumulate(p.probs.begin(), p.probs.end(), 0.0) == doctest::Approx(1.0));
  CHECK(p.probs[1] > 0.8);
}

TEST_CASE("the decision tree fits separable data exactly") {
  const auto ws = separable_set();
  const auto model = train_baseline(ModelKind::decision_tree, ws, BaselineHyper{}, 0);
  CHECK(training_accuracy(model, ws) == doctest::Approx(1.0));
}

TEST_CASE("a depth cap of zero forces a single majority leaf") {
  auto ws = separable_set();
  ws.labels.back() = 1;  // class 1 now strictly most common
  BaselineHyper hyper;
  hyper.tree_max_depth = 0;
  const auto model = train_baseline(ModelKind::decision_tree, ws, hyper, 0);
  CHECK(std::get<TreeState>(model.state).nodes.size() == 1);
  CHECK(predict_next(model, {3, 3, 3}).label == 1);
}

TEST_CASE("the forest is deterministic per seed and fits separable data") {
  const auto ws = separable_set();
  const auto a = train_baseline(ModelKind::random_forest, ws, BaselineHyper{}, 3);
  const auto b = train_baseline(ModelKind::random_forest, ws, BaselineHyper{}, 3);
  Rng rng(77);
  for (int q = 0; q < 20; ++q) {
    const std::vector<int> window = {static_cast<int>(rng.index(4)), static_cast<int>(rng.index(4)),
                                     static_cast<int>(rng.index(4))};
    const auto pa = predict_next(a, window);
    const auto pb = predict_next(b, window);
    CHECK(pa.label == pb.label);
    CHECK(pa.probs == pb.probs);
  }
  CHECK(training_accuracy(a, ws) == doctest::Approx(1.0));
}

TEST_CASE("the linear separator and the boosted stumps fit separable data") {
  const auto ws = separable_set();
  for (const auto kind : {ModelKind::linear_svm, ModelKind::adaboost}) {
    const auto model = train_baseline(kind, ws, BaselineHyper{}, 1);
    CHECK(training_accuracy(model, ws) == doctest::Approx(1.0));
  }
}

TEST_CASE("boosting stops after one stump when that stump is perfect") {
  const auto ws = set_from(2, 3, {{1, 1}, {1, 1}, {2, 2}, {2, 2}}, {1, 1, 2, 2});
  BaselineHyper hyper;
  hyper.ada_rounds = 100;
  const auto model = train_baseline(ModelKind::adaboost, ws, hyper, 0);
  const auto& state = std::get<AdaState>(model.state);
  CHECK(state.stumps.size() == 1);
  CHECK(training_accuracy(model, ws) == doctest::Approx(1.0));
}

TEST_CASE("boosted alphas stay positive and aligned with their stumps") {
  const auto model = train_baseline(ModelKind::adaboost, separable_set(), BaselineHyper{}, 0);
  const auto& state = std::get<AdaState>(model.state);
  CHECK(state.stumps.size() == state.alphas.size());
  CHECK(!state.alphas.empty());
  for (const double a : state.alphas) CHECK(a > 0.0);
}

TEST_CASE("every baseline yields a valid label and a proper distribution") {
  const auto ws = separable_set();
  Rng rng(123);
  for (const auto kind : baseline_kinds()) {
    const auto model = train_baseline(kind, ws, BaselineHyper{}, 5);
    for (int q = 0; q < 10; ++q) {
      const std::vector<int> window = {static_cast<int>(rng.index(4)),
                                       static_cast<int>(rng.index(4)),
                                       static_cast<int>(rng.index(4))};
      const auto p = predict_next(model, window, q % 3 - 1);
      CHECK(p.label >= 0);
      CHECK(p.label < 4);
      REQUIRE(p.probs.size() == 4);
      double sum = 0.0;
      for (const double v : p.probs) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(sum == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("the dispatch wrapper routes to the right implementation") {
  const auto ws = separable_set();
  TrainOptions options;
  options.rnn.hidden = 4;
  options.rnn.epochs = 2;

  const auto knn = train_model(ModelKind::knn, ws, options, 0);
  CHECK(knn.baseline.kind == ModelKind::knn);
  CHECK(predict_next(knn, {2, 2, 2}).label == 2);

  const auto net = train_model(ModelKind::lstm, ws, options, 0);
  CHECK(net.net.fitted());
  CHECK(net.net.cell == CellKind::lstm);
  CHECK(predict_next(net, {1, 1, 1}).probs.size() == 4);
}

TEST_CASE("evaluation trains per probe and scores every object at the target") {
  // ten objects pinned to one location each; history predicts the target
  std::vector<std::vector<int>> rows;
  for (int i = 0; i < 10; ++i) rows.push_back(std::vector<int>(24, i % 3 + 1));
  const auto tom = tom_from(rows);

  EvalOptions options;
  options.window = 4;
  const auto report = evaluate_over_time(tom, 4, 20, {360, 720},
                                         {ModelKind::most_frequent, ModelKind::uniform}, options);

  CHECK(report.target_bin == 20);
  CHECK(report.n_objects == 10);
  REQUIRE(report.models.size() == 2);

  const auto& mf = report.models[0];
  CHECK(mf.kind == ModelKind::most_frequent);
  REQUIRE(mf.probes.size() == 2);
  CHECK(mf.probes[0].minutes == 360);
  CHECK(mf.probes[0].bins == 6);
  CHECK(mf.probes[0].n_train == 10 * (6 - 4));
  CHECK(mf.probes[0].accuracy == doctest::Approx(1.0));
  CHECK(mf.probes[1].accuracy == doctest::Approx(1.0));
  CHECK(mf.overall_accuracy == doctest::Approx(1.0));

  // confusion holds every object at the longest probe, all on the diagonal
  REQUIRE(mf.confusion.size() == 16);
  CHECK(std::accumulate(mf.confusion.begin(), mf.confusion.end(), 0) == 10);
  CHECK(mf.confusion[1 * 4 + 1] == 4);
  CHECK(mf.confusion[2 * 4 + 2] == 3);
  CHECK(mf.confusion[3 * 4 + 3] == 3);

  // a memoryless guesser cannot be perfect on three balanced classes
  const auto& uni = report.models[1];
  CHECK(uni.overall_accuracy < 1.0);

  const auto repeat = evaluate_over_time(tom, 4, 20, {360, 720},
                                         {ModelKind::most_frequent, ModelKind::uniform}, options);
  CHECK(repeat.models[1].overall_accuracy == uni.overall_accuracy);
}

TEST_CASE("evaluation rejects probes that do not fit the history") {
  const auto tom = tom_from({std::vector<int>(24, 1)});
  EvalOptions options;
  options.window = 4;
  CHECK_THROWS_AS(evaluate_over_time(tom, 2, 20, {1260}, {ModelKind::uniform}, options),
                  InsufficientHistoryError);
  CHECK_THROWS_AS(evaluate_over_time(tom, 2, 20, {240}, {ModelKind::uniform}, options),
                  InsufficientHistoryError);
  CHECK_THROWS_AS(evaluate_over_time(tom, 2, 24, {360}, {ModelKind::uniform}, options),
                  matrices::BinOutOfRangeError);
}

TEST_CASE("observed flow counts transitions between consecutive bins") {
  const auto tom = tom_from({{1, 1}, {2, 3}, {0, 2}, {3, 0}});
  const auto flow = build_flow_map(tom, 3, 0);
  CHECK(flow.label == "actual");
  CHECK(flow.at(1, 1) == doctest::Approx(1.0));
  CHECK(flow.at(2, 3) == doctest::Approx(1.0));
  // rows entering or leaving absence carry no edge
  CHECK(std::accumulate(flow.weights.begin(), flow.weights.end(), 0.0) == doctest::Approx(2.0));

  CHECK_THROWS_AS(build_flow_map(tom, 3, 1), matrices::BinOutOfRangeError);
}

TEST_CASE("a stationary population produces only self edges") {
  std::vector<std::vector<int>> rows;
  for (int i = 0; i < 12; ++i) rows.push_back(std::vector<int>(4, i % 2 + 1));
  const auto flow = build_flow_map(tom_from(rows), 2, 2);
  CHECK(flow.at(1, 1) == doctest::Approx(6.0));
  CHECK(flow.at(2, 2) == doctest::Approx(6.0));
  CHECK(flow.at(1, 2) == doctest::Approx(0.0));
}

TEST_CASE("predicted flow pairs the observed origin with the model's pick") {
  std::vector<std::vector<int>> rows;
  for (int i = 0; i < 9; ++i) rows.push_back(std::vector<int>(8, i % 3 + 1));
  rows.push_back(std::vector<int>(8, 0));  // absent row contributes nothing
  const auto tom = tom_from(rows);

  const auto ws = make_windows(tom, 4, 3);
  const auto model = train_model(ModelKind::most_frequent, ws, TrainOptions{}, 0);
  const auto flow = build_predicted_flow_map(tom, 3, 5, model, 3);

  CHECK(flow.label == "predicted");
  CHECK(flow.at(1, 1) == doctest::Approx(3.0));
  CHECK(flow.at(2, 2) == doctest::Approx(3.0));
  CHECK(flow.at(3, 3) == doctest::Approx(3.0));
  CHECK(std::accumulate(flow.weights.begin(), flow.weights.end(), 0.0) == doctest::Approx(9.0));

  CHECK_THROWS_AS(build_predicted_flow_map(tom, 3, 1, model, 3), InsufficientHistoryError);
}

TEST_CASE("top edges rank by weight with position as the tie break") {
  FlowMap flow;
  flow.n_locations = 3;
  flow.weights.assign(9, 0.0);
  flow.at(2, 1) = 5.0;
  flow.at(1, 3) = 2.0;
  flow.at(3, 2) = 2.0;
  flow.at(1, 1) = 1.0;

  const auto edges = top_edges(flow, 3);
  REQUIRE(edges.size() == 3);
  CHECK(edges[0].origin == 2);
  CHECK(edges[0].dest == 1);
  CHECK(edges[1].origin == 1);
  CHECK(edges[1].dest == 3);
  CHECK(edges[2].origin == 3);
  CHECK(edges[2].dest == 2);

  CHECK(top_edges(flow, 100).size() == 4);
  CHECK(top_edges(flow, 0).empty());
}
