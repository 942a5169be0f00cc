#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "mobpat/rnn.hpp"

namespace mobpat::predict {

enum class ModelKind {
  uniform,
  most_frequent,
  knn,
  naive_bayes,
  decision_tree,
  random_forest,
  linear_svm,
  adaboost,
  rnn,
  lstm,
};

std::string to_string(ModelKind kind);
std::optional<ModelKind> model_kind_of(std::string_view name);
// The eight non-recurrent kinds, in declaration order.
const std::vector<ModelKind>& baseline_kinds();

struct UnfittedModelError : std::runtime_error {
  UnfittedModelError() : std::runtime_error("model has not been fitted") {}
};

struct Prediction {
  int label = 0;
  std::vector<double> probs;  // sums to 1; point mass for hard classifiers
};

struct BaselineHyper {
  int knn_k = 5;
  int tree_max_depth = 12;
  int tree_min_leaf = 2;
  int forest_trees = 50;
  int svm_epochs = 5;
  double svm_lr = 0.01;
  int ada_rounds = 100;
};

// Binary split on one one-hot feature; feature = position * n_classes + value.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  int left = -1;     // child when the feature is 0
  int right = -1;    // child when the feature is 1
  int label = 0;     // leaf prediction
};

struct Stump {
  int feature = 0;
  int label_if_zero = 0;
  int label_if_one = 0;
};

struct UniformState {
  std::uint64_t seed = 0;
};
struct MostFrequentState {
  std::unordered_map<int, int> per_object;  // object index -> modal label
  int global_mode = 0;
};
struct KnnState {
  int k = 1;
  std::vector<std::vector<int>> inputs;
  std::vector<int> labels;
};
struct NaiveBayesState {
  std::vector<double> log_prior;  // per class
  std::vector<double> log_lik;    // (class * width + pos) * n_classes + value
};
struct TreeState {
  std::vector<TreeNode> nodes;  // node 0 is the root
};
struct ForestState {
  std::vector<TreeState> trees;
};
struct SvmState {
  std::vector<double> w;  // per class: width * n_classes weights + bias
};
struct AdaState {
  std::vector<Stump> stumps;
  std::vector<double> alphas;
};

struct BaselineModel {
  ModelKind kind = ModelKind::uniform;
  int n_classes = 0;
  int width = 0;
  std::variant<UniformState, MostFrequentState, KnnState, NaiveBayesState, TreeState, ForestState,
               SvmState, AdaState>
      state;
};

// Fits one of the eight baseline kinds. Every kind except uniform throws
// EmptySetError on an empty set.
BaselineModel train_baseline(ModelKind kind, const WindowedSet& ws, const BaselineHyper& hyper,
                             std::uint64_t seed);

// Argmax prediction, ties to the smallest class id. object_hint selects the
// per-object mode for most_frequent and salts the uniform draw; -1 means no
// identity is known.
Prediction predict_next(const BaselineModel& model, const std::vector<int>& window,
                        int object_hint = -1);
Prediction predict_next(const RnnModel& model, const std::vector<int>& window);

}  // namespace mobpat::predict
