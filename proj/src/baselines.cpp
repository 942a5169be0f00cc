#include "mobpat/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mobpat/rng.hpp"

namespace mobpat::predict {

namespace {

constexpr double kGiniEps = 1e-12;

int argmax_smallest(const std::vector<double>& scores) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(scores.size()); ++c) {
    if (scores[static_cast<std::size_t>(c)] > scores[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

// Majority class; ties go to the smallest id. Works for weighted counts.
template <typename T>
int majority(const std::vector<T>& counts) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(counts.size()); ++c) {
    if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

Prediction point_mass(int label, int n_classes) {
  Prediction p;
  p.label = label;
  p.probs.assign(static_cast<std::size_t>(n_classes), 0.0);
  p.probs[static_cast<std::size_t>(label)] = 1.0;
  return p;
}

int feature_value(const std::vector<int>& window, int feature, int n_classes) {
  const int pos = feature / n_classes;
  const int val = feature % n_classes;
  if (pos >= static_cast<int>(window.size())) return 0;
  return window[static_cast<std::size_t>(pos)] == val ? 1 : 0;
}

// CART over one-hot features with Gini impurity. Forest trees pass an rng to
// draw mtry candidate features per split; the plain tree scans all of them.
class TreeBuilder {
 public:
  TreeBuilder(const WindowedSet& ws, const std::vector<int>& rows, int max_depth, int min_leaf,
              Rng* rng, int mtry)
      : ws_(ws),
        rows_(rows),
        n_classes_(ws.n_classes),
        width_(ws.width),
        features_(ws.width * ws.n_classes),
        max_depth_(max_depth),
        min_leaf_(min_leaf),
        rng_(rng),
        mtry_(mtry) {}

  TreeState build() {
    TreeState tree;
    std::vector<int> idx = rows_;
    grow(tree, std::move(idx), 0);
    return tree;
  }

 private:
  int leaf(TreeState& tree, const std::vector<long>& counts) {
    tree.nodes.push_back(TreeNode{-1, -1, -1, majority(counts)});
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  double gini(const std::vector<long>& counts, long total) {
    if (total == 0) return 0.0;
    double sq = 0.0;
    for (const long c : counts) {
      const double p = static_cast<double>(c) / static_cast<double>(total);
      sq += p * p;
    }
    return 1.0 - sq;
  }

  std::vector<int> candidates() {
    if (rng_ == nullptr) {
      std::vector<int> all(static_cast<std::size_t>(features_));
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    // partial Fisher-Yates for mtry distinct features, then sorted so the
    // smallest-index tie rule is the same as the full scan's
    std::vector<int> pool(static_cast<std::size_t>(features_));
    std::iota(pool.begin(), pool.end(), 0);
    const int m = std::min(mtry_, features_);
    for (int i = 0; i < m; ++i) {
      const std::size_t j = i + rng_->index(pool.size() - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(m));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  int grow(TreeState& tree, std::vector<int> idx, int depth) {
    std::vector<long> total(static_cast<std::size_t>(n_classes_), 0);
    for (const int i : idx) ++total[static_cast<std::size_t>(ws_.labels[static_cast<std::size_t>(i)])];
    const long n = static_cast<long>(idx.size());

    const double node_gini = gini(total, n);
    if (node_gini == 0.0 || depth >= max_depth_ || n < 2 * min_leaf_) {
      return leaf(tree, total);
    }

    // class histogram per present one-hot feature; absent side = total - hist
    std::vector<long> hist(static_cast<std::size_t>(features_) * n_classes_, 0);
    for (const int i : idx) {
      const auto& w = ws_.inputs[static_cast<std::size_t>(i)];
      const int label = ws_.labels[static_cast<std::size_t>(i)];
      for (int pos = 0; pos < width_ && pos < static_cast<int>(w.size()); ++pos) {
        const std::size_t f = static_cast<std::size_t>(pos) * n_classes_ + w[static_cast<std::size_t>(pos)];
        ++hist[f * n_classes_ + static_cast<std::size_t>(label)];
      }
    }

    int best_feature = -1;
    double best_score = node_gini - kGiniEps;
    for (const int f : candidates()) {
      long n_right = 0;
      for (int c = 0; c < n_classes_; ++c) {
        n_right += hist[static_cast<std::size_t>(f) * n_classes_ + c];
      }
      const long n_left = n - n_right;
      if (n_right < min_leaf_ || n_left < min_leaf_) continue;

      std::vector<long> right(static_cast<std::size_t>(n_classes_));
      std::vector<long> left(static_cast<std::size_t>(n_classes_));
      for (int c = 0; c < n_classes_; ++c) {
        right[static_cast<std::size_t>(c)] = hist[static_cast<std::size_t>(f) * n_classes_ + c];
        left[static_cast<std::size_t>(c)] = total[static_cast<std::size_t>(c)] - right[static_cast<std::size_t>(c)];
      }
      const double score = (static_cast<double>(n_left) * gini(left, n_left) +
                            static_cast<double>(n_right) * gini(right, n_right)) /
                           static_cast<double>(n);
      if (score < best_score) {
        best_score = score;
        best_feature = f;
      }
    }
    if (best_feature < 0) return leaf(tree, total);

    std::vector<int> left_idx, right_idx;
    for (const int i : idx) {
      if (feature_value(ws_.inputs[static_cast<std::size_t>(i)], best_feature, n_classes_) == 1) {
        right_idx.push_back(i);
      } else {
        left_idx.push_back(i);
      }
    }
    idx.clear();
    idx.shrink_to_fit();

    const int node = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{best_feature, -1, -1, 0});
    const int left_child = grow(tree, std::move(left_idx), depth + 1);
    const int right_child = grow(tree, std::move(right_idx), depth + 1);
    tree.nodes[static_cast<std::size_t>(node)].left = left_child;
    tree.nodes[static_cast<std::size_t>(node)].right = right_child;
    return node;
  }

  const WindowedSet& ws_;
  const std::vector<int>& rows_;
  int n_classes_, width_, features_, max_depth_, min_leaf_;
  Rng* rng_;
  int mtry_;
};

int tree_predict(const TreeState& tree, const std::vector<int>& window, int n_classes) {
  int node = 0;
  while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& tn = tree.nodes[static_cast<std::size_t>(node)];
    node = feature_value(window, tn.feature, n_classes) == 1 ? tn.right : tn.left;
  }
  return tree.nodes[static_cast<std::size_t>(node)].label;
}

MostFrequentState fit_most_frequent(const WindowedSet& ws) {
  MostFrequentState state;
  std::map<int, std::map<int, long>> per_object;
  std::map<int, long> global;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    ++per_object[ws.objects[i]][ws.labels[i]];
    ++global[ws.labels[i]];
  }
  const auto mode_of = [](const std::map<int, long>& counts) {
    int best = 0;
    long best_count = -1;
    for (const auto& [label, count] : counts) {
      if (count > best_count) {
        best = label;
        best_count = count;
      }
    }
    return best;
  };
  for (const auto& [object, counts] : per_object) state.per_object[object] = mode_of(counts);
  state.global_mode = mode_of(global);
  return state;
}

NaiveBayesState fit_naive_bayes(const WindowedSet& ws) {
  const int c_n = ws.n_classes;
  const int w_n = ws.width;

  std::vector<long> class_count(static_cast<std::size_t>(c_n), 0);
  std::vector<long> value_count(static_cast<std::size_t>(c_n) * w_n * c_n, 0);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const int label = ws.labels[i];
    ++class_count[static_cast<std::size_t>(label)];
    const auto& w = ws.inputs[i];
    for (int pos = 0; pos < w_n && pos < static_cast<int>(w.size()); ++pos) {
      const std::size_t at = (static_cast<std::size_t>(label) * w_n + pos) * c_n +
                             static_cast<std::size_t>(w[static_cast<std::size_t>(pos)]);
      ++value_count[at];
    }
  }

  NaiveBayesState state;
  state.log_prior.resize(static_cast<std::size_t>(c_n));
  state.log_lik.resize(value_count.size());
  const double m = static_cast<double>(ws.size());
  for (int c = 0; c < c_n; ++c) {
    state.log_prior[static_cast<std::size_t>(c)] =
        std::log(static_cast<double>(class_count[static_cast<std::size_t>(c)]) + 1.0) -
        std::log(m + c_n);
    for (int pos = 0; pos < w_n; ++pos) {
      for (int v = 0; v < c_n; ++v) {
        const std::size_t at = (static_cast<std::size_t>(c) * w_n + pos) * c_n + v;
        state.log_lik[at] =
            std::log(static_cast<double>(value_count[at]) + 1.0) -
            std::log(static_cast<double>(class_count[static_cast<std::size_t>(c)]) + c_n);
      }
    }
  }
  return state;
}

SvmState fit_linear_svm(const WindowedSet& ws, const BaselineHyper& hyper, std::uint64_t seed) {
  const int c_n = ws.n_classes;
  const int f_n = ws.width * c_n;  // + bias at index f_n

  SvmState state;
  state.w.assign(static_cast<std::size_t>(c_n) * (f_n + 1), 0.0);

  Rng rng(mix_seed(seed, 0x73766D));
  std::vector<int> order(ws.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < hyper.svm_epochs; ++epoch) {
    rng.shuffle(order);
    for (const int i : order) {
      const auto& w = ws.inputs[static_cast<std::size_t>(i)];
      const int label = ws.labels[static_cast<std::size_t>(i)];
      for (int c = 0; c < c_n; ++c) {
        double* wc = state.w.data() + static_cast<std::size_t>(c) * (f_n + 1);
        double score = wc[f_n];
        for (int pos = 0; pos < ws.width && pos < static_cast<int>(w.size()); ++pos) {
          score += wc[pos * c_n + w[static_cast<std::size_t>(pos)]];
        }
        const double y = label == c ? 1.0 : -1.0;
        if (y * score < 1.0) {
          for (int pos = 0; pos < ws.width && pos < static_cast<int>(w.size()); ++pos) {
            wc[pos * c_n + w[static_cast<std::size_t>(pos)]] += hyper.svm_lr * y;
          }
          wc[f_n] += hyper.svm_lr * y;
        }
      }
    }
  }
  return state;
}

AdaState fit_adaboost(const WindowedSet& ws, const BaselineHyper& hyper) {
  const int c_n = ws.n_classes;
  const int w_n = ws.width;
  const int f_n = w_n * c_n;
  const std::size_t m = ws.size();

  AdaState state;
  std::vector<double> weight(m, 1.0 / static_cast<double>(m));

  for (int round = 0; round < hyper.ada_rounds; ++round) {
    // weighted class mass per present one-hot feature
    std::vector<double> hist(static_cast<std::size_t>(f_n) * c_n, 0.0);
    std::vector<double> total(static_cast<std::size_t>(c_n), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const int label = ws.labels[i];
      total[static_cast<std::size_t>(label)] += weight[i];
      const auto& w = ws.inputs[i];
      for (int pos = 0; pos < w_n && pos < static_cast<int>(w.size()); ++pos) {
        const std::size_t f = static_cast<std::size_t>(pos) * c_n +
                              static_cast<std::size_t>(w[static_cast<std::size_t>(pos)]);
        hist[f * c_n + static_cast<std::size_t>(label)] += weight[i];
      }
    }

    Stump best;
    double best_err = 2.0;
    std::vector<double> side1(static_cast<std::size_t>(c_n));
    std::vector<double> side0(static_cast<std::size_t>(c_n));
    for (int f = 0; f < f_n; ++f) {
      double mass1 = 0.0;
      for (int c = 0; c < c_n; ++c) {
        side1[static_cast<std::size_t>(c)] = hist[static_cast<std::size_t>(f) * c_n + c];
        side0[static_cast<std::size_t>(c)] = total[static_cast<std::size_t>(c)] - side1[static_cast<std::size_t>(c)];
        mass1 += side1[static_cast<std::size_t>(c)];
      }
      (void)mass1;
      const int label1 = majority(side1);
      const int label0 = majority(side0);
      const double err =
          1.0 - side1[static_cast<std::size_t>(label1)] - side0[static_cast<std::size_t>(label0)];
      if (err < best_err) {
        best_err = err;
        best = Stump{f, label0, label1};
      }
    }

    const double err = std::clamp(best_err, 1e-12, 1.0 - 1e-12);
    const double alpha = std::log((1.0 - err) / err) + std::log(static_cast<double>(c_n) - 1.0);
    if (alpha <= 0.0) break;  // no stump beats random guessing any more

    state.stumps.push_back(best);
    state.alphas.push_back(alpha);

    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const int pred = feature_value(ws.inputs[i], best.feature, c_n) == 1 ? best.label_if_one
                                                                           : best.label_if_zero;
      if (pred != ws.labels[i]) weight[i] *= std::exp(alpha);
      sum += weight[i];
    }
    for (double& w : weight) w /= sum;

    if (best_err <= 0.0) break;  // perfectly separated; further rounds change nothing
  }
  return state;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::uniform: return "uniform";
    case ModelKind::most_frequent: return "most_frequent";
    case ModelKind::knn: return "knn";
    case ModelKind::naive_bayes: return "naive_bayes";
    case ModelKind::decision_tree: return "decision_tree";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::linear_svm: return "linear_svm";
    case ModelKind::adaboost: return "adaboost";
    case ModelKind::rnn: return "rnn";
    case ModelKind::lstm: return "lstm";
  }
  return "unknown";
}

std::optional<ModelKind> model_kind_of(std::string_view name) {
  for (const auto kind :
       {ModelKind::uniform, ModelKind::most_frequent, ModelKind::knn, ModelKind::naive_bayes,
        ModelKind::decision_tree, ModelKind::random_forest, ModelKind::linear_svm,
        ModelKind::adaboost, ModelKind::rnn, ModelKind::lstm}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

const std::vector<ModelKind>& baseline_kinds() {
  static const std::vector<ModelKind> kinds = {
      ModelKind::uniform,       ModelKind::most_frequent, ModelKind::knn,
      ModelKind::naive_bayes,   ModelKind::decision_tree, ModelKind::random_forest,
      ModelKind::linear_svm,    ModelKind::adaboost,
  };
  return kinds;
}

BaselineModel train_baseline(ModelKind kind, const WindowedSet& ws, const BaselineHyper& hyper,
                             std::uint64_t seed) {
  if (kind != ModelKind::uniform && ws.size() == 0) throw EmptySetError();
  if (ws.n_classes < 1) throw std::invalid_argument("windowed set lacks a class count");

  BaselineModel model;
  model.kind = kind;
  model.n_classes = ws.n_classes;
  model.width = ws.width;

  switch (kind) {
    case ModelKind::uniform:
      model.state = UniformState{seed};
      break;
    case ModelKind::most_frequent:
      model.state = fit_most_frequent(ws);
      break;
    case ModelKind::knn: {
      KnnState state;
      state.k = std::min<int>(hyper.knn_k, static_cast<int>(ws.size()));
      state.inputs = ws.inputs;
      state.labels = ws.labels;
      model.state = std::move(state);
      break;
    }
    case ModelKind::naive_bayes:
      model.state = fit_naive_bayes(ws);
      break;
    case ModelKind::decision_tree: {
      std::vector<int> rows(ws.size());
      std::iota(rows.begin(), rows.end(), 0);
      model.state =
          TreeBuilder(ws, rows, hyper.tree_max_depth, hyper.tree_min_leaf, nullptr, 0).build();
      break;
    }
    case ModelKind::random_forest: {
      ForestState forest;
      const int mtry = std::max(
          1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(ws.width * ws.n_classes)))));
      for (int t = 0; t < hyper.forest_trees; ++t) {
        Rng rng(mix_seed(seed, 0x7266, static_cast<std::uint64_t>(t)));
        std::vector<int> rows(ws.size());
        for (auto& r : rows) r = static_cast<int>(rng.index(ws.size()));
        forest.trees.push_back(
            TreeBuilder(ws, rows, hyper.tree_max_depth, hyper.tree_min_leaf, &rng, mtry).build());
      }
      model.state = std::move(forest);
      break;
    }
    case ModelKind::linear_svm:
      model.state = fit_linear_svm(ws, hyper, seed);
      break;
    case ModelKind::adaboost:
      model.state = fit_adaboost(ws, hyper);
      break;
    case ModelKind::rnn:
    case ModelKind::lstm:
      throw std::invalid_argument("recurrent kinds are trained by train_rnn");
  }
  return model;
}

Prediction predict_next(const BaselineModel& model, const std::vector<int>& window,
                        int object_hint) {
  if (model.n_classes < 1) throw UnfittedModelError();
  const int c_n = model.n_classes;

  switch (model.kind) {
    case ModelKind::uniform: {
      const auto& state = std::get<UniformState>(model.state);
      std::uint64_t h = mix_seed(state.seed, static_cast<std::uint64_t>(object_hint) + 1);
      for (const int v : window) h = mix_seed(h, static_cast<std::uint64_t>(v) + 1);
      Prediction p;
      p.label = static_cast<int>(Rng(h).index(static_cast<std::uint64_t>(c_n)));
      p.probs.assign(static_cast<std::size_t>(c_n), 1.0 / c_n);
      return p;
    }
    case ModelKind::most_frequent: {
      const auto& state = std::get<MostFrequentState>(model.state);
      if (object_hint >= 0) {
        const auto it = state.per_object.find(object_hint);
        return point_mass(it != state.per_object.end() ? it->second : state.global_mode, c_n);
      }
      std::map<int, long> counts;
      for (const int v : window) ++counts[v];
      int best = state.global_mode;
      long best_count = -1;
      for (const auto& [value, count] : counts) {
        if (count > best_count) {
          best = value;
          best_count = count;
        }
      }
      return point_mass(best, c_n);
    }
    case ModelKind::knn: {
      const auto& state = std::get<KnnState>(model.state);
      std::vector<std::pair<int, int>> ranked;  // (distance, training index)
      ranked.reserve(state.inputs.size());
      for (std::size_t i = 0; i < state.inputs.size(); ++i) {
        const auto& train = state.inputs[i];
        const std::size_t len = std::max(train.size(), window.size());
        int dist = 0;
        for (std::size_t pos = 0; pos < len; ++pos) {
          const int a = pos < train.size() ? train[pos] : -1;
          const int b = pos < window.size() ? window[pos] : -2;
          dist += a == b ? 0 : 1;
        }
        ranked.emplace_back(dist, static_cast<int>(i));
      }
      std::sort(ranked.begin(), ranked.end());

      std::vector<double> votes(static_cast<std::size_t>(c_n), 0.0);
      const int k = std::min<int>(state.k, static_cast<int>(ranked.size()));
      for (int i = 0; i < k; ++i) {
        ++votes[static_cast<std::size_t>(state.labels[static_cast<std::size_t>(ranked[static_cast<std::size_t>(i)].second)])];
      }
      Prediction p;
      p.label = argmax_smallest(votes);
      p.probs = votes;
      for (double& v : p.probs) v /= k;
      return p;
    }
    case ModelKind::naive_bayes: {
      const auto& state = std::get<NaiveBayesState>(model.state);
      std::vector<double> score = state.log_prior;
      for (int c = 0; c < c_n; ++c) {
        for (int pos = 0; pos < model.width && pos < static_cast<int>(window.size()); ++pos) {
          score[static_cast<std::size_t>(c)] +=
              state.log_lik[(static_cast<std::size_t>(c) * model.width + pos) * c_n +
                            static_cast<std::size_t>(window[static_cast<std::size_t>(pos)])];
        }
      }
      Prediction p;
      p.label = argmax_smallest(score);
      const double top = score[static_cast<std::size_t>(p.label)];
      double sum = 0.0;
      p.probs.resize(static_cast<std::size_t>(c_n));
      for (int c = 0; c < c_n; ++c) {
        p.probs[static_cast<std::size_t>(c)] = std::exp(score[static_cast<std::size_t>(c)] - top);
        sum += p.probs[static_cast<std::size_t>(c)];
      }
      for (double& v : p.probs) v /= sum;
      return p;
    }
    case ModelKind::decision_tree:
      return point_mass(tree_predict(std::get<TreeState>(model.state), window, c_n), c_n);
    case ModelKind::random_forest: {
      const auto& state = std::get<ForestState>(model.state);
      std::vector<double> votes(static_cast<std::size_t>(c_n), 0.0);
      for (const auto& tree : state.trees) {
        ++votes[static_cast<std::size_t>(tree_predict(tree, window, c_n))];
      }
      Prediction p;
      p.label = argmax_smallest(votes);
      p.probs = votes;
      for (double& v : p.probs) v /= static_cast<double>(state.trees.size());
      return p;
    }
    case ModelKind::linear_svm: {
      const auto& state = std::get<SvmState>(model.state);
      const int f_n = model.width * c_n;
      std::vector<double> score(static_cast<std::size_t>(c_n));
      for (int c = 0; c < c_n; ++c) {
        const double* wc = state.w.data() + static_cast<std::size_t>(c) * (f_n + 1);
        double s = wc[f_n];
        for (int pos = 0; pos < model.width && pos < static_cast<int>(window.size()); ++pos) {
          s += wc[pos * c_n + window[static_cast<std::size_t>(pos)]];
        }
        score[static_cast<std::size_t>(c)] = s;
      }
      return point_mass(argmax_smallest(score), c_n);
    }
    case ModelKind::adaboost: {
      const auto& state = std::get<AdaState>(model.state);
      std::vector<double> score(static_cast<std::size_t>(c_n), 0.0);
      for (std::size_t r = 0; r < state.stumps.size(); ++r) {
        const auto& s = state.stumps[r];
        const int pred =
            feature_value(window, s.feature, c_n) == 1 ? s.label_if_one : s.label_if_zero;
        score[static_cast<std::size_t>(pred)] += state.alphas[r];
      }
      return point_mass(argmax_smallest(score), c_n);
    }
    case ModelKind::rnn:
    case ModelKind::lstm:
      break;
  }
  throw UnfittedModelError();
}

Prediction predict_next(const RnnModel& model, const std::vector<int>& window) {
  if (!model.fitted()) throw UnfittedModelError();
  Prediction p;
  p.probs = rnn_forward(model, window);
  p.label = argmax_smallest(p.probs);
  return p;
}

}  // namespace mobpat::predict
