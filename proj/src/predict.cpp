#include "mobpat/predict.hpp"

#include <algorithm>
#include <cmath>

#include "mobpat/rng.hpp"

namespace mobpat::predict {

namespace {

void check_cells(const matrices::TimeOrientedMatrix& tom, int n_classes, int first, int limit) {
  for (int i = 0; i < tom.n_objects; ++i) {
    for (int b = first; b < limit; ++b) {
      const int v = tom.at(i, b);
      if (v < 0 || v >= n_classes) {
        throw std::invalid_argument("cell value " + std::to_string(v) +
                                    " outside class range [0, " + std::to_string(n_classes) + ")");
      }
    }
  }
}

std::vector<int> row_slice(const matrices::TimeOrientedMatrix& tom, int object, int first,
                           int limit) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(limit - first));
  for (int b = first; b < limit; ++b) out.push_back(tom.at(object, b));
  return out;
}

bool all_absent(const std::vector<int>& window, int label) {
  if (label != 0) return false;
  return std::all_of(window.begin(), window.end(), [](int v) { return v == 0; });
}

}  // namespace

WindowedSet make_windows(const matrices::TimeOrientedMatrix& tom, int n_classes, int window,
                         int stride, bool drop_all_absent, int first_bin, int limit_bin) {
  if (window < 1) throw std::invalid_argument("window must be at least 1 bin");
  if (stride < 1) throw std::invalid_argument("stride must be at least 1 bin");
  if (n_classes < 1) throw std::invalid_argument("class count must be positive");

  const int limit = limit_bin < 0 ? tom.bins() : std::min(limit_bin, tom.bins());
  const int first = std::max(0, first_bin);
  if (window + 1 > limit - first) throw WindowTooLongError(window, limit - first);
  check_cells(tom, n_classes, first, limit);

  WindowedSet ws;
  ws.width = window;
  ws.n_classes = n_classes;
  for (int i = 0; i < tom.n_objects; ++i) {
    for (int s = first; s + window < limit; s += stride) {
      std::vector<int> input = row_slice(tom, i, s, s + window);
      const int label = tom.at(i, s + window);
      if (drop_all_absent && all_absent(input, label)) continue;
      ws.inputs.push_back(std::move(input));
      ws.labels.push_back(label);
      ws.objects.push_back(i);
      ws.label_bins.push_back(s + window);
    }
  }
  return ws;
}

WindowedSet make_prefix_set(const matrices::TimeOrientedMatrix& tom, int n_classes, int first_bin,
                            int limit_bin, bool drop_all_absent) {
  if (n_classes < 1) throw std::invalid_argument("class count must be positive");
  const int limit = limit_bin < 0 ? tom.bins() : std::min(limit_bin, tom.bins());
  const int first = std::max(0, first_bin);
  if (limit - first < 2) throw WindowTooLongError(1, limit - first);
  check_cells(tom, n_classes, first, limit);

  WindowedSet ws;
  ws.width = limit - first - 1;
  ws.n_classes = n_classes;
  for (int i = 0; i < tom.n_objects; ++i) {
    for (int s = first + 1; s < limit; ++s) {
      std::vector<int> input = row_slice(tom, i, first, s);
      const int label = tom.at(i, s);
      if (drop_all_absent && all_absent(input, label)) continue;
      ws.inputs.push_back(std::move(input));
      ws.labels.push_back(label);
      ws.objects.push_back(i);
      ws.label_bins.push_back(s);
    }
  }
  return ws;
}

AnyModel train_model(ModelKind kind, const WindowedSet& ws, const TrainOptions& options,
                     std::uint64_t seed) {
  AnyModel model;
  model.kind = kind;
  if (kind == ModelKind::rnn || kind == ModelKind::lstm) {
    RnnConfig config = options.rnn;
    config.cell = kind == ModelKind::lstm ? CellKind::lstm : CellKind::elman;
    config.seed = seed;
    model.net = train_rnn(ws, config).model;
  } else {
    model.baseline = train_baseline(kind, ws, options.hyper, seed);
  }
  return model;
}

Prediction predict_next(const AnyModel& model, const std::vector<int>& window, int object_hint) {
  if (model.kind == ModelKind::rnn || model.kind == ModelKind::lstm) {
    return predict_next(model.net, window);
  }
  return predict_next(model.baseline, window, object_hint);
}

EvaluationReport evaluate_over_time(const matrices::TimeOrientedMatrix& tom, int n_classes,
                                    int target_bin, const std::vector<int>& probe_minutes,
                                    const std::vector<ModelKind>& models,
                                    const EvalOptions& options) {
  const int t_bins = tom.bins();
  if (target_bin < 1 || target_bin >= t_bins) {
    throw matrices::BinOutOfRangeError(target_bin);
  }
  if (probe_minutes.empty()) throw InsufficientHistoryError("no probe lengths given");
  if (options.window < 1) throw std::invalid_argument("window must be at least 1 bin");

  const std::int64_t bin_seconds = tom.binning.bin_seconds;
  std::vector<int> probe_bins;
  for (const int minutes : probe_minutes) {
    const int bins = static_cast<int>(static_cast<std::int64_t>(minutes) * 60 / bin_seconds);
    if (bins > target_bin) {
      throw InsufficientHistoryError("probe of " + std::to_string(minutes) +
                                     " minutes reaches before the first bin");
    }
    if (bins < options.window + 1) {
      throw InsufficientHistoryError("probe of " + std::to_string(minutes) +
                                     " minutes is shorter than one window plus its label");
    }
    probe_bins.push_back(bins);
  }
  const std::size_t longest =
      std::max_element(probe_bins.begin(), probe_bins.end()) - probe_bins.begin();

  EvaluationReport report;
  report.target_bin = target_bin;
  report.n_classes = n_classes;
  report.n_objects = tom.n_objects;

  for (const ModelKind kind : models) {
    ModelEvaluation eval;
    eval.kind = kind;
    for (std::size_t p = 0; p < probe_bins.size(); ++p) {
      const int bins = probe_bins[p];
      const WindowedSet ws = make_windows(tom, n_classes, options.window, options.stride,
                                          options.drop_all_absent, target_bin - bins, target_bin);
      const std::uint64_t seed =
          mix_seed(options.seed, static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(p));
      const AnyModel model = train_model(kind, ws, options.train, seed);

      std::vector<int> confusion(static_cast<std::size_t>(n_classes) * n_classes, 0);
      int correct = 0;
      for (int i = 0; i < tom.n_objects; ++i) {
        const std::vector<int> window =
            row_slice(tom, i, target_bin - options.window, target_bin);
        const int pred = predict_next(model, window, i).label;
        const int truth = tom.at(i, target_bin);
        if (pred == truth) ++correct;
        ++confusion[static_cast<std::size_t>(truth) * n_classes + pred];
      }

      ProbePoint point;
      point.minutes = probe_minutes[p];
      point.bins = bins;
      point.n_train = static_cast<int>(ws.size());
      point.accuracy =
          tom.n_objects > 0 ? static_cast<double>(correct) / tom.n_objects : 0.0;
      eval.probes.push_back(point);

      if (p == longest) {
        eval.overall_accuracy = point.accuracy;
        eval.confusion = std::move(confusion);
      }
    }
    report.models.push_back(std::move(eval));
  }
  return report;
}

FlowMap build_flow_map(const matrices::TimeOrientedMatrix& tom, int n_locations, int bin_t) {
  if (n_locations < 1) throw std::invalid_argument("location count must be positive");
  if (bin_t < 0 || bin_t + 1 >= tom.bins()) throw matrices::BinOutOfRangeError(bin_t);
  check_cells(tom, n_locations + 1, bin_t, bin_t + 2);

  FlowMap flow;
  flow.n_locations = n_locations;
  flow.bin_t = bin_t;
  flow.label = "actual";
  flow.weights.assign(static_cast<std::size_t>(n_locations) * n_locations, 0.0);
  for (int i = 0; i < tom.n_objects; ++i) {
    const int origin = tom.at(i, bin_t);
    const int dest = tom.at(i, bin_t + 1);
    if (origin == 0 || dest == 0) continue;
    flow.at(origin, dest) += 1.0;
  }
  return flow;
}

FlowMap build_predicted_flow_map(const matrices::TimeOrientedMatrix& tom, int n_locations,
                                 int bin_t, const AnyModel& model, int window) {
  if (n_locations < 1) throw std::invalid_argument("location count must be positive");
  if (bin_t < 0 || bin_t >= tom.bins()) throw matrices::BinOutOfRangeError(bin_t);
  if (window < 1 || window > bin_t + 1) {
    throw InsufficientHistoryError("window of " + std::to_string(window) +
                                   " bins does not fit before bin " + std::to_string(bin_t + 1));
  }

  FlowMap flow;
  flow.n_locations = n_locations;
  flow.bin_t = bin_t;
  flow.label = "predicted";
  flow.weights.assign(static_cast<std::size_t>(n_locations) * n_locations, 0.0);
  for (int i = 0; i < tom.n_objects; ++i) {
    const int origin = tom.at(i, bin_t);
    if (origin == 0) continue;
    const std::vector<int> win = row_slice(tom, i, bin_t + 1 - window, bin_t + 1);
    const int dest = predict_next(model, win, i).label;
    if (dest < 1 || dest > n_locations) continue;
    flow.at(origin, dest) += 1.0;
  }
  return flow;
}

std::vector<FlowEdge> top_edges(const FlowMap& flow, int k) {
  std::vector<FlowEdge> edges;
  for (int origin = 1; origin <= flow.n_locations; ++origin) {
    for (int dest = 1; dest <= flow.n_locations; ++dest) {
      const double w = flow.at(origin, dest);
      if (w > 0.0) edges.push_back(FlowEdge{origin, dest, w});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const FlowEdge& a, const FlowEdge& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.origin != b.origin) return a.origin < b.origin;
    return a.dest < b.dest;
  });
  if (k >= 0 && static_cast<int>(edges.size()) > k) edges.resize(static_cast<std::size_t>(k));
  return edges;
}

}  // namespace mobpat::predict
