#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobpat/baselines.hpp"
#include "mobpat/matrices.hpp"
#include "mobpat/rnn.hpp"

namespace mobpat::predict {

struct WindowTooLongError : std::invalid_argument {
  WindowTooLongError(int window, int bins)
      : std::invalid_argument("window of " + std::to_string(window) +
                              " bins leaves no label inside " + std::to_string(bins) + " bins") {}
};

struct InsufficientHistoryError : std::invalid_argument {
  explicit InsufficientHistoryError(const std::string& what) : std::invalid_argument(what) {}
};

// Fixed-width sliding windows over TOM rows: inputs are bins [s, s + window),
// the label is bin s + window, s starting at first_bin and advancing by
// stride while the label stays below limit_bin. limit_bin -1 means the full
// row. drop_all_absent skips examples whose input and label are all 0.
WindowedSet make_windows(const matrices::TimeOrientedMatrix& tom, int n_classes, int window,
                         int stride = 1, bool drop_all_absent = true, int first_bin = 0,
                         int limit_bin = -1);

// Growing-prefix examples: for each label bin s in (first_bin, limit_bin),
// inputs are bins [first_bin, s). width reports the longest prefix.
WindowedSet make_prefix_set(const matrices::TimeOrientedMatrix& tom, int n_classes,
                            int first_bin = 0, int limit_bin = -1, bool drop_all_absent = true);

struct TrainOptions {
  BaselineHyper hyper;
  RnnConfig rnn;  // cell and seed are overridden per trained model
};

// A fitted model of any kind behind one dispatch surface.
struct AnyModel {
  ModelKind kind = ModelKind::uniform;
  BaselineModel baseline;  // holds the eight classical kinds
  RnnModel net;            // holds rnn and lstm
};

AnyModel train_model(ModelKind kind, const WindowedSet& ws, const TrainOptions& options,
                     std::uint64_t seed);

Prediction predict_next(const AnyModel& model, const std::vector<int>& window,
                        int object_hint = -1);

// Accuracy at one training-history length.
struct ProbePoint {
  int minutes = 0;   // history offered to the model
  int bins = 0;      // the same history in TOM bins
  int n_train = 0;   // supervised examples that history produced
  double accuracy = 0.0;
};

struct ModelEvaluation {
  ModelKind kind = ModelKind::uniform;
  std::vector<ProbePoint> probes;
  double overall_accuracy = 0.0;  // at the longest probe
  std::vector<int> confusion;     // n_classes x n_classes, true x predicted, longest probe
};

struct EvaluationReport {
  int target_bin = 0;
  int n_classes = 0;
  int n_objects = 0;
  std::vector<ModelEvaluation> models;
};

struct EvalOptions {
  int window = 8;
  int stride = 1;
  bool drop_all_absent = true;
  TrainOptions train;
  std::uint64_t seed = 0;
};

// For each model and each probe, trains on the windows inside the last
// probe-minutes of history before target_bin, then scores next-bin
// predictions for every object against TOM column target_bin. Every object
// is queried with the last `window` bins before the target and its own row
// index as the identity hint.
EvaluationReport evaluate_over_time(const matrices::TimeOrientedMatrix& tom, int n_classes,
                                    int target_bin, const std::vector<int>& probe_minutes,
                                    const std::vector<ModelKind>& models,
                                    const EvalOptions& options);

// Directed location-to-location movement weights for one bin transition.
// Ids are 1-based; absent objects contribute nothing.
struct FlowMap {
  int n_locations = 0;
  int bin_t = 0;
  std::string label;
  std::vector<double> weights;  // n_locations x n_locations, origin-major

  double at(int origin, int dest) const {
    return weights[static_cast<std::size_t>(origin - 1) * n_locations + (dest - 1)];
  }
  double& at(int origin, int dest) {
    return weights[static_cast<std::size_t>(origin - 1) * n_locations + (dest - 1)];
  }
};

struct FlowEdge {
  int origin = 0;
  int dest = 0;
  double weight = 0.0;
};

// Observed transitions from bin_t to bin_t + 1.
FlowMap build_flow_map(const matrices::TimeOrientedMatrix& tom, int n_locations, int bin_t);

// Transitions from the observed location at bin_t to the model's prediction
// for bin_t + 1, fed the last `window` bins ending at bin_t.
FlowMap build_predicted_flow_map(const matrices::TimeOrientedMatrix& tom, int n_locations,
                                 int bin_t, const AnyModel& model, int window);

// Nonzero edges, heaviest first; ties by (origin, dest) ascending.
std::vector<FlowEdge> top_edges(const FlowMap& flow, int k);

}  // namespace mobpat::predict
