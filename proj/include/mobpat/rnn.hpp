#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mobpat::predict {

struct EmptySetError : std::runtime_error {
  EmptySetError() : std::runtime_error("training set is empty") {}
};

// Supervised windows over a time-oriented matrix. Rows may have different
// lengths in prefix mode; fixed-W construction keeps them uniform.
struct WindowedSet {
  int width = 0;      // nominal window length (longest row in prefix mode)
  int n_classes = 0;  // L+1, class 0 = absent
  std::vector<std::vector<int>> inputs;
  std::vector<int> labels;
  std::vector<int> objects;     // object index per row
  std::vector<int> label_bins;  // TOM bin of each label

  std::size_t size() const { return labels.size(); }
};

enum class CellKind { elman, lstm };

// Recurrent classifier over location-id sequences. Inputs are one-hot, which
// the cell realizes as a row lookup into the input weights. All parameters
// live in one flat vector so finite-difference checks can walk them uniformly.
struct RnnModel {
  CellKind cell = CellKind::elman;
  int n_classes = 0;
  int hidden = 0;
  std::vector<double> params;

  bool fitted() const { return !params.empty(); }
};

struct RnnConfig {
  CellKind cell = CellKind::elman;
  int hidden = 32;
  int epochs = 30;
  double lr = 0.05;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
};

struct RnnTrainResult {
  RnnModel model;
  std::vector<double> loss_trace;  // mean cross-entropy per epoch
};

// Seeded uniform(-0.1, 0.1) parameters.
RnnModel init_rnn(int n_classes, int hidden, std::uint64_t seed, CellKind cell = CellKind::elman);

// Softmax class distribution after consuming the whole window.
std::vector<double> rnn_forward(const RnnModel& model, const std::vector<int>& window);

double rnn_loss(const RnnModel& model, const std::vector<int>& window, int label);

// Per-example SGD with full backpropagation through time and global
// gradient-norm clipping.
RnnTrainResult train_rnn(const WindowedSet& ws, const RnnConfig& config);

// Max relative error between analytic gradients and central finite
// differences over n_probes randomly chosen parameters.
double rnn_gradient_check(const RnnModel& model, const std::vector<int>& window, int label,
                          double epsilon, int n_probes, std::uint64_t seed);

}  // namespace mobpat::predict
