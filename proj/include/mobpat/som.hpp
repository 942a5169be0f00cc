#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mobpat/matrices.hpp"

namespace mobpat::som {

// Per-object feature rows, row-major. Rows pair with dataset object indexes.
struct FeatureMatrix {
  int n = 0;
  int dim = 0;
  std::vector<double> data;

  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * dim + j]; }
  const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * dim; }
};

enum class Normalize { zscore, minmax, none };

// Rectangular lattice, 4-neighbor topology. weights is (rows*cols) x dim row-major;
// node (r,c) lives at flat index r*cols+c.
struct SomGrid {
  int rows = 0;
  int cols = 0;
  int dim = 0;
  std::vector<double> weights;

  double* node(int r, int c) { return weights.data() + static_cast<std::size_t>(r * cols + c) * dim; }
  const double* node(int r, int c) const {
    return weights.data() + static_cast<std::size_t>(r * cols + c) * dim;
  }
};

struct TrainSchedule {
  int epochs = 50;
  double lr0 = 0.5;
  double lr1 = 0.05;
  double sigma0 = 3.0;
  double sigma1 = 0.5;
  std::uint64_t seed = 0;
};

struct TrainResult {
  SomGrid grid;
  // qe_trace[0] is the quantization error of the initial grid, qe_trace[e] after epoch e.
  std::vector<double> qe_trace;
};

struct UMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

struct ClusterAssignment {
  std::vector<std::pair<int, int>> bmu;  // per object, (r,c)
  std::vector<int> hits;                 // per node, row-major; sums to object count
};

struct OutstandingHit {
  int object = 0;
  int row = 0;
  int col = 0;
  double u_value = 0.0;
};

struct EmptyFeaturesError : std::runtime_error {
  EmptyFeaturesError() : std::runtime_error("feature matrix has no rows") {}
};

struct BadScheduleError : std::invalid_argument {
  explicit BadScheduleError(const std::string& what) : std::invalid_argument(what) {}
};

// Row i = concat(freq row i, spent row i), then each column normalized.
// Constant columns map to 0 under zscore and minmax.
FeatureMatrix build_features(const matrices::VisitFrequencyMatrix& freq,
                             const matrices::TimeSpentMatrix& spent,
                             Normalize normalize);

// Each node weight is a feature row sampled uniformly with replacement.
SomGrid init_grid(int rows, int cols, const FeatureMatrix& features, std::uint64_t seed);

// Ties resolve to the smallest row-major node index.
std::pair<int, int> best_matching_unit(const SomGrid& grid, const double* x);
std::pair<int, int> best_matching_unit(const SomGrid& grid, const std::vector<double>& x);

// Gaussian kernel over lattice distance: exp(-d^2 / (2 sigma^2)).
double neighborhood_weight(double dist_grid, double sigma);

double quantization_error(const SomGrid& grid, const FeatureMatrix& features);

// Online SOM updates with exponential decay of lr and sigma across epochs.
// lr0 = lr1 = 0 is accepted and leaves the grid unchanged.
TrainResult train(SomGrid grid, const FeatureMatrix& features, const TrainSchedule& schedule);

// Per-node mean Euclidean distance to its existing 4-neighbors.
UMatrix compute_umatrix(const SomGrid& grid);

ClusterAssignment assign_and_aggregate(const SomGrid& grid, const FeatureMatrix& features);

// Flags every object whose BMU's U-value exceeds mean(U) + k * std(U),
// sorted by descending u_value (ties by ascending object index).
std::vector<OutstandingHit> detect_outstanding(const UMatrix& umatrix,
                                               const ClusterAssignment& assignment,
                                               double k);

// ceil(sqrt(5 * sqrt(N))) per side, at least 2.
int default_grid_side(int n_objects);

}  // namespace mobpat::som
