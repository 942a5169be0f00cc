#include "mobpat/som.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mobpat/rng.hpp"

namespace mobpat::som {

namespace {

double sq_distance(const double* a, const double* b, int dim) {
  double acc = 0.0;
  for (int j = 0; j < dim; ++j) {
    const double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

// Exponential interpolation from v0 to v1 across epochs; epoch 0 yields v0,
// epoch epochs-1 yields v1. Degenerates to v0 for a single epoch or v0 <= 0.
double decayed(double v0, double v1, int epoch, int epochs) {
  if (v0 <= 0.0) return 0.0;
  if (epochs <= 1) return v0;
  const double t = static_cast<double>(epoch) / (epochs - 1);
  return v0 * std::pow(v1 / v0, t);
}

void validate(const TrainSchedule& s) {
  if (s.epochs < 1) throw BadScheduleError("epochs must be positive");
  if (s.lr0 < 0.0 || s.lr0 > 1.0) throw BadScheduleError("lr0 must lie in [0,1]");
  if (s.lr1 < 0.0 || s.lr1 > s.lr0) throw BadScheduleError("need 0 <= lr1 <= lr0");
  if (s.sigma1 <= 0.0 || s.sigma0 < s.sigma1) throw BadScheduleError("need sigma0 >= sigma1 > 0");
}

}  // namespace

FeatureMatrix build_features(const matrices::VisitFrequencyMatrix& freq,
                             const matrices::TimeSpentMatrix& spent,
                             Normalize normalize) {
  const int n = freq.objects();
  const int l = freq.locations();

  FeatureMatrix out;
  out.n = n;
  out.dim = 2 * l;
  out.data.resize(static_cast<std::size_t>(n) * out.dim);
  for (int i = 0; i < n; ++i) {
    for (int loc = 1; loc <= l; ++loc) {
      out.data[static_cast<std::size_t>(i) * out.dim + (loc - 1)] = freq.at(i, loc);
      out.data[static_cast<std::size_t>(i) * out.dim + l + (loc - 1)] = spent.at(i, loc);
    }
  }
  if (normalize == Normalize::none || n == 0) return out;

  for (int j = 0; j < out.dim; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = out.at(i, j);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    const double mean = sum / n;

    if (normalize == Normalize::minmax) {
      const double span = hi - lo;
      for (int i = 0; i < n; ++i) {
        double& v = out.data[static_cast<std::size_t>(i) * out.dim + j];
        v = span > 0.0 ? (v - lo) / span : 0.0;
      }
    } else {
      double var = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = out.at(i, j) - mean;
        var += d * d;
      }
      const double sd = std::sqrt(var / n);
      for (int i = 0; i < n; ++i) {
        double& v = out.data[static_cast<std::size_t>(i) * out.dim + j];
        v = sd > 0.0 ? (v - mean) / sd : 0.0;
      }
    }
  }
  return out;
}

SomGrid init_grid(int rows, int cols, const FeatureMatrix& features, std::uint64_t seed) {
  if (features.n == 0) throw EmptyFeaturesError();

  SomGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.dim = features.dim;
  grid.weights.resize(static_cast<std::size_t>(rows) * cols * features.dim);

  Rng rng(seed);
  for (int node = 0; node < rows * cols; ++node) {
    const int pick = static_cast<int>(rng.index(static_cast<std::uint64_t>(features.n)));
    std::copy_n(features.row(pick), features.dim,
                grid.weights.data() + static_cast<std::size_t>(node) * features.dim);
  }
  return grid;
}

std::pair<int, int> best_matching_unit(const SomGrid& grid, const double* x) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int node = 0; node < grid.rows * grid.cols; ++node) {
    const double d =
        sq_distance(grid.weights.data() + static_cast<std::size_t>(node) * grid.dim, x, grid.dim);
    if (d < best_d) {
      best_d = d;
      best = node;
    }
  }
  return {best / grid.cols, best % grid.cols};
}

std::pair<int, int> best_matching_unit(const SomGrid& grid, const std::vector<double>& x) {
  return best_matching_unit(grid, x.data());
}

double neighborhood_weight(double dist_grid, double sigma) {
  return std::exp(-(dist_grid * dist_grid) / (2.0 * sigma * sigma));
}

double quantization_error(const SomGrid& grid, const FeatureMatrix& features) {
  if (features.n == 0) return 0.0;
  double acc = 0.0;
  for (int i = 0; i < features.n; ++i) {
    const auto [r, c] = best_matching_unit(grid, features.row(i));
    acc += std::sqrt(sq_distance(grid.node(r, c), features.row(i), grid.dim));
  }
  return acc / features.n;
}

TrainResult train(SomGrid grid, const FeatureMatrix& features, const TrainSchedule& schedule) {
  validate(schedule);

  TrainResult result;
  result.qe_trace.push_back(quantization_error(grid, features));

  Rng rng(schedule.seed);
  std::vector<int> order(features.n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
    const double lr = decayed(schedule.lr0, schedule.lr1, epoch, schedule.epochs);
    const double sigma = decayed(schedule.sigma0, schedule.sigma1, epoch, schedule.epochs);

    rng.shuffle(order);
    for (const int i : order) {
      const double* x = features.row(i);
      const auto [br, bc] = best_matching_unit(grid, x);
      for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
          const double dr = r - br;
          const double dc = c - bc;
          const double h = neighborhood_weight(std::sqrt(dr * dr + dc * dc), sigma);
          const double step = lr * h;
          if (step == 0.0) continue;
          double* w = grid.node(r, c);
          for (int j = 0; j < grid.dim; ++j) w[j] += step * (x[j] - w[j]);
        }
      }
    }
    result.qe_trace.push_back(quantization_error(grid, features));
  }

  result.grid = std::move(grid);
  return result;
}

UMatrix compute_umatrix(const SomGrid& grid) {
  UMatrix u;
  u.rows = grid.rows;
  u.cols = grid.cols;
  u.values.resize(static_cast<std::size_t>(grid.rows) * grid.cols, 0.0);

  constexpr int kOffsets[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      double acc = 0.0;
      int count = 0;
      for (const auto& off : kOffsets) {
        const int nr = r + off[0];
        const int nc = c + off[1];
        if (nr < 0 || nr >= grid.rows || nc < 0 || nc >= grid.cols) continue;
        acc += std::sqrt(sq_distance(grid.node(r, c), grid.node(nr, nc), grid.dim));
        ++count;
      }
      u.values[static_cast<std::size_t>(r) * grid.cols + c] = count > 0 ? acc / count : 0.0;
    }
  }
  return u;
}

ClusterAssignment assign_and_aggregate(const SomGrid& grid, const FeatureMatrix& features) {
  ClusterAssignment out;
  out.bmu.reserve(features.n);
  out.hits.assign(static_cast<std::size_t>(grid.rows) * grid.cols, 0);
  for (int i = 0; i < features.n; ++i) {
    const auto [r, c] = best_matching_unit(grid, features.row(i));
    out.bmu.emplace_back(r, c);
    ++out.hits[static_cast<std::size_t>(r) * grid.cols + c];
  }
  return out;
}

std::vector<OutstandingHit> detect_outstanding(const UMatrix& umatrix,
                                               const ClusterAssignment& assignment,
                                               double k) {
  std::vector<OutstandingHit> out;
  if (umatrix.values.empty()) return out;

  const double mean =
      std::accumulate(umatrix.values.begin(), umatrix.values.end(), 0.0) / umatrix.values.size();
  double var = 0.0;
  for (const double v : umatrix.values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / umatrix.values.size());
  const double threshold = mean + k * sd;

  for (std::size_t i = 0; i < assignment.bmu.size(); ++i) {
    const auto [r, c] = assignment.bmu[i];
    const double u = umatrix.at(r, c);
    if (u > threshold) {
      out.push_back(OutstandingHit{static_cast<int>(i), r, c, u});
    }
  }
  std::sort(out.begin(), out.end(), [](const OutstandingHit& a, const OutstandingHit& b) {
    if (a.u_value != b.u_value) return a.u_value > b.u_value;
    return a.object < b.object;
  });
  return out;
}

int default_grid_side(int n_objects) {
  const double nodes = 5.0 * std::sqrt(std::max(1, n_objects));
  return std::max(2, static_cast<int>(std::ceil(std::sqrt(nodes))));
}

}  // namespace mobpat::som
