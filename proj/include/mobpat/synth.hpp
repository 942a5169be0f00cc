#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mobpat/ingest.hpp"
#include "mobpat/som.hpp"

namespace mobpat::synth {

struct RouteSpec {
  int origin = 0;       // location id
  int destination = 0;  // location id
  double share = 0.0;   // fraction of the regular population assigned
};

// Flat generator knobs. The transition matrix is (L+1)x(L+1) row-stochastic with
// class 0 (absent) included; empty means default_markov(locations, hub, ...).
struct SynthConfig {
  int n_regular = 200;
  int n_outstanding = 0;
  int locations = 12;
  int days = 10;
  int bin_seconds = 3600;
  std::vector<std::vector<double>> markov;

  double self_prob = 0.5;
  int hub = 1;
  double hub_prob = 0.3;

  // regular objects: active day_span consecutive days, bins_per_day consecutive
  // bins per day starting somewhere in [day_start_lo, day_start_hi]
  int regular_day_span = 3;
  int regular_bins_per_day = 4;
  int day_start_lo = 6;
  int day_start_hi = 14;

  // outstanding objects: long span, multiplied dwell and per-bin record count,
  // alternating between two favorite locations
  int outstanding_day_span = 9;
  double dwell_multiplier = 4.0;
  double frequency_multiplier = 3.0;

  std::vector<RouteSpec> routes;
  int evening_bin = 20;  // bin of day where routes fire

  std::uint64_t seed = 0;
};

struct ObjectTruth {
  std::string object_id;
  std::string cls;     // "regular" or "outstanding"
  int route_id = -1;   // index into routes, -1 when unassigned
  int first_day = 0;
  int day_span = 0;
  int day_start_bin = 0;  // bin of day where the daily active window opens
  int bins_per_day = 0;
};

struct GroundTruth {
  std::map<std::string, ObjectTruth> objects;
  std::vector<std::vector<double>> markov;
  std::vector<RouteSpec> routes;
  std::int64_t base_epoch = 0;
  int bin_seconds = 0;
  int bins_per_day = 0;
};

struct InvalidConfigError : std::invalid_argument {
  explicit InvalidConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Throws InvalidConfigError; checked by generate before any work.
void validate(const SynthConfig& config);

// Fully seed-deterministic. Emitted records land on bin boundaries, so a TOM
// built with timeout = bin_seconds reproduces the walked states exactly.
std::pair<ingest::Dataset, GroundTruth> generate(const SynthConfig& config);

// Hub-structured default chain: each location row splits self_prob on itself,
// hub_prob on the hub, the rest on the next location id (wrapping).
std::vector<std::vector<double>> default_markov(int locations, int hub, double self_prob,
                                                double hub_prob);

// Expected accuracy of the argmax-of-true-row predictor under the empirical
// current-state distribution: sum_s pi(s) * max_t P(s,t).
double bayes_optimal_accuracy(const std::vector<std::vector<double>>& markov,
                              const std::vector<double>& label_distribution);

// Flat key=value text, '#' comments. Unknown keys are errors.
SynthConfig parse_config_file(const std::string& text);

// Labeled Gaussian point clouds for clustering tests.
struct BlobSet {
  som::FeatureMatrix features;
  std::vector<int> labels;  // blob index per row
};
BlobSet gaussian_blobs(int n_blobs, int n_per_blob, int dim, double separation, double stddev,
                       std::uint64_t seed);

}  // namespace mobpat::synth
