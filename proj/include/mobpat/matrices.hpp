#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mobpat/ingest.hpp"

namespace mobpat::matrices {

// Uniform time grid: bin index of t is floor((t - start) / bin_seconds),
// valid when it falls in [0, n_bins).
struct TimeBinning {
  std::int64_t start = 0;
  std::int64_t bin_seconds = 3600;
  int n_bins = 0;

  std::optional<int> bin_of(std::int64_t t) const {
    if (bin_seconds < 1) return std::nullopt;
    const std::int64_t rel = t - start;
    const std::int64_t idx = rel >= 0 ? rel / bin_seconds : (rel - bin_seconds + 1) / bin_seconds;
    if (idx < 0 || idx >= n_bins) return std::nullopt;
    return static_cast<int>(idx);
  }
  std::int64_t bin_start(int idx) const { return start + static_cast<std::int64_t>(idx) * bin_seconds; }
  std::int64_t bin_end(int idx) const { return bin_start(idx) + bin_seconds; }
  std::int64_t end() const { return bin_start(n_bins); }

  friend bool operator==(const TimeBinning&, const TimeBinning&) = default;
};

struct StayInterval {
  int object = 0;
  int location_id = 0;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;  // >= t_start

  friend bool operator==(const StayInterval&, const StayInterval&) = default;
};

// N x L counts of check-in records per (object, location).
class VisitFrequencyMatrix {
 public:
  VisitFrequencyMatrix(int n_objects, int n_locations)
      : n_(n_objects), l_(n_locations), counts_(static_cast<std::size_t>(n_objects) * n_locations, 0) {}

  int objects() const { return n_; }
  int locations() const { return l_; }
  // location_id is 1-based
  int at(int object, int location_id) const { return counts_[idx(object, location_id)]; }
  void add(int object, int location_id, int delta = 1) { counts_[idx(object, location_id)] += delta; }
  const std::vector<int>& data() const { return counts_; }

 private:
  std::size_t idx(int object, int location_id) const {
    return static_cast<std::size_t>(object) * l_ + (location_id - 1);
  }
  int n_, l_;
  std::vector<int> counts_;
};

// N x L seconds spent per (object, location).
class TimeSpentMatrix {
 public:
  TimeSpentMatrix(int n_objects, int n_locations)
      : n_(n_objects), l_(n_locations), seconds_(static_cast<std::size_t>(n_objects) * n_locations, 0.0) {}

  int objects() const { return n_; }
  int locations() const { return l_; }
  double at(int object, int location_id) const { return seconds_[idx(object, location_id)]; }
  void add(int object, int location_id, double secs) { seconds_[idx(object, location_id)] += secs; }
  const std::vector<double>& data() const { return seconds_; }
  double row_sum(int object) const;

 private:
  std::size_t idx(int object, int location_id) const {
    return static_cast<std::size_t>(object) * l_ + (location_id - 1);
  }
  int n_, l_;
  std::vector<double> seconds_;
};

// Visited locations in order, adjacent duplicates collapsed.
using SequenceVector = std::vector<int>;

// N x T grid of location ids; 0 marks an absent object.
struct TimeOrientedMatrix {
  int n_objects = 0;
  TimeBinning binning;
  std::vector<int> cells;  // row-major, n_objects x binning.n_bins

  int bins() const { return binning.n_bins; }
  int at(int object, int bin) const {
    return cells[static_cast<std::size_t>(object) * binning.n_bins + bin];
  }
  int& at(int object, int bin) {
    return cells[static_cast<std::size_t>(object) * binning.n_bins + bin];
  }
};

// Each record opens a stay ending at the object's next record or at
// record time + timeout, whichever comes first.
std::vector<StayInterval> derive_stays(const ingest::Dataset& d, std::int64_t timeout_seconds);

// Counts records with t0 <= t < t1.
VisitFrequencyMatrix build_frequency_matrix(const ingest::Dataset& d, std::int64_t t0, std::int64_t t1);

// Sums each stay's overlap with [t0, t1).
TimeSpentMatrix build_timespent_matrix(const std::vector<StayInterval>& stays,
                                       std::int64_t t0, std::int64_t t1,
                                       int n_objects, int n_locations);

std::vector<SequenceVector> build_sequence_vectors(const ingest::Dataset& d);

// Cell (i, bin) = location whose stays overlap the bin longest; ties go to
// the earliest contributing stay start, then the smaller id. 0 when nothing
// overlaps.
TimeOrientedMatrix build_time_oriented_matrix(const std::vector<StayInterval>& stays,
                                              const TimeBinning& binning, int n_objects);

struct BinOutOfRangeError : std::out_of_range {
  explicit BinOutOfRangeError(int bin)
      : std::out_of_range("target bin out of range: " + std::to_string(bin)) {}
};

struct SupervisedSlice {
  int n_objects = 0;
  int width = 0;                // = target_bin
  std::vector<int> features;    // n_objects x width
  std::vector<int> labels;      // n_objects

  int feature(int object, int col) const {
    return features[static_cast<std::size_t>(object) * width + col];
  }
};

// features = TOM columns [0, target_bin), labels = column target_bin.
SupervisedSlice decompose_supervised(const TimeOrientedMatrix& tom, int target_bin);

// Binning that covers every record and the timeout tail of the last stays.
TimeBinning auto_binning(const ingest::Dataset& d, std::int64_t bin_seconds,
                         std::int64_t timeout_seconds);

}  // namespace mobpat::matrices
