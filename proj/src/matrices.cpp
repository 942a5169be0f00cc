#include "mobpat/matrices.hpp"

#include <algorithm>
#include <map>

namespace mobpat::matrices {

double TimeSpentMatrix::row_sum(int object) const {
  double total = 0.0;
  for (int loc = 1; loc <= l_; ++loc) total += at(object, loc);
  return total;
}

std::vector<StayInterval> derive_stays(const ingest::Dataset& d, std::int64_t timeout_seconds) {
  // records are time-sorted; per-object order falls out of a grouped pass
  std::vector<std::vector<std::pair<std::int64_t, int>>> per_object(d.object_count());
  for (const auto& r : d.records) {
    per_object[d.object_index.at(r.object_id)].emplace_back(r.timestamp, r.location_id);
  }
  std::vector<StayInterval> stays;
  stays.reserve(d.records.size());
  for (int obj = 0; obj < d.object_count(); ++obj) {
    const auto& events = per_object[obj];
    for (std::size_t j = 0; j < events.size(); ++j) {
      const auto [t, loc] = events[j];
      std::int64_t end = t + timeout_seconds;
      if (j + 1 < events.size()) end = std::min(end, events[j + 1].first);
      stays.push_back(StayInterval{obj, loc, t, end});
    }
  }
  return stays;
}

VisitFrequencyMatrix build_frequency_matrix(const ingest::Dataset& d, std::int64_t t0, std::int64_t t1) {
  VisitFrequencyMatrix m(d.object_count(), d.locations.size());
  for (const auto& r : d.records) {
    if (r.timestamp >= t0 && r.timestamp < t1) {
      m.add(d.object_index.at(r.object_id), r.location_id);
    }
  }
  return m;
}

TimeSpentMatrix build_timespent_matrix(const std::vector<StayInterval>& stays,
                                       std::int64_t t0, std::int64_t t1,
                                       int n_objects, int n_locations) {
  TimeSpentMatrix m(n_objects, n_locations);
  for (const auto& s : stays) {
    const std::int64_t lo = std::max(s.t_start, t0);
    const std::int64_t hi = std::min(s.t_end, t1);
    if (hi > lo) m.add(s.object, s.location_id, static_cast<double>(hi - lo));
  }
  return m;
}

std::vector<SequenceVector> build_sequence_vectors(const ingest::Dataset& d) {
  std::vector<SequenceVector> seqs(d.object_count());
  for (const auto& r : d.records) {
    auto& seq = seqs[d.object_index.at(r.object_id)];
    if (seq.empty() || seq.back() != r.location_id) seq.push_back(r.location_id);
  }
  return seqs;
}

TimeOrientedMatrix build_time_oriented_matrix(const std::vector<StayInterval>& stays,
                                              const TimeBinning& binning, int n_objects) {
  TimeOrientedMatrix tom;
  tom.n_objects = n_objects;
  tom.binning = binning;
  tom.cells.assign(static_cast<std::size_t>(n_objects) * binning.n_bins, 0);

  struct Candidate {
    std::int64_t overlap = 0;
    std::int64_t first_start = 0;
  };
  // (object, bin) -> location -> accumulated overlap; ordered maps keep the
  // tie-break scan deterministic
  std::map<std::pair<int, int>, std::map<int, Candidate>> acc;

  for (const auto& s : stays) {
    if (s.t_end <= s.t_start) continue;
    const std::int64_t rel0 = s.t_start - binning.start;
    const std::int64_t rel1 = s.t_end - binning.start;
    std::int64_t first = rel0 / binning.bin_seconds;
    if (rel0 < 0) first = (rel0 - binning.bin_seconds + 1) / binning.bin_seconds;
    std::int64_t last = (rel1 - 1) / binning.bin_seconds;
    if (rel1 - 1 < 0) last = (rel1 - binning.bin_seconds) / binning.bin_seconds;
    first = std::max<std::int64_t>(first, 0);
    last = std::min<std::int64_t>(last, binning.n_bins - 1);
    for (std::int64_t b = first; b <= last; ++b) {
      const std::int64_t lo = std::max(s.t_start, binning.bin_start(static_cast<int>(b)));
      const std::int64_t hi = std::min(s.t_end, binning.bin_end(static_cast<int>(b)));
      if (hi <= lo) continue;
      auto& cand = acc[{s.object, static_cast<int>(b)}][s.location_id];
      if (cand.overlap == 0 || s.t_start < cand.first_start) cand.first_start = s.t_start;
      cand.overlap += hi - lo;
    }
  }

  for (const auto& [key, locs] : acc) {
    int best_loc = 0;
    std::int64_t best_overlap = 0;
    std::int64_t best_start = 0;
    for (const auto& [loc, cand] : locs) {
      const bool better = cand.overlap > best_overlap ||
                          (cand.overlap == best_overlap && cand.first_start < best_start);
      if (best_loc == 0 || better) {
        best_loc = loc;
        best_overlap = cand.overlap;
        best_start = cand.first_start;
      }
    }
    tom.at(key.first, key.second) = best_loc;
  }
  return tom;
}

SupervisedSlice decompose_supervised(const TimeOrientedMatrix& tom, int target_bin) {
  if (target_bin < 1 || target_bin >= tom.bins()) throw BinOutOfRangeError(target_bin);
  SupervisedSlice out;
  out.n_objects = tom.n_objects;
  out.width = target_bin;
  out.features.reserve(static_cast<std::size_t>(tom.n_objects) * target_bin);
  out.labels.reserve(tom.n_objects);
  for (int i = 0; i < tom.n_objects; ++i) {
    for (int b = 0; b < target_bin; ++b) out.features.push_back(tom.at(i, b));
    out.labels.push_back(tom.at(i, target_bin));
  }
  return out;
}

TimeBinning auto_binning(const ingest::Dataset& d, std::int64_t bin_seconds,
                         std::int64_t timeout_seconds) {
  TimeBinning binning;
  binning.bin_seconds = bin_seconds;
  if (d.records.empty()) {
    binning.start = 0;
    binning.n_bins = 0;
    return binning;
  }
  binning.start = d.records.front().timestamp;
  const std::int64_t last = d.records.back().timestamp + timeout_seconds;
  binning.n_bins = static_cast<int>((last - binning.start + bin_seconds - 1) / bin_seconds);
  if (binning.n_bins < 1) binning.n_bins = 1;
  return binning;
}

}  // namespace mobpat::matrices
