#include "mobpat/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mobpat/rng.hpp"

namespace mobpat::synth {

namespace {

constexpr std::int64_t kBaseEpoch = 1430438400;  // 2015-05-01 00:00:00 UTC
constexpr std::uint64_t kRegularStream = 0xA1;
constexpr std::uint64_t kOutstandingStream = 0xB2;

std::string padded_id(char prefix, int n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%04d", prefix, n);
  return buf;
}

int markov_step(Rng& rng, const std::vector<std::vector<double>>& markov, int state) {
  const auto& row = markov[static_cast<std::size_t>(state)];
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t t = 0; t < row.size(); ++t) {
    cum += row[t];
    if (u < cum) return static_cast<int>(t);
  }
  // row sums to 1 within tolerance; u can still land in the residual sliver
  for (std::size_t t = row.size(); t-- > 0;) {
    if (row[t] > 0.0) return static_cast<int>(t);
  }
  return state;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_reals(const std::string& value, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(std::stod(trim(part)));
    } catch (const std::exception&) {
      throw InvalidConfigError("bad number in " + key + ": " + part);
    }
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> default_markov(int locations, int hub, double self_prob,
                                                double hub_prob) {
  const int n = locations + 1;
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));

  m[0][0] += self_prob;
  m[0][static_cast<std::size_t>(hub)] += 1.0 - self_prob;
  for (int s = 1; s <= locations; ++s) {
    const int next = s % locations + 1;
    m[s][s] += self_prob;
    m[s][static_cast<std::size_t>(hub)] += hub_prob;
    m[s][static_cast<std::size_t>(next)] += 1.0 - self_prob - hub_prob;
  }
  return m;
}

void validate(const SynthConfig& c) {
  if (c.n_regular < 0 || c.n_outstanding < 0) throw InvalidConfigError("negative object count");
  if (c.locations < 1) throw InvalidConfigError("need at least one location");
  if (c.days < 1) throw InvalidConfigError("need at least one day");
  if (c.bin_seconds < 1 || 86400 % c.bin_seconds != 0) {
    throw InvalidConfigError("bin_seconds must divide 86400");
  }
  const int bpd = 86400 / c.bin_seconds;

  if (!c.markov.empty()) {
    const std::size_t n = static_cast<std::size_t>(c.locations) + 1;
    if (c.markov.size() != n) throw InvalidConfigError("markov must have locations+1 rows");
    for (const auto& row : c.markov) {
      if (row.size() != n) throw InvalidConfigError("markov must have locations+1 columns");
      double sum = 0.0;
      for (const double p : row) {
        if (p < 0.0) throw InvalidConfigError("markov entries must be non-negative");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw InvalidConfigError("markov row must sum to 1");
    }
  } else {
    if (c.self_prob < 0.0 || c.hub_prob < 0.0 || c.self_prob + c.hub_prob > 1.0) {
      throw InvalidConfigError("need self_prob, hub_prob >= 0 and self_prob + hub_prob <= 1");
    }
    if (c.hub < 1 || c.hub > c.locations) throw InvalidConfigError("hub outside location range");
  }

  if (c.regular_day_span < 1 || c.regular_day_span > c.days) {
    throw InvalidConfigError("regular_day_span outside [1, days]");
  }
  if (c.regular_bins_per_day < 1 || c.regular_bins_per_day > bpd) {
    throw InvalidConfigError("regular_bins_per_day outside [1, bins per day]");
  }
  if (c.regular_bins_per_day < bpd) {
    if (c.day_start_lo < 0 || c.day_start_lo > c.day_start_hi ||
        c.day_start_hi + c.regular_bins_per_day > bpd) {
      throw InvalidConfigError("day start range does not fit the day");
    }
  }
  if (c.n_outstanding > 0) {
    if (c.outstanding_day_span < 1 || c.outstanding_day_span > c.days) {
      throw InvalidConfigError("outstanding_day_span outside [1, days]");
    }
    if (c.dwell_multiplier < 1.0 || c.frequency_multiplier < 1.0) {
      throw InvalidConfigError("multipliers must be >= 1");
    }
  }

  double share_sum = 0.0;
  for (const auto& r : c.routes) {
    if (r.origin < 1 || r.origin > c.locations || r.destination < 1 ||
        r.destination > c.locations) {
      throw InvalidConfigError("route endpoints outside location range");
    }
    if (r.share < 0.0) throw InvalidConfigError("route share must be non-negative");
    share_sum += r.share;
  }
  if (share_sum > 1.0 + 1e-9) throw InvalidConfigError("route shares sum above 1");
  if (!c.routes.empty() && (c.evening_bin < 2 || c.evening_bin + 2 >= bpd)) {
    throw InvalidConfigError("evening_bin must leave room for the route window");
  }
}

std::pair<ingest::Dataset, GroundTruth> generate(const SynthConfig& config) {
  validate(config);

  const int l = config.locations;
  const int bpd = 86400 / config.bin_seconds;
  const auto markov =
      config.markov.empty() ? default_markov(l, config.hub, config.self_prob, config.hub_prob)
                            : config.markov;

  ingest::LocationTree tree;
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(l))));
  for (int id = 1; id <= l; ++id) {
    char name[16];
    std::snprintf(name, sizeof(name), "S%03d", id);
    tree.add(name, "site", std::nullopt, ((id - 1) % side) * 10.0, ((id - 1) / side) * 10.0);
  }

  GroundTruth truth;
  truth.markov = markov;
  truth.routes = config.routes;
  truth.base_epoch = kBaseEpoch;
  truth.bin_seconds = config.bin_seconds;
  truth.bins_per_day = bpd;

  // contiguous blocks of the regular population, in route order
  std::vector<int> route_of(static_cast<std::size_t>(config.n_regular), -1);
  {
    int cursor = 0;
    for (std::size_t r = 0; r < config.routes.size(); ++r) {
      const int count = static_cast<int>(config.routes[r].share * config.n_regular);
      for (int i = 0; i < count && cursor < config.n_regular; ++i, ++cursor) {
        route_of[static_cast<std::size_t>(cursor)] = static_cast<int>(r);
      }
    }
  }

  std::vector<ingest::CheckInRecord> records;
  const auto emit = [&](std::int64_t t, const std::string& obj, int loc) {
    records.push_back(ingest::CheckInRecord{t, obj, "synthetic", loc, tree.node(loc).name});
  };
  const auto bin_time = [&](int global_bin) {
    return kBaseEpoch + static_cast<std::int64_t>(global_bin) * config.bin_seconds;
  };

  for (int i = 0; i < config.n_regular; ++i) {
    const std::string id = padded_id('r', i);
    Rng rng(mix_seed(config.seed, kRegularStream, static_cast<std::uint64_t>(i)));

    const int span = config.regular_day_span;
    const int first_day =
        span < config.days ? static_cast<int>(rng.index(config.days - span + 1)) : 0;
    const int bins = config.regular_bins_per_day;
    const int start =
        bins >= bpd ? 0
                    : config.day_start_lo +
                          static_cast<int>(rng.index(config.day_start_hi - config.day_start_lo + 1));

    const int route = route_of[static_cast<std::size_t>(i)];
    const auto in_route_window = [&](int bin_of_day) {
      return route >= 0 && bin_of_day >= config.evening_bin - 2 &&
             bin_of_day <= config.evening_bin + 2;
    };

    int state = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(l)));
    for (int d = first_day; d < first_day + span; ++d) {
      for (int k = 0; k < bins; ++k) {
        const int bin_of_day = start + k;
        if (state != 0 && !in_route_window(bin_of_day)) {
          emit(bin_time(d * bpd + bin_of_day), id, state);
        }
        state = markov_step(rng, markov, state);
      }
    }
    if (route >= 0) {
      const auto& r = config.routes[static_cast<std::size_t>(route)];
      for (int d = 0; d < config.days; ++d) {
        for (int off = -2; off <= 2; ++off) {
          emit(bin_time(d * bpd + config.evening_bin + off), id,
               off <= 0 ? r.origin : r.destination);
        }
      }
    }

    truth.objects[id] = ObjectTruth{id, "regular", route, first_day, span, start, bins};
  }

  for (int j = 0; j < config.n_outstanding; ++j) {
    const std::string id = padded_id('o', j);
    Rng rng(mix_seed(config.seed, kOutstandingStream, static_cast<std::uint64_t>(j)));

    const int span = config.outstanding_day_span;
    const int first_day =
        span < config.days ? static_cast<int>(rng.index(config.days - span + 1)) : 0;
    const int dwell_bins = std::min(
        bpd, static_cast<int>(std::lround(config.dwell_multiplier * config.regular_bins_per_day)));
    const int start =
        dwell_bins >= bpd ? 0 : static_cast<int>(rng.index(bpd - dwell_bins + 1));
    const int fav_a = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(l)));
    const int fav_b = l >= 2 ? fav_a % l + 1 : fav_a;
    const int reps = std::max(1, static_cast<int>(std::lround(config.frequency_multiplier)));

    for (int d = first_day; d < first_day + span; ++d) {
      for (int k = 0; k < dwell_bins; ++k) {
        const int loc = k % 2 == 0 ? fav_a : fav_b;
        const std::int64_t t0 = bin_time(d * bpd + start + k);
        for (int rep = 0; rep < reps; ++rep) {
          emit(t0 + static_cast<std::int64_t>(rep) * (config.bin_seconds / reps), id, loc);
        }
      }
    }

    truth.objects[id] = ObjectTruth{id, "outstanding", -1, first_day, span, start, dwell_bins};
  }

  return {ingest::finalize_dataset(std::move(records), std::move(tree)), std::move(truth)};
}

double bayes_optimal_accuracy(const std::vector<std::vector<double>>& markov,
                              const std::vector<double>& label_distribution) {
  double acc = 0.0;
  for (std::size_t s = 0; s < markov.size() && s < label_distribution.size(); ++s) {
    acc += label_distribution[s] * *std::max_element(markov[s].begin(), markov[s].end());
  }
  return acc;
}

SynthConfig parse_config_file(const std::string& text) {
  SynthConfig c;
  std::map<int, std::vector<double>> markov_rows;
  std::map<int, RouteSpec> routes;

  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    const auto as_int = [&]() {
      try {
        return std::stoi(value);
      } catch (const std::exception&) {
        throw InvalidConfigError("bad integer for " + key + ": " + value);
      }
    };
    const auto as_real = [&]() {
      try {
        return std::stod(value);
      } catch (const std::exception&) {
        throw InvalidConfigError("bad number for " + key + ": " + value);
      }
    };

    if (key == "n_regular") c.n_regular = as_int();
    else if (key == "n_outstanding") c.n_outstanding = as_int();
    else if (key == "locations") c.locations = as_int();
    else if (key == "days") c.days = as_int();
    else if (key == "bin_seconds") c.bin_seconds = as_int();
    else if (key == "self_prob") c.self_prob = as_real();
    else if (key == "hub") c.hub = as_int();
    else if (key == "hub_prob") c.hub_prob = as_real();
    else if (key == "regular_day_span") c.regular_day_span = as_int();
    else if (key == "regular_bins_per_day") c.regular_bins_per_day = as_int();
    else if (key == "day_start_lo") c.day_start_lo = as_int();
    else if (key == "day_start_hi") c.day_start_hi = as_int();
    else if (key == "outstanding_day_span") c.outstanding_day_span = as_int();
    else if (key == "dwell_multiplier") c.dwell_multiplier = as_real();
    else if (key == "frequency_multiplier") c.frequency_multiplier = as_real();
    else if (key == "evening_bin") c.evening_bin = as_int();
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key.rfind("route_", 0) == 0) {
      const auto parts = parse_reals(value, key);
      if (parts.size() != 3) throw InvalidConfigError(key + " needs origin,destination,share");
      RouteSpec r;
      r.origin = static_cast<int>(parts[0]);
      r.destination = static_cast<int>(parts[1]);
      r.share = parts[2];
      routes[std::stoi(key.substr(6))] = r;
    } else if (key.rfind("markov_row_", 0) == 0) {
      markov_rows[std::stoi(key.substr(11))] = parse_reals(value, key);
    } else {
      throw InvalidConfigError("unknown key: " + key);
    }
  }

  for (const auto& [idx, r] : routes) c.routes.push_back(r);
  if (!markov_rows.empty()) {
    const int n = c.locations + 1;
    c.markov.assign(static_cast<std::size_t>(n), {});
    for (int s = 0; s < n; ++s) {
      const auto it = markov_rows.find(s);
      if (it == markov_rows.end()) {
        throw InvalidConfigError("markov_row_" + std::to_string(s) + " missing");
      }
      c.markov[static_cast<std::size_t>(s)] = it->second;
    }
  }
  return c;
}

BlobSet gaussian_blobs(int n_blobs, int n_per_blob, int dim, double separation, double stddev,
                       std::uint64_t seed) {
  BlobSet out;
  out.features.n = n_blobs * n_per_blob;
  out.features.dim = dim;
  out.features.data.reserve(static_cast<std::size_t>(out.features.n) * dim);

  Rng rng(seed);
  for (int b = 0; b < n_blobs; ++b) {
    for (int i = 0; i < n_per_blob; ++i) {
      for (int j = 0; j < dim; ++j) {
        const double center = j % n_blobs == b ? separation : 0.0;
        out.features.data.push_back(center + stddev * rng.normal());
      }
      out.labels.push_back(b);
    }
  }
  return out;
}

}  // namespace mobpat::synth
