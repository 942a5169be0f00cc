#include "mobpat/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "mobpat/csv.hpp"

namespace mobpat::ingest {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_fixed_uint(std::string_view s, int& out) {
  if (s.empty()) return false;
  out = 0;
  for (const char c : s) {
    if (c < '0' || c > '9') return false;
    out = out * 10 + (c - '0');
  }
  return true;
}

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(std::string_view raw) {
  const std::string_view s = trim(raw);
  if (s.empty()) return std::nullopt;

  std::int64_t epoch = 0;
  if (parse_int(s, epoch)) return epoch;

  // YYYY-MM-DD[ T]HH:MM:SS[.frac]
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != ' ' && s[10] != 'T') ||
      s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  int year, month, day, hh, mm, ss;
  if (!parse_fixed_uint(s.substr(0, 4), year) || !parse_fixed_uint(s.substr(5, 2), month) ||
      !parse_fixed_uint(s.substr(8, 2), day) || !parse_fixed_uint(s.substr(11, 2), hh) ||
      !parse_fixed_uint(s.substr(14, 2), mm) || !parse_fixed_uint(s.substr(17, 2), ss)) {
    return std::nullopt;
  }
  if (s.size() > 19) {
    // only a fractional-second tail is tolerated; it is truncated
    if (s[19] != '.') return std::nullopt;
    for (const char c : s.substr(20)) {
      if (c < '0' || c > '9') return std::nullopt;
    }
  }
  if (month < 1 || month > 12 || day < 1 || day > 31 || hh > 23 || mm > 59 || ss > 60) {
    return std::nullopt;
  }
  return days_from_civil(year, month, day) * 86400 + hh * 3600 + mm * 60 + ss;
}

int LocationTree::add(std::string name, std::string category,
                      std::optional<int> parent_id, std::optional<double> x,
                      std::optional<double> y) {
  if (by_name_.contains(name)) throw DuplicateNameError(name);
  if (parent_id && !contains(*parent_id)) throw UnknownParentError(name);
  const int id = size() + 1;
  nodes_.push_back(LocationNode{id, name, std::move(category), parent_id, x, y});
  by_name_.emplace(std::move(name), id);
  // parents always precede children, so a cycle cannot form through add();
  // the walk guards hand-edited trees all the same
  int steps = 0;
  for (int cur = id; nodes_[cur - 1].parent_id; cur = *nodes_[cur - 1].parent_id) {
    if (++steps > size()) throw CycleDetectedError(nodes_[id - 1].name);
  }
  return id;
}

std::optional<int> LocationTree::find(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

int LocationTree::root_of(int id) const {
  int cur = id;
  while (nodes_.at(cur - 1).parent_id) cur = *nodes_.at(cur - 1).parent_id;
  return cur;
}

int LocationTree::depth(int id) const {
  int hops = 0;
  for (int cur = id; nodes_.at(cur - 1).parent_id; cur = *nodes_.at(cur - 1).parent_id) ++hops;
  return hops;
}

LocationTree build_location_tree(const std::vector<TreeSpecRow>& spec) {
  LocationTree tree;
  for (const auto& row : spec) {
    std::optional<int> parent_id;
    if (row.parent && !row.parent->empty()) {
      const auto found = tree.find(*row.parent);
      if (!found) throw UnknownParentError(*row.parent);
      parent_id = *found;
    }
    tree.add(row.name, row.category, parent_id, row.x, row.y);
  }
  return tree;
}

LocationTree parse_location_tree_csv(std::string_view text) {
  const auto lines = csv::split_lines(text);
  std::vector<TreeSpecRow> spec;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = csv::parse_line(lines[i]);
    if (fields.size() != 5) throw MalformedLineError(i + 1);
    TreeSpecRow row;
    row.name = fields[0];
    row.category = fields[1];
    if (!fields[2].empty()) row.parent = fields[2];
    if (!fields[3].empty()) row.x = std::stod(fields[3]);
    if (!fields[4].empty()) row.y = std::stod(fields[4]);
    spec.push_back(std::move(row));
  }
  return build_location_tree(spec);
}

int Dataset::object_of(const std::string& id) const {
  const auto it = object_index.find(id);
  return it == object_index.end() ? -1 : it->second;
}

namespace {

struct RawRow {
  CheckInRecord record;
  std::map<std::string, std::string> attrs;
};

void sort_rows(std::vector<RawRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) {
    if (a.record.timestamp != b.record.timestamp) return a.record.timestamp < b.record.timestamp;
    return a.record.object_id < b.record.object_id;
  });
}

Dataset assemble(std::vector<RawRow> rows, LocationTree tree, bool discover) {
  sort_rows(rows);
  Dataset d;
  d.locations = std::move(tree);
  d.records.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& row = rows[i];
    if (discover && row.record.location_id == 0) {
      if (const auto found = d.locations.find(row.record.raw_location)) {
        row.record.location_id = *found;
      } else {
        // auto-registered roots use their own name as category
        row.record.location_id =
            d.locations.add(row.record.raw_location, row.record.raw_location);
      }
    }
    if (!d.object_index.contains(row.record.object_id)) {
      d.object_index.emplace(row.record.object_id, d.object_count());
      d.object_ids.push_back(row.record.object_id);
    }
    if (!row.attrs.empty()) d.attributes.emplace(i, std::move(row.attrs));
    d.records.push_back(std::move(row.record));
  }
  return d;
}

}  // namespace

Dataset parse_records(RecordFormat format, std::string_view text,
                      const LocationTree* locations) {
  const auto lines = csv::split_lines(text);
  const std::size_t expected_fields = format == RecordFormat::mobile ? 5 : 4;

  std::vector<RawRow> rows;
  rows.reserve(lines.size() > 0 ? lines.size() - 1 : 0);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t line_no = i + 1;
    const auto fields = csv::parse_line(lines[i]);
    if (fields.size() != expected_fields) throw MalformedLineError(line_no);

    RawRow row;
    std::string_view ts_field;
    switch (format) {
      case RecordFormat::canonical:
        // timestamp,object_id,object_type,location
        ts_field = fields[0];
        row.record.object_id = fields[1];
        row.record.object_type = fields[2];
        row.record.raw_location = fields[3];
        break;
      case RecordFormat::mobile:
        // userId,TimeStamp,Station,position,IP
        row.record.object_id = fields[0];
        ts_field = fields[1];
        row.record.raw_location = fields[2];
        row.attrs["position"] = fields[3];
        row.attrs["IP"] = fields[4];
        break;
      case RecordFormat::vast:
        // Timestamp,car-id,car-type,gate-name
        ts_field = fields[0];
        row.record.object_id = fields[1];
        row.record.object_type = fields[2];
        row.record.raw_location = fields[3];
        break;
    }

    const auto ts = parse_timestamp(ts_field);
    if (!ts || *ts < 0) throw BadTimestampError(line_no);
    row.record.timestamp = *ts;

    if (locations) {
      const auto found = locations->find(row.record.raw_location);
      if (!found) throw UnknownLocationError(row.record.raw_location);
      row.record.location_id = *found;
    }
    rows.push_back(std::move(row));
  }

  return assemble(std::move(rows), locations ? *locations : LocationTree{},
                  locations == nullptr);
}

Dataset finalize_dataset(std::vector<CheckInRecord> records, LocationTree tree) {
  std::vector<RawRow> rows;
  rows.reserve(records.size());
  for (auto& r : records) rows.push_back(RawRow{std::move(r), {}});
  return assemble(std::move(rows), std::move(tree), false);
}

std::string serialize_canonical(const Dataset& d) {
  std::string out = "timestamp,object_id,object_type,location\n";
  for (const auto& r : d.records) {
    out += std::to_string(r.timestamp);
    out.push_back(',');
    out += csv::escape(r.object_id);
    out.push_back(',');
    out += csv::escape(r.object_type);
    out.push_back(',');
    out += csv::escape(r.raw_location);
    out.push_back('\n');
  }
  return out;
}

const char* to_string(ViolationRule rule) {
  switch (rule) {
    case ViolationRule::not_sorted: return "NotSorted";
    case ViolationRule::unknown_location: return "UnknownLocation";
    case ViolationRule::bad_timestamp: return "BadTimestamp";
    case ViolationRule::unknown_object: return "UnknownObject";
  }
  return "?";
}

std::vector<Violation> validate_dataset(const Dataset& d) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto& r = d.records[i];
    if (r.timestamp < 0) {
      out.push_back({i, ViolationRule::bad_timestamp,
                     "negative timestamp at record " + std::to_string(i)});
    }
    if (!d.locations.contains(r.location_id)) {
      out.push_back({i, ViolationRule::unknown_location,
                     "location_id " + std::to_string(r.location_id) +
                         " out of range at record " + std::to_string(i)});
    }
    if (!d.object_index.contains(r.object_id)) {
      out.push_back({i, ViolationRule::unknown_object,
                     "object '" + r.object_id + "' missing from registry at record " +
                         std::to_string(i)});
    }
    if (i > 0) {
      const auto& p = d.records[i - 1];
      const bool ordered = p.timestamp < r.timestamp ||
                           (p.timestamp == r.timestamp && p.object_id <= r.object_id);
      if (!ordered) {
        out.push_back({i, ViolationRule::not_sorted,
                       "records out of order at index " + std::to_string(i)});
      }
    }
  }
  return out;
}

}  // namespace mobpat::ingest
