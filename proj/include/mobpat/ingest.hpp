#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mobpat::ingest {

// One timestamped (object, location) observation.
struct CheckInRecord {
  std::int64_t timestamp = 0;  // seconds since epoch, UTC
  std::string object_id;
  std::string object_type;
  int location_id = 0;  // dense id, >= 1 (0 is reserved for "absent")
  std::string raw_location;

  friend bool operator==(const CheckInRecord&, const CheckInRecord&) = default;
};

struct LocationNode {
  int id = 0;
  std::string name;
  std::string category;
  std::optional<int> parent_id;
  std::optional<double> x;
  std::optional<double> y;

  friend bool operator==(const LocationNode&, const LocationNode&) = default;
};

struct DuplicateNameError : std::runtime_error {
  explicit DuplicateNameError(const std::string& name)
      : std::runtime_error("duplicate location name: " + name) {}
};
struct UnknownParentError : std::runtime_error {
  explicit UnknownParentError(const std::string& name)
      : std::runtime_error("unknown parent location: " + name) {}
};
struct CycleDetectedError : std::runtime_error {
  explicit CycleDetectedError(const std::string& name)
      : std::runtime_error("cycle in location tree at: " + name) {}
};

// Hierarchical location registry. Ids are dense 1..L in insertion order.
class LocationTree {
 public:
  int add(std::string name, std::string category,
          std::optional<int> parent_id = std::nullopt,
          std::optional<double> x = std::nullopt,
          std::optional<double> y = std::nullopt);

  std::optional<int> find(std::string_view name) const;
  const LocationNode& node(int id) const { return nodes_.at(id - 1); }
  bool contains(int id) const { return id >= 1 && id <= size(); }
  int size() const { return static_cast<int>(nodes_.size()); }
  bool empty() const { return nodes_.empty(); }
  const std::vector<LocationNode>& nodes() const { return nodes_; }

  // Root of the parent chain starting at `id`.
  int root_of(int id) const;
  // Hops from `id` up to its root.
  int depth(int id) const;

  friend bool operator==(const LocationTree&, const LocationTree&) = default;

 private:
  std::vector<LocationNode> nodes_;
  std::unordered_map<std::string, int> by_name_;
};

struct TreeSpecRow {
  std::string name;
  std::string category;
  std::optional<std::string> parent;  // must name an earlier row
  std::optional<double> x;
  std::optional<double> y;
};

LocationTree build_location_tree(const std::vector<TreeSpecRow>& spec);

// Parses the location-tree CSV `name,category,parent,x,y` (empty parent =
// root, empty x/y = no coordinates).
LocationTree parse_location_tree_csv(std::string_view text);

struct Dataset {
  std::vector<CheckInRecord> records;  // sorted by (timestamp, object_id)
  LocationTree locations;
  std::vector<std::string> object_ids;                 // index -> id
  std::unordered_map<std::string, int> object_index;   // id -> index
  // Side attributes that some formats carry (mobile: position, IP), keyed by
  // record index after sorting. Unused downstream.
  std::map<std::size_t, std::map<std::string, std::string>> attributes;

  int object_count() const { return static_cast<int>(object_ids.size()); }
  int object_of(const std::string& id) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.records == b.records && a.locations == b.locations &&
           a.object_ids == b.object_ids && a.attributes == b.attributes;
  }
};

enum class RecordFormat { canonical, mobile, vast };

struct MalformedLineError : std::runtime_error {
  std::size_t line_no;
  explicit MalformedLineError(std::size_t line)
      : std::runtime_error("malformed line " + std::to_string(line)),
        line_no(line) {}
};
struct BadTimestampError : std::runtime_error {
  std::size_t line_no;
  explicit BadTimestampError(std::size_t line)
      : std::runtime_error("bad timestamp on line " + std::to_string(line)),
        line_no(line) {}
};
struct UnknownLocationError : std::runtime_error {
  std::string name;
  explicit UnknownLocationError(std::string loc)
      : std::runtime_error("unknown location: " + loc), name(std::move(loc)) {}
};

// Accepts integer epoch seconds or ISO-8601 "YYYY-MM-DD[ T]HH:MM:SS[.frac]"
// (UTC; fractional seconds truncated). Returns nullopt when unparseable.
std::optional<std::int64_t> parse_timestamp(std::string_view s);

// Parses a record file. With a fixed tree, unknown names raise
// UnknownLocationError; without one, locations auto-register in order of
// first appearance after sorting. Object indexes follow the same rule, which
// makes canonical round trips reproduce the registries exactly.
Dataset parse_records(RecordFormat format, std::string_view text,
                      const LocationTree* locations = nullptr);

// Builds a Dataset from in-memory records: sorts by (timestamp, object_id)
// and assigns the object registry by first appearance in sorted order.
Dataset finalize_dataset(std::vector<CheckInRecord> records, LocationTree tree);

// Canonical CSV: header `timestamp,object_id,object_type,location`,
// timestamps as integer seconds. Side attributes are not carried.
std::string serialize_canonical(const Dataset& d);

enum class ViolationRule { not_sorted, unknown_location, bad_timestamp, unknown_object };

struct Violation {
  std::size_t record_index = 0;
  ViolationRule rule = ViolationRule::not_sorted;
  std::string message;
};

std::vector<Violation> validate_dataset(const Dataset& d);

const char* to_string(ViolationRule rule);

}  // namespace mobpat::ingest
