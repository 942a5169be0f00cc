#include "mobpat/jsonio.hpp"

#include <cstdio>

#include <json.hpp>

#include "mobpat/csv.hpp"

namespace mobpat::jsonio {

namespace {

using json = nlohmann::ordered_json;

std::string row_name(const std::vector<std::string>& names, int i) {
  return i < static_cast<int>(names.size()) ? names[static_cast<std::size_t>(i)]
                                            : std::to_string(i);
}

std::string real(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <typename Matrix, typename Cell>
std::string cells_csv(const Matrix& m, const std::vector<std::string>& row_names,
                      Cell cell_text) {
  std::string out = "object";
  for (int loc = 1; loc <= m.locations(); ++loc) out += "," + std::to_string(loc);
  out += "\n";
  for (int i = 0; i < m.objects(); ++i) {
    out += csv::escape(row_name(row_names, i));
    for (int loc = 1; loc <= m.locations(); ++loc) out += "," + cell_text(i, loc);
    out += "\n";
  }
  return out;
}

json location_array(const ingest::LocationTree& tree) {
  json arr = json::array();
  for (const auto& node : tree.nodes()) {
    json j;
    j["id"] = node.id;
    j["name"] = node.name;
    j["category"] = node.category;
    if (node.x.has_value()) j["x"] = node.x.value();
    if (node.y.has_value()) j["y"] = node.y.value();
    arr.push_back(std::move(j));
  }
  return arr;
}

ingest::LocationTree tree_from(const json& arr) {
  ingest::LocationTree tree;
  for (const auto& j : arr) {
    const int id = tree.add(j.at("name").get<std::string>(), j.at("category").get<std::string>(),
                            std::nullopt,
                            j.contains("x") ? std::optional<double>(j.at("x").get<double>())
                                            : std::nullopt,
                            j.contains("y") ? std::optional<double>(j.at("y").get<double>())
                                            : std::nullopt);
    if (id != j.at("id").get<int>()) {
      throw BadArtifactError("location ids must be dense and in order");
    }
  }
  return tree;
}

json flags_array(const std::vector<som::OutstandingHit>& flags,
                 const std::vector<std::string>& object_names) {
  json arr = json::array();
  for (const auto& f : flags) {
    json j;
    j["object"] = f.object;
    j["object_id"] = row_name(object_names, f.object);
    j["row"] = f.row;
    j["col"] = f.col;
    j["u_value"] = f.u_value;
    arr.push_back(std::move(j));
  }
  return arr;
}

template <typename Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw BadArtifactError(std::string(what) + ": " + e.what());
  }
}

template <typename Matrix, typename Cell>
std::string window_matrix_json(const char* kind, const Matrix& m, std::int64_t t0, std::int64_t t1,
                               const std::vector<std::string>& row_names, Cell cell) {
  json j;
  j["kind"] = kind;
  j["shape"] = {m.objects(), m.locations()};
  j["window"] = {{"t0", t0}, {"t1", t1}};
  json rows = json::array();
  json names = json::array();
  for (int i = 0; i < m.objects(); ++i) {
    names.push_back(row_name(row_names, i));
    json row = json::array();
    for (int loc = 1; loc <= m.locations(); ++loc) row.push_back(cell(i, loc));
    rows.push_back(std::move(row));
  }
  j["objects"] = std::move(names);
  j["data"] = std::move(rows);
  return j.dump(2) + "\n";
}

}  // namespace

std::string matrix_csv(const matrices::VisitFrequencyMatrix& m,
                       const std::vector<std::string>& row_names) {
  return cells_csv(m, row_names, [&](int i, int loc) { return std::to_string(m.at(i, loc)); });
}

std::string matrix_csv(const matrices::TimeSpentMatrix& m,
                       const std::vector<std::string>& row_names) {
  return cells_csv(m, row_names, [&](int i, int loc) { return real(m.at(i, loc)); });
}

std::string tom_csv(const matrices::TimeOrientedMatrix& tom,
                    const std::vector<std::string>& row_names) {
  std::string out = "object";
  for (int b = 0; b < tom.bins(); ++b) out += ",bin" + std::to_string(b);
  out += "\n";
  for (int i = 0; i < tom.n_objects; ++i) {
    out += csv::escape(row_name(row_names, i));
    for (int b = 0; b < tom.bins(); ++b) out += "," + std::to_string(tom.at(i, b));
    out += "\n";
  }
  return out;
}

std::string umatrix_csv(const som::UMatrix& u) {
  std::string out;
  for (int r = 0; r < u.rows; ++r) {
    for (int c = 0; c < u.cols; ++c) {
      out += (c == 0 ? "" : ",") + real(u.at(r, c));
    }
    out += "\n";
  }
  return out;
}

std::string curves_csv(const predict::EvaluationReport& report) {
  std::string out = "model,minutes,accuracy\n";
  char buf[32];
  for (const auto& model : report.models) {
    for (const auto& probe : model.probes) {
      std::snprintf(buf, sizeof buf, "%.6f", probe.accuracy);
      out += predict::to_string(model.kind) + "," + std::to_string(probe.minutes) + "," + buf +
             "\n";
    }
  }
  return out;
}

std::string matrix_json(const matrices::VisitFrequencyMatrix& m, std::int64_t t0, std::int64_t t1,
                        const std::vector<std::string>& row_names) {
  return window_matrix_json("frequency", m, t0, t1, row_names,
                            [&](int i, int loc) { return json(m.at(i, loc)); });
}

std::string matrix_json(const matrices::TimeSpentMatrix& m, std::int64_t t0, std::int64_t t1,
                        const std::vector<std::string>& row_names) {
  return window_matrix_json("time_spent", m, t0, t1, row_names,
                            [&](int i, int loc) { return json(m.at(i, loc)); });
}

std::string tom_json(const matrices::TimeOrientedMatrix& tom,
                     const std::vector<std::string>& row_names) {
  json j;
  j["kind"] = "time_oriented";
  j["shape"] = {tom.n_objects, tom.bins()};
  j["binning"] = {{"start", tom.binning.start},
                  {"bin_seconds", tom.binning.bin_seconds},
                  {"n_bins", tom.binning.n_bins}};
  json names = json::array();
  json rows = json::array();
  for (int i = 0; i < tom.n_objects; ++i) {
    names.push_back(row_name(row_names, i));
    json row = json::array();
    for (int b = 0; b < tom.bins(); ++b) row.push_back(tom.at(i, b));
    rows.push_back(std::move(row));
  }
  j["objects"] = std::move(names);
  j["data"] = std::move(rows);
  return j.dump(2) + "\n";
}

ParsedMatrix parse_matrix_json(const std::string& text) {
  return guarded("matrix envelope", [&] {
    const json j = json::parse(text);
    ParsedMatrix m;
    m.kind = j.at("kind").get<std::string>();
    if (m.kind != "frequency" && m.kind != "time_spent") {
      throw BadArtifactError("matrix kind must be frequency or time_spent");
    }
    m.objects = j.at("shape").at(0).get<int>();
    m.locations = j.at("shape").at(1).get<int>();
    m.names = j.at("objects").get<std::vector<std::string>>();
    const auto& rows = j.at("data");
    if (static_cast<int>(rows.size()) != m.objects) {
      throw BadArtifactError("row count does not match shape");
    }
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != m.locations) {
        throw BadArtifactError("row width does not match shape");
      }
      for (const auto& v : row) m.data.push_back(v.get<double>());
    }
    return m;
  });
}

std::string tree_csv(const ingest::LocationTree& tree) {
  std::string out = "name,category,parent,x,y\n";
  for (const auto& node : tree.nodes()) {
    out += csv::escape(node.name) + "," + csv::escape(node.category) + ",";
    if (node.parent_id.has_value()) out += csv::escape(tree.node(*node.parent_id).name);
    out += ",";
    if (node.x.has_value()) out += real(node.x.value());
    out += ",";
    if (node.y.has_value()) out += real(node.y.value());
    out += "\n";
  }
  return out;
}

matrices::TimeOrientedMatrix parse_tom_json(const std::string& text) {
  return guarded("time-oriented matrix", [&] {
    const json j = json::parse(text);
    if (j.at("kind").get<std::string>() != "time_oriented") {
      throw BadArtifactError("artifact kind is not time_oriented");
    }
    matrices::TimeOrientedMatrix tom;
    tom.n_objects = j.at("shape").at(0).get<int>();
    tom.binning.start = j.at("binning").at("start").get<std::int64_t>();
    tom.binning.bin_seconds = j.at("binning").at("bin_seconds").get<std::int64_t>();
    tom.binning.n_bins = j.at("binning").at("n_bins").get<int>();
    const auto& rows = j.at("data");
    if (static_cast<int>(rows.size()) != tom.n_objects) {
      throw BadArtifactError("row count does not match shape");
    }
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != tom.binning.n_bins) {
        throw BadArtifactError("row width does not match binning");
      }
      for (const auto& v : row) tom.cells.push_back(v.get<int>());
    }
    return tom;
  });
}

std::string grid_json(const som::SomGrid& grid, const som::TrainSchedule& schedule) {
  json j;
  j["rows"] = grid.rows;
  j["cols"] = grid.cols;
  j["dim"] = grid.dim;
  j["weights"] = grid.weights;
  j["schedule"] = {{"epochs", schedule.epochs}, {"lr0", schedule.lr0},   {"lr1", schedule.lr1},
                   {"sigma0", schedule.sigma0}, {"sigma1", schedule.sigma1}};
  j["seed"] = schedule.seed;
  return j.dump(2) + "\n";
}

som::SomGrid parse_grid_json(const std::string& text) {
  return guarded("trained grid", [&] {
    const json j = json::parse(text);
    som::SomGrid grid;
    grid.rows = j.at("rows").get<int>();
    grid.cols = j.at("cols").get<int>();
    grid.dim = j.at("dim").get<int>();
    grid.weights = j.at("weights").get<std::vector<double>>();
    const std::size_t expected = static_cast<std::size_t>(grid.rows) * grid.cols * grid.dim;
    if (grid.weights.size() != expected) throw BadArtifactError("weight count mismatch");
    return grid;
  });
}

std::string umatrix_json(const som::UMatrix& u, const som::ClusterAssignment& assignment,
                         const std::vector<som::OutstandingHit>& flags,
                         const std::vector<std::string>& object_names) {
  json j;
  j["rows"] = u.rows;
  j["cols"] = u.cols;
  j["values"] = u.values;
  j["hits"] = assignment.hits;
  j["flags"] = flags_array(flags, object_names);
  return j.dump(2) + "\n";
}

void parse_umatrix_json(const std::string& text, som::UMatrix& u,
                        som::ClusterAssignment& assignment,
                        std::vector<som::OutstandingHit>& flags,
                        std::vector<std::string>& object_names) {
  guarded("node distance map", [&] {
    const json j = json::parse(text);
    u.rows = j.at("rows").get<int>();
    u.cols = j.at("cols").get<int>();
    u.values = j.at("values").get<std::vector<double>>();
    if (u.values.size() != static_cast<std::size_t>(u.rows) * u.cols) {
      throw BadArtifactError("value count mismatch");
    }
    assignment = {};
    assignment.hits = j.at("hits").get<std::vector<int>>();
    flags.clear();
    object_names.clear();
    for (const auto& f : j.at("flags")) {
      som::OutstandingHit hit;
      hit.object = f.at("object").get<int>();
      hit.row = f.at("row").get<int>();
      hit.col = f.at("col").get<int>();
      hit.u_value = f.at("u_value").get<double>();
      flags.push_back(hit);
      if (hit.object >= 0) {
        if (static_cast<int>(object_names.size()) <= hit.object) {
          object_names.resize(static_cast<std::size_t>(hit.object) + 1);
        }
        object_names[static_cast<std::size_t>(hit.object)] =
            f.at("object_id").get<std::string>();
      }
    }
    return 0;
  });
}

std::string flags_json(const std::vector<som::OutstandingHit>& flags,
                       const std::vector<std::string>& object_names) {
  return flags_array(flags, object_names).dump(2) + "\n";
}

std::string flow_json(const predict::FlowMap& flow, const ingest::LocationTree& tree) {
  json j;
  j["label"] = flow.label;
  j["bin_t"] = flow.bin_t;
  j["n_locations"] = flow.n_locations;
  j["locations"] = location_array(tree);
  json edges = json::array();
  for (const auto& e : predict::top_edges(flow, -1)) {
    edges.push_back({{"origin", e.origin}, {"dest", e.dest}, {"weight", e.weight}});
  }
  j["edges"] = std::move(edges);
  return j.dump(2) + "\n";
}

void parse_flow_json(const std::string& text, predict::FlowMap& flow,
                     ingest::LocationTree& tree) {
  guarded("flow map", [&] {
    const json j = json::parse(text);
    flow = {};
    flow.label = j.at("label").get<std::string>();
    flow.bin_t = j.at("bin_t").get<int>();
    flow.n_locations = j.at("n_locations").get<int>();
    if (flow.n_locations < 1) throw BadArtifactError("flow needs at least one location");
    flow.weights.assign(static_cast<std::size_t>(flow.n_locations) * flow.n_locations, 0.0);
    for (const auto& e : j.at("edges")) {
      const int origin = e.at("origin").get<int>();
      const int dest = e.at("dest").get<int>();
      if (origin < 1 || origin > flow.n_locations || dest < 1 || dest > flow.n_locations) {
        throw BadArtifactError("edge endpoint outside the location range");
      }
      flow.at(origin, dest) = e.at("weight").get<double>();
    }
    tree = tree_from(j.at("locations"));
    return 0;
  });
}

std::string report_json(const predict::EvaluationReport& report) {
  json j;
  j["target_bin"] = report.target_bin;
  j["n_classes"] = report.n_classes;
  j["n_objects"] = report.n_objects;
  json models = json::array();
  for (const auto& model : report.models) {
    json m;
    m["kind"] = predict::to_string(model.kind);
    m["overall_accuracy"] = model.overall_accuracy;
    json probes = json::array();
    for (const auto& p : model.probes) {
      probes.push_back({{"minutes", p.minutes},
                        {"bins", p.bins},
                        {"n_train", p.n_train},
                        {"accuracy", p.accuracy}});
    }
    m["probes"] = std::move(probes);
    json confusion = json::array();
    for (int t = 0; t < report.n_classes; ++t) {
      json row = json::array();
      for (int p = 0; p < report.n_classes; ++p) {
        row.push_back(model.confusion[static_cast<std::size_t>(t) * report.n_classes + p]);
      }
      confusion.push_back(std::move(row));
    }
    m["confusion"] = std::move(confusion);
    models.push_back(std::move(m));
  }
  j["models"] = std::move(models);
  return j.dump(2) + "\n";
}

std::string timecube_json(const std::vector<matrices::StayInterval>& stays,
                          const ingest::LocationTree& tree, std::int64_t bin_seconds,
                          const std::vector<std::string>& object_names) {
  json j;
  j["bin_seconds"] = bin_seconds;
  j["locations"] = location_array(tree);
  json arr = json::array();
  for (const auto& s : stays) {
    arr.push_back({{"object", s.object},
                   {"object_id", row_name(object_names, s.object)},
                   {"location", s.location_id},
                   {"t_start", s.t_start},
                   {"t_end", s.t_end}});
  }
  j["stays"] = std::move(arr);
  return j.dump(2) + "\n";
}

void parse_timecube_json(const std::string& text, std::vector<matrices::StayInterval>& stays,
                         ingest::LocationTree& tree, std::vector<std::string>& object_names) {
  guarded("space-time stays", [&] {
    const json j = json::parse(text);
    tree = tree_from(j.at("locations"));
    stays.clear();
    object_names.clear();
    for (const auto& s : j.at("stays")) {
      matrices::StayInterval stay;
      stay.object = s.at("object").get<int>();
      stay.location_id = s.at("location").get<int>();
      stay.t_start = s.at("t_start").get<std::int64_t>();
      stay.t_end = s.at("t_end").get<std::int64_t>();
      stays.push_back(stay);
      if (stay.object >= 0) {
        if (static_cast<int>(object_names.size()) <= stay.object) {
          object_names.resize(static_cast<std::size_t>(stay.object) + 1);
        }
        object_names[static_cast<std::size_t>(stay.object)] =
            s.at("object_id").get<std::string>();
      }
    }
    return 0;
  });
}

std::string truth_json(const synth::GroundTruth& truth) {
  json j;
  j["base_epoch"] = truth.base_epoch;
  j["bin_seconds"] = truth.bin_seconds;
  j["bins_per_day"] = truth.bins_per_day;
  j["markov"] = truth.markov;
  json routes = json::array();
  for (const auto& r : truth.routes) {
    routes.push_back({{"origin", r.origin}, {"destination", r.destination}, {"share", r.share}});
  }
  j["routes"] = std::move(routes);
  json objects = json::object();
  for (const auto& [id, o] : truth.objects) {
    objects[id] = {{"class", o.cls},
                   {"route_id", o.route_id},
                   {"first_day", o.first_day},
                   {"day_span", o.day_span},
                   {"day_start_bin", o.day_start_bin},
                   {"bins_per_day", o.bins_per_day}};
  }
  j["objects"] = std::move(objects);
  return j.dump(2) + "\n";
}

}  // namespace mobpat::jsonio
