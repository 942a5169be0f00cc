#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mobpat/ingest.hpp"
#include "mobpat/matrices.hpp"
#include "mobpat/predict.hpp"
#include "mobpat/som.hpp"
#include "mobpat/synth.hpp"

namespace mobpat::jsonio {

struct BadArtifactError : std::runtime_error {
  explicit BadArtifactError(const std::string& what) : std::runtime_error(what) {}
};

// ---- CSV ----

// Row per object, header = location ids. row_names empty means row indexes.
std::string matrix_csv(const matrices::VisitFrequencyMatrix& m,
                       const std::vector<std::string>& row_names = {});
std::string matrix_csv(const matrices::TimeSpentMatrix& m,
                       const std::vector<std::string>& row_names = {});

// Row per object, header = bin indexes, cells = location ids.
std::string tom_csv(const matrices::TimeOrientedMatrix& tom,
                    const std::vector<std::string>& row_names = {});

// rows x cols U-values, no header.
std::string umatrix_csv(const som::UMatrix& u);

// `model,minutes,accuracy` rows, one per model and probe.
std::string curves_csv(const predict::EvaluationReport& report);

// ---- JSON envelopes ----

// {kind, shape, window:{t0, t1}, data}
std::string matrix_json(const matrices::VisitFrequencyMatrix& m, std::int64_t t0, std::int64_t t1,
                        const std::vector<std::string>& row_names = {});
std::string matrix_json(const matrices::TimeSpentMatrix& m, std::int64_t t0, std::int64_t t1,
                        const std::vector<std::string>& row_names = {});

// Window-matrix envelope read back for rendering; data is row-major.
struct ParsedMatrix {
  std::string kind;  // "frequency" or "time_spent"
  int objects = 0;
  int locations = 0;
  std::vector<double> data;
  std::vector<std::string> names;
};
ParsedMatrix parse_matrix_json(const std::string& text);

// {kind, shape, binning:{start, bin_seconds, n_bins}, data}
std::string tom_json(const matrices::TimeOrientedMatrix& tom,
                     const std::vector<std::string>& row_names = {});
matrices::TimeOrientedMatrix parse_tom_json(const std::string& text);

// Location-tree CSV `name,category,parent,x,y`, one row per id in order.
std::string tree_csv(const ingest::LocationTree& tree);

// {rows, cols, dim, weights, schedule, seed}
std::string grid_json(const som::SomGrid& grid, const som::TrainSchedule& schedule);
som::SomGrid parse_grid_json(const std::string& text);

// {rows, cols, values, hits, flags:[{object, object_id, row, col, u_value}]}
std::string umatrix_json(const som::UMatrix& u, const som::ClusterAssignment& assignment,
                         const std::vector<som::OutstandingHit>& flags,
                         const std::vector<std::string>& object_names = {});
void parse_umatrix_json(const std::string& text, som::UMatrix& u,
                        som::ClusterAssignment& assignment,
                        std::vector<som::OutstandingHit>& flags,
                        std::vector<std::string>& object_names);

// flags only: [{object, object_id, row, col, u_value}]
std::string flags_json(const std::vector<som::OutstandingHit>& flags,
                       const std::vector<std::string>& object_names = {});

// {label, bin_t, n_locations, locations:[{id, name, x?, y?}], edges}
std::string flow_json(const predict::FlowMap& flow, const ingest::LocationTree& tree);
void parse_flow_json(const std::string& text, predict::FlowMap& flow,
                     ingest::LocationTree& tree);

// {target_bin, n_classes, n_objects, models:[{kind, overall_accuracy,
//  probes:[{minutes, bins, n_train, accuracy}], confusion}]}
std::string report_json(const predict::EvaluationReport& report);

// {bin_seconds, stays:[{object, object_id, location, t_start, t_end}],
//  locations:[{id, name, x?, y?}]}
std::string timecube_json(const std::vector<matrices::StayInterval>& stays,
                          const ingest::LocationTree& tree, std::int64_t bin_seconds,
                          const std::vector<std::string>& object_names = {});
void parse_timecube_json(const std::string& text, std::vector<matrices::StayInterval>& stays,
                         ingest::LocationTree& tree, std::vector<std::string>& object_names);

// Ground truth for a generated population.
std::string truth_json(const synth::GroundTruth& truth);

}  // namespace mobpat::jsonio
