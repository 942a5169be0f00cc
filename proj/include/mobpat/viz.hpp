#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mobpat/ingest.hpp"
#include "mobpat/matrices.hpp"
#include "mobpat/predict.hpp"
#include "mobpat/som.hpp"

namespace mobpat::viz {

enum class ColorRamp { sequential, diverging };

struct BadRenderSpecError : std::invalid_argument {
  BadRenderSpecError() : std::invalid_argument("render size must be at least 64x64 pixels") {}
};

struct RenderSpec {
  int width = 720;
  int height = 540;
  ColorRamp ramp = ColorRamp::sequential;
  int margin = 48;
  bool legend = true;
};

// Position of v inside [lo, hi], clamped to [0, 1]; 0 when the range is
// degenerate. Monotone non-decreasing in v.
double unit_position(double v, double lo, double hi);

// CSS color at ramp position t in [0, 1], interpolated over fixed stops.
std::string ramp_color(ColorRamp ramp, double t);

// Node grid colored by U-value, hit counts as cell labels, flagged cells
// outlined.
std::string render_umatrix(const som::UMatrix& u, const som::ClusterAssignment& assignment,
                           const std::vector<som::OutstandingHit>& flags, const RenderSpec& spec);

// Objects x locations grid. Empty label vectors fall back to generated
// row/column names.
std::string render_heatmap(const matrices::VisitFrequencyMatrix& m, const RenderSpec& spec,
                           const std::vector<std::string>& row_labels = {},
                           const std::vector<std::string>& col_labels = {});
std::string render_heatmap(const matrices::TimeSpentMatrix& m, const RenderSpec& spec,
                           const std::vector<std::string>& row_labels = {},
                           const std::vector<std::string>& col_labels = {});

// Location nodes with directed weighted edges. Nodes use tree coordinates
// when every location has them, otherwise a circular layout in id order.
// Straight edges are <line> elements with an arrow marker; self-edges are
// <path> loops. Stroke width = max(0.5, 6 * weight / max_weight).
std::string render_flowmap(const predict::FlowMap& flow, const ingest::LocationTree& tree,
                           const RenderSpec& spec);

// Isometric space-time plot: one polyline per object, one vertex per stay at
// (location x, location y, stay start). object_labels, when given, are
// indexed by object id for the legend.
std::string render_timecube(const std::vector<matrices::StayInterval>& stays,
                            const ingest::LocationTree& tree, const RenderSpec& spec,
                            const std::vector<std::string>& object_labels = {});

}  // namespace mobpat::viz
