#include "mobpat/viz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>

namespace mobpat::viz {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kNodeRadius = 12;
constexpr int kLegendStrip = 56;

const std::array<const char*, 8> kSeriesPalette = {
    "#4878a8", "#d1495b", "#66a182", "#edae49", "#8d6a9f", "#00798c", "#bc5090", "#6b705c"};

// fixed-precision formatting keeps output byte-stable across runs
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmtg(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string esc(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void check_spec(const RenderSpec& spec) {
  if (spec.width < 64 || spec.height < 64) throw BadRenderSpecError();
}

std::array<int, 3> lerp_stops(const std::vector<std::array<int, 3>>& stops, double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * static_cast<double>(stops.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos) >= stops.size() - 1
                             ? stops.size() - 2
                             : static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(lo);
  std::array<int, 3> rgb;
  for (int ch = 0; ch < 3; ++ch) {
    const double v = (1.0 - f) * stops[lo][static_cast<std::size_t>(ch)] +
                     f * stops[lo + 1][static_cast<std::size_t>(ch)];
    rgb[static_cast<std::size_t>(ch)] = static_cast<int>(std::lround(v));
  }
  return rgb;
}

std::array<int, 3> rgb_at(ColorRamp ramp, double t) {
  static const std::vector<std::array<int, 3>> sequential = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  static const std::vector<std::array<int, 3>> diverging = {
      {33, 102, 172}, {247, 247, 247}, {178, 24, 43}};
  return lerp_stops(ramp == ColorRamp::sequential ? sequential : diverging, t);
}

// dark text on bright cells, light text on dark cells
const char* text_color_on(const std::array<int, 3>& rgb) {
  const double luma = 0.2126 * rgb[0] + 0.7152 * rgb[1] + 0.0722 * rgb[2];
  return luma > 140.0 ? "#1a1a1a" : "#f2f2f2";
}

std::string svg_open(const RenderSpec& spec, const std::string& title) {
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(spec.width) + "\" height=\"" + std::to_string(spec.height) +
                    "\" viewBox=\"0 0 " + std::to_string(spec.width) + " " +
                    std::to_string(spec.height) + "\" font-family=\"sans-serif\">\n";
  out += "<title>" + esc(title) + "</title>\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
         std::to_string(spec.height) + "\" fill=\"#ffffff\"/>\n";
  out += "<text x=\"" + std::to_string(spec.margin) + "\" y=\"" +
         std::to_string(spec.margin / 2 + 5) + "\" font-size=\"14\" fill=\"#1a1a1a\">" +
         esc(title) + "</text>\n";
  return out;
}

void add_legend(std::string& out, const RenderSpec& spec, double lo, double hi) {
  const int x = spec.width - spec.margin - 18;
  const int y0 = spec.margin;
  const int h = spec.height - 2 * spec.margin;
  const int steps = 32;
  for (int s = 0; s < steps; ++s) {
    // top segment carries the maximum
    const double t = 1.0 - (static_cast<double>(s) + 0.5) / steps;
    out += "<rect x=\"" + std::to_string(x) + "\" y=\"" +
           fmt(y0 + static_cast<double>(s) * h / steps) + "\" width=\"14\" height=\"" +
           fmt(static_cast<double>(h) / steps + 0.5) + "\" fill=\"" +
           ramp_color(spec.ramp, t) + "\"/>\n";
  }
  out += "<text x=\"" + std::to_string(x - 4) + "\" y=\"" + std::to_string(y0 + 10) +
         "\" font-size=\"10\" text-anchor=\"end\" fill=\"#1a1a1a\">" + fmtg(hi) + "</text>\n";
  out += "<text x=\"" + std::to_string(x - 4) + "\" y=\"" + std::to_string(y0 + h) +
         "\" font-size=\"10\" text-anchor=\"end\" fill=\"#1a1a1a\">" + fmtg(lo) + "</text>\n";
}

// shared cell-grid renderer behind the U-matrix and heat-map fronts
std::string render_grid(const std::vector<double>& values, int rows, int cols,
                        const RenderSpec& spec, const std::string& title,
                        const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const std::vector<std::string>& cell_text,
                        const std::vector<bool>& outlined) {
  check_spec(spec);
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid must have at least one cell");

  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;

  const double plot_x = spec.margin;
  const double plot_y = spec.margin;
  const double plot_w = spec.width - 2.0 * spec.margin - (spec.legend ? kLegendStrip : 0);
  const double plot_h = spec.height - 2.0 * spec.margin;
  const double cell_w = plot_w / cols;
  const double cell_h = plot_h / rows;

  std::string out = svg_open(spec, title);
  std::string outlines;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * cols + c;
      const double t = unit_position(values[i], lo, hi);
      const auto rgb = rgb_at(spec.ramp, t);
      const double x = plot_x + c * cell_w;
      const double y = plot_y + r * cell_h;
      out += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(cell_w) +
             "\" height=\"" + fmt(cell_h) + "\" fill=\"rgb(" + std::to_string(rgb[0]) + "," +
             std::to_string(rgb[1]) + "," + std::to_string(rgb[2]) + ")\"/>\n";
      if (!cell_text.empty() && !cell_text[i].empty()) {
        out += "<text x=\"" + fmt(x + cell_w / 2) + "\" y=\"" + fmt(y + cell_h / 2 + 3.5) +
               "\" font-size=\"10\" text-anchor=\"middle\" fill=\"" +
               std::string(text_color_on(rgb)) + "\">" + esc(cell_text[i]) + "</text>\n";
      }
      if (!outlined.empty() && outlined[i]) {
        outlines += "<rect x=\"" + fmt(x + 1.25) + "\" y=\"" + fmt(y + 1.25) + "\" width=\"" +
                    fmt(cell_w - 2.5) + "\" height=\"" + fmt(cell_h - 2.5) +
                    "\" fill=\"none\" stroke=\"#e8590c\" stroke-width=\"2.5\"/>\n";
      }
    }
  }
  out += outlines;  // outlines sit on top of neighboring cell fills

  // at most ~16 labels per axis; the step keeps dense grids readable
  const int row_step = (rows + 15) / 16;
  const int col_step = (cols + 15) / 16;
  for (int r = 0; r < rows; r += row_step) {
    const std::string label =
        r < static_cast<int>(row_labels.size()) ? row_labels[static_cast<std::size_t>(r)] : std::to_string(r);
    out += "<text x=\"" + fmt(plot_x - 4) + "\" y=\"" + fmt(plot_y + (r + 0.5) * cell_h + 3.5) +
           "\" font-size=\"10\" text-anchor=\"end\" fill=\"#1a1a1a\">" + esc(label) + "</text>\n";
  }
  for (int c = 0; c < cols; c += col_step) {
    const std::string label =
        c < static_cast<int>(col_labels.size()) ? col_labels[static_cast<std::size_t>(c)] : std::to_string(c);
    out += "<text x=\"" + fmt(plot_x + (c + 0.5) * cell_w) + "\" y=\"" +
           fmt(plot_y + plot_h + 14) +
           "\" font-size=\"10\" text-anchor=\"middle\" fill=\"#1a1a1a\">" + esc(label) +
           "</text>\n";
  }

  if (spec.legend) add_legend(out, spec, lo, hi);
  out += "</svg>\n";
  return out;
}

// circular fallback positions in id order, 1-based, starting at 12 o'clock
std::pair<double, double> circle_position(int id, int count) {
  const double angle = 2.0 * kPi * (id - 1) / std::max(1, count) - kPi / 2.0;
  return {std::cos(angle), std::sin(angle)};
}

// unit-square positions per location id; tree coordinates when every id has
// them, circular layout otherwise
std::vector<std::pair<double, double>> location_positions(const ingest::LocationTree& tree,
                                                          int n_locations) {
  bool coords = n_locations >= 1;
  for (int id = 1; id <= n_locations && coords; ++id) {
    coords = tree.contains(id) && tree.node(id).x.has_value() && tree.node(id).y.has_value();
  }

  std::vector<std::pair<double, double>> pos(static_cast<std::size_t>(n_locations) + 1, {0.5, 0.5});
  if (!coords) {
    for (int id = 1; id <= n_locations; ++id) {
      const auto [cx, cy] = circle_position(id, n_locations);
      pos[static_cast<std::size_t>(id)] = {0.5 + 0.5 * cx, 0.5 + 0.5 * cy};
    }
    return pos;
  }

  double xlo = tree.node(1).x.value(), xhi = xlo;
  double ylo = tree.node(1).y.value(), yhi = ylo;
  for (int id = 2; id <= n_locations; ++id) {
    xlo = std::min(xlo, tree.node(id).x.value());
    xhi = std::max(xhi, tree.node(id).x.value());
    ylo = std::min(ylo, tree.node(id).y.value());
    yhi = std::max(yhi, tree.node(id).y.value());
  }
  for (int id = 1; id <= n_locations; ++id) {
    pos[static_cast<std::size_t>(id)] = {unit_position(tree.node(id).x.value(), xlo, xhi),
                                         unit_position(tree.node(id).y.value(), ylo, yhi)};
  }
  return pos;
}

std::string location_name(const ingest::LocationTree& tree, int id) {
  return tree.contains(id) ? tree.node(id).name : "L" + std::to_string(id);
}

}  // namespace

double unit_position(double v, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

std::string ramp_color(ColorRamp ramp, double t) {
  const auto rgb = rgb_at(ramp, t);
  return "rgb(" + std::to_string(rgb[0]) + "," + std::to_string(rgb[1]) + "," +
         std::to_string(rgb[2]) + ")";
}

std::string render_umatrix(const som::UMatrix& u, const som::ClusterAssignment& assignment,
                           const std::vector<som::OutstandingHit>& flags, const RenderSpec& spec) {
  if (u.rows < 1 || u.cols < 1) throw std::invalid_argument("U-matrix has no cells");

  std::vector<std::string> cell_text(u.values.size());
  for (std::size_t i = 0; i < assignment.hits.size() && i < cell_text.size(); ++i) {
    if (assignment.hits[i] > 0) cell_text[i] = std::to_string(assignment.hits[i]);
  }
  std::vector<bool> outlined(u.values.size(), false);
  for (const auto& f : flags) {
    if (f.row >= 0 && f.row < u.rows && f.col >= 0 && f.col < u.cols) {
      outlined[static_cast<std::size_t>(f.row) * u.cols + f.col] = true;
    }
  }
  return render_grid(u.values, u.rows, u.cols, spec, "node distance map", {}, {}, cell_text,
                     outlined);
}

namespace {

// column default = 1-based location id, matching the ids in the data
std::vector<std::string> location_id_labels(const std::vector<std::string>& given, int l_n) {
  if (!given.empty()) return given;
  std::vector<std::string> labels;
  for (int id = 1; id <= l_n; ++id) labels.push_back(std::to_string(id));
  return labels;
}

}  // namespace

std::string render_heatmap(const matrices::VisitFrequencyMatrix& m, const RenderSpec& spec,
                           const std::vector<std::string>& row_labels,
                           const std::vector<std::string>& col_labels) {
  const std::vector<double> values(m.data().begin(), m.data().end());
  return render_grid(values, m.objects(), m.locations(), spec, "check-in counts", row_labels,
                     location_id_labels(col_labels, m.locations()), {}, {});
}

std::string render_heatmap(const matrices::TimeSpentMatrix& m, const RenderSpec& spec,
                           const std::vector<std::string>& row_labels,
                           const std::vector<std::string>& col_labels) {
  return render_grid(m.data(), m.objects(), m.locations(), spec, "time spent (seconds)",
                     row_labels, location_id_labels(col_labels, m.locations()), {}, {});
}

std::string render_flowmap(const predict::FlowMap& flow, const ingest::LocationTree& tree,
                           const RenderSpec& spec) {
  check_spec(spec);
  const int l_n = flow.n_locations;

  const double plot_x = spec.margin + kNodeRadius;
  const double plot_y = spec.margin + kNodeRadius;
  const double plot_w = spec.width - 2.0 * (spec.margin + kNodeRadius);
  const double plot_h = spec.height - 2.0 * (spec.margin + kNodeRadius) - 18.0;

  const auto unit = location_positions(tree, l_n);
  std::vector<std::pair<double, double>> at(unit.size());
  for (std::size_t i = 1; i < unit.size(); ++i) {
    at[i] = {plot_x + unit[i].first * plot_w, plot_y + unit[i].second * plot_h};
  }

  auto edges = top_edges(flow, -1);
  // heaviest drawn last so the dominant arrows sit on top
  std::reverse(edges.begin(), edges.end());
  const double max_w = edges.empty() ? 0.0 : top_edges(flow, 1)[0].weight;

  std::string out = svg_open(spec, flow.label + " flow at bin " + std::to_string(flow.bin_t));
  out += "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" "
         "markerWidth=\"6\" markerHeight=\"6\" orient=\"auto-start-reverse\">"
         "<path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#555566\"/></marker></defs>\n";

  for (const auto& e : edges) {
    const double stroke = std::max(0.5, 6.0 * e.weight / max_w);
    const auto [x1, y1] = at[static_cast<std::size_t>(e.origin)];
    if (e.origin == e.dest) {
      // loop above the node, drawn as a cubic arc
      const double r = kNodeRadius;
      out += "<path d=\"M " + fmt(x1 - 3) + " " + fmt(y1 - r) + " C " + fmt(x1 - 30) + " " +
             fmt(y1 - r - 34) + " " + fmt(x1 + 30) + " " + fmt(y1 - r - 34) + " " + fmt(x1 + 3) +
             " " + fmt(y1 - r) + "\" fill=\"none\" stroke=\"#555566\" stroke-opacity=\"0.85\" "
             "stroke-width=\"" + fmt(stroke) + "\" marker-end=\"url(#arrow)\"/>\n";
      continue;
    }
    const auto [x2, y2] = at[static_cast<std::size_t>(e.dest)];
    const double dx = x2 - x1, dy = y2 - y1;
    const double len = std::sqrt(dx * dx + dy * dy);
    if (len < 1e-9) continue;
    const double ux = dx / len, uy = dy / len;
    out += "<line x1=\"" + fmt(x1 + ux * kNodeRadius) + "\" y1=\"" + fmt(y1 + uy * kNodeRadius) +
           "\" x2=\"" + fmt(x2 - ux * (kNodeRadius + 4)) + "\" y2=\"" +
           fmt(y2 - uy * (kNodeRadius + 4)) +
           "\" stroke=\"#555566\" stroke-opacity=\"0.85\" stroke-width=\"" + fmt(stroke) +
           "\" marker-end=\"url(#arrow)\"/>\n";
  }

  for (int id = 1; id <= l_n; ++id) {
    const auto [cx, cy] = at[static_cast<std::size_t>(id)];
    out += "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"" +
           std::to_string(kNodeRadius) + "\" fill=\"#4878a8\" stroke=\"#ffffff\" "
           "stroke-width=\"1.5\"/>\n";
    out += "<text x=\"" + fmt(cx) + "\" y=\"" + fmt(cy + kNodeRadius + 12) +
           "\" font-size=\"10\" text-anchor=\"middle\" fill=\"#1a1a1a\">" +
           esc(location_name(tree, id)) + "</text>\n";
  }

  if (spec.legend && max_w > 0.0) {
    out += "<text x=\"" + std::to_string(spec.margin) + "\" y=\"" +
           std::to_string(spec.height - spec.margin / 2) +
           "\" font-size=\"11\" fill=\"#1a1a1a\">heaviest edge: " + fmtg(max_w) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string render_timecube(const std::vector<matrices::StayInterval>& stays,
                            const ingest::LocationTree& tree, const RenderSpec& spec,
                            const std::vector<std::string>& object_labels) {
  check_spec(spec);

  int l_n = tree.size();
  for (const auto& s : stays) l_n = std::max(l_n, s.location_id);
  const auto unit = location_positions(tree, l_n);

  std::map<int, std::vector<matrices::StayInterval>> per_object;
  for (const auto& s : stays) per_object[s.object].push_back(s);
  std::int64_t t_lo = 0, t_hi = 0;
  bool first = true;
  for (auto& [object, seq] : per_object) {
    std::sort(seq.begin(), seq.end(), [](const auto& a, const auto& b) {
      if (a.t_start != b.t_start) return a.t_start < b.t_start;
      return a.t_end < b.t_end;
    });
    for (const auto& s : seq) {
      t_lo = first ? s.t_start : std::min(t_lo, s.t_start);
      t_hi = first ? s.t_start : std::max(t_hi, s.t_start);
      first = false;
    }
  }

  // isometric projection of the unit box; the raw extents are those of the
  // box itself, so the viewport layout does not depend on the data
  const double c30 = std::cos(kPi / 6.0), s30 = std::sin(kPi / 6.0);
  const double zh = 1.2;
  const auto raw = [&](double x, double y, double z) {
    return std::pair<double, double>{(x - y) * c30, (x + y) * s30 - z * zh};
  };
  const double rx_lo = -c30, rx_hi = c30;
  const double ry_lo = -zh, ry_hi = 2.0 * s30;

  const double plot_w = spec.width - 2.0 * spec.margin;
  const double plot_h = spec.height - 2.0 * spec.margin;
  const double scale = std::min(plot_w / (rx_hi - rx_lo), plot_h / (ry_hi - ry_lo));
  const double off_x = spec.margin + (plot_w - (rx_hi - rx_lo) * scale) / 2.0;
  const double off_y = spec.margin + (plot_h - (ry_hi - ry_lo) * scale) / 2.0;
  const auto screen = [&](double x, double y, double z) {
    const auto [rx, ry] = raw(x, y, z);
    return std::pair<double, double>{off_x + (rx - rx_lo) * scale, off_y + (ry - ry_lo) * scale};
  };
  const auto pt = [&](double x, double y, double z) {
    const auto [sx, sy] = screen(x, y, z);
    return fmt(sx) + "," + fmt(sy);
  };

  std::string out = svg_open(spec, "space-time trajectories");

  // ground square at t = 0, then the three labeled axes
  out += "<polygon points=\"" + pt(0, 0, 0) + " " + pt(1, 0, 0) + " " + pt(1, 1, 0) + " " +
         pt(0, 1, 0) + "\" fill=\"#f1f3f5\" stroke=\"#ced4da\" stroke-width=\"1\"/>\n";
  const auto axis = [&](double x, double y, double z, const char* label) {
    const auto [ax, ay] = screen(x, y, z);
    out += "<line x1=\"" + fmt(screen(0, 0, 0).first) + "\" y1=\"" + fmt(screen(0, 0, 0).second) +
           "\" x2=\"" + fmt(ax) + "\" y2=\"" + fmt(ay) +
           "\" stroke=\"#495057\" stroke-width=\"1.5\"/>\n";
    out += "<text x=\"" + fmt(ax + 4) + "\" y=\"" + fmt(ay - 4) +
           "\" font-size=\"12\" fill=\"#495057\">" + std::string(label) + "</text>\n";
  };
  axis(1, 0, 0, "x");
  axis(0, 1, 0, "y");
  axis(0, 0, 1, "t");

  int series = 0;
  std::string legend;
  for (const auto& [object, seq] : per_object) {
    const std::string color = kSeriesPalette[static_cast<std::size_t>(series) % kSeriesPalette.size()];
    std::string points;
    std::string dots;
    for (const auto& s : seq) {
      const auto [ux, uy] = unit[static_cast<std::size_t>(s.location_id)];
      const double z = t_hi > t_lo
                           ? static_cast<double>(s.t_start - t_lo) / static_cast<double>(t_hi - t_lo)
                           : 0.5;
      const auto [sx, sy] = screen(ux, uy, z);
      if (!points.empty()) points += " ";
      points += fmt(sx) + "," + fmt(sy);
      dots += "<circle cx=\"" + fmt(sx) + "\" cy=\"" + fmt(sy) + "\" r=\"2.5\" fill=\"" + color +
              "\"/>\n";
    }
    out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    out += dots;

    const std::string label = object >= 0 && object < static_cast<int>(object_labels.size())
                                  ? object_labels[static_cast<std::size_t>(object)]
                                  : "object " + std::to_string(object);
    if (spec.legend) {
      const int ly = spec.margin + 16 * series;
      legend += "<rect x=\"" + std::to_string(spec.width - spec.margin - 70) + "\" y=\"" +
                std::to_string(ly) + "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
      legend += "<text x=\"" + std::to_string(spec.width - spec.margin - 56) + "\" y=\"" +
                std::to_string(ly + 9) + "\" font-size=\"10\" fill=\"#1a1a1a\">" + esc(label) +
                "</text>\n";
    }
    ++series;
  }
  out += legend;
  out += "</svg>\n";
  return out;
}

}  // namespace mobpat::viz
