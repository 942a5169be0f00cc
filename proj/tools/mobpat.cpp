// Command-line front end for the mobility-pattern pipeline: synthesize or
// ingest check-in data, build the time-spatial matrices, cluster movers on a
// self-organizing map, predict next locations, and render SVG artifacts.
// Every run emits a manifest with input/output digests so results can be
// audited and reproduced.
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mobpat/fsio.hpp"
#include "mobpat/ingest.hpp"
#include "mobpat/jsonio.hpp"
#include "mobpat/matrices.hpp"
#include "mobpat/predict.hpp"
#include "mobpat/rng.hpp"
#include "mobpat/som.hpp"
#include "mobpat/synth.hpp"
#include "mobpat/viz.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using json = nlohmann::ordered_json;
using namespace mobpat;

// Collects resolved parameters and file digests while a subcommand runs,
// then lands as manifest.json beside the outputs. Paths are recorded as
// given on the command line, so runs in different directories with the same
// relative layout produce identical manifests.
class Manifest {
 public:
  Manifest(std::string subcommand, std::uint64_t seed)
      : subcommand_(std::move(subcommand)), seed_(seed) {
    parameters_ = json::object();
    inputs_ = json::object();
    outputs_ = json::object();
  }

  template <typename T>
  void param(const std::string& name, const T& value) {
    parameters_[name] = value;
  }

  std::string input(const std::string& path) {
    const std::string text = fsio::read_file(path);
    inputs_[path] = fsio::digest_hex(text);
    return text;
  }

  void output(const std::string& path, const std::string& content) {
    fsio::write_file(path, content);
    outputs_[path] = fsio::digest_hex(content);
    fsio::log(fsio::LogLevel::info, "wrote " + path);
  }

  void finish(const std::string& dir) {
    json j;
    j["tool"] = "mobpat";
    j["version"] = kVersion;
    j["subcommand"] = subcommand_;
    j["seed"] = seed_;
    j["parameters"] = parameters_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    const std::string path =
        (dir.empty() ? std::string("manifest.json") : dir + "/manifest.json");
    fsio::write_file(path, j.dump(2) + "\n");
    fsio::log(fsio::LogLevel::info, "wrote " + path);
  }

 private:
  std::string subcommand_;
  std::uint64_t seed_;
  json parameters_, inputs_, outputs_;
};

std::string parent_dir(const std::string& path) {
  return std::filesystem::path(path).parent_path().string();
}

std::string sibling(const std::string& path, const std::string& suffix) {
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

ingest::Dataset load_dataset(Manifest& manifest, const std::string& in,
                             const std::string& tree_path) {
  const std::string text = manifest.input(in);
  if (tree_path.empty()) {
    return ingest::parse_records(ingest::RecordFormat::canonical, text);
  }
  const ingest::LocationTree tree = ingest::parse_location_tree_csv(manifest.input(tree_path));
  return ingest::parse_records(ingest::RecordFormat::canonical, text, &tree);
}

struct BinFlags {
  int bin_minutes = 60;
  int timeout_minutes = 120;

  std::int64_t bin_seconds() const { return static_cast<std::int64_t>(bin_minutes) * 60; }
  std::int64_t timeout_seconds() const { return static_cast<std::int64_t>(timeout_minutes) * 60; }
};

void add_bin_flags(CLI::App* cmd, BinFlags& flags) {
  cmd->add_option("--bin-minutes", flags.bin_minutes, "Time bin length")
      ->default_val(60)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--timeout-minutes", flags.timeout_minutes,
                  "Stay cutoff when no later record follows")
      ->default_val(120)
      ->check(CLI::PositiveNumber);
}

// Exactly one of --split-bin / --split-time selects the train/test cut; the
// target bin is the first one on the test side.
int resolve_target_bin(const matrices::TimeBinning& binning, int split_bin,
                       std::int64_t split_time, bool has_bin, bool has_time) {
  if (has_bin == has_time) {
    throw CLI::ValidationError("predict", "exactly one of --split-bin/--split-time is required");
  }
  int bin = split_bin;
  if (has_time) {
    const auto mapped = binning.bin_of(split_time);
    if (!mapped.has_value()) {
      throw std::invalid_argument("--split-time falls outside the data's time range");
    }
    bin = *mapped;
  }
  if (bin < 1 || bin >= binning.n_bins) {
    throw std::invalid_argument("split bin " + std::to_string(bin) +
                                " leaves no history or no target inside " +
                                std::to_string(binning.n_bins) + " bins");
  }
  return bin;
}

std::vector<predict::ModelKind> resolve_models(const std::vector<std::string>& names) {
  std::vector<predict::ModelKind> kinds;
  for (const auto& name : names) {
    const auto kind = predict::model_kind_of(name);
    if (!kind.has_value()) throw std::invalid_argument("unknown model kind: " + name);
    kinds.push_back(*kind);
  }
  return kinds;
}

const std::vector<std::string>& all_model_names() {
  static const std::vector<std::string> names = {
      "uniform",     "most_frequent", "knn",        "naive_bayes", "decision_tree",
      "random_forest", "linear_svm",  "adaboost",   "rnn",         "lstm"};
  return names;
}

// ---- subcommand bodies ----

struct SynthArgs {
  std::string config, out;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int run_synth(const SynthArgs& args) {
  Manifest manifest("synth", args.seed);
  synth::SynthConfig config;
  if (!args.config.empty()) config = synth::parse_config_file(manifest.input(args.config));
  if (args.seed_given || args.config.empty()) config.seed = args.seed;
  manifest.param("config", args.config);
  manifest.param("out", args.out);
  manifest.param("resolved_seed", config.seed);

  const auto [dataset, truth] = synth::generate(config);
  manifest.output(args.out, ingest::serialize_canonical(dataset));
  manifest.output(sibling(args.out, ".locations.csv"), jsonio::tree_csv(dataset.locations));
  manifest.output(sibling(args.out, ".truth.json"), jsonio::truth_json(truth));
  manifest.finish(parent_dir(args.out));
  return 0;
}

struct IngestArgs {
  std::string format = "canonical", in, out, tree;
};

int run_ingest(const IngestArgs& args) {
  Manifest manifest("ingest", 0);
  manifest.param("format", args.format);
  manifest.param("in", args.in);
  manifest.param("out", args.out);
  manifest.param("tree", args.tree);

  const std::string text = manifest.input(args.in);
  const ingest::RecordFormat format = args.format == "mobile" ? ingest::RecordFormat::mobile
                                      : args.format == "vast" ? ingest::RecordFormat::vast
                                                              : ingest::RecordFormat::canonical;
  ingest::Dataset dataset;
  if (args.tree.empty()) {
    dataset = ingest::parse_records(format, text);
  } else {
    const auto tree = ingest::parse_location_tree_csv(manifest.input(args.tree));
    dataset = ingest::parse_records(format, text, &tree);
  }

  manifest.output(args.out, ingest::serialize_canonical(dataset));
  manifest.output(sibling(args.out, ".locations.csv"), jsonio::tree_csv(dataset.locations));
  manifest.finish(parent_dir(args.out));
  return 0;
}

struct MatricesArgs {
  std::string in, tree, which = "all", out_dir;
  BinFlags bins;
};

int run_matrices(const MatricesArgs& args) {
  Manifest manifest("matrices", 0);
  manifest.param("which", args.which);
  manifest.param("bin_minutes", args.bins.bin_minutes);
  manifest.param("timeout_minutes", args.bins.timeout_minutes);

  const auto dataset = load_dataset(manifest, args.in, args.tree);
  const auto binning =
      matrices::auto_binning(dataset, args.bins.bin_seconds(), args.bins.timeout_seconds());
  const auto stays = matrices::derive_stays(dataset, args.bins.timeout_seconds());
  const std::int64_t t0 = binning.start;
  const std::int64_t t1 = binning.end();
  const auto& names = dataset.object_ids;
  const std::string dir = args.out_dir;

  const bool all = args.which == "all";
  if (all || args.which == "frequency") {
    const auto freq = matrices::build_frequency_matrix(dataset, t0, t1);
    manifest.output(dir + "/frequency.csv", jsonio::matrix_csv(freq, names));
    manifest.output(dir + "/frequency.json", jsonio::matrix_json(freq, t0, t1, names));
  }
  if (all || args.which == "timespent") {
    const auto spent = matrices::build_timespent_matrix(stays, t0, t1, dataset.object_count(),
                                                        dataset.locations.size());
    manifest.output(dir + "/timespent.csv", jsonio::matrix_csv(spent, names));
    manifest.output(dir + "/timespent.json", jsonio::matrix_json(spent, t0, t1, names));
  }
  if (all || args.which == "sequence") {
    const auto seqs = matrices::build_sequence_vectors(dataset);
    std::string out = "object,sequence\n";
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      out += names[i];
      std::string joined;
      for (const int v : seqs[i]) joined += (joined.empty() ? "" : " ") + std::to_string(v);
      out += "," + joined + "\n";
    }
    manifest.output(dir + "/sequences.csv", out);
  }
  if (all || args.which == "tom") {
    const auto tom = matrices::build_time_oriented_matrix(stays, binning, dataset.object_count());
    manifest.output(dir + "/tom.csv", jsonio::tom_csv(tom, names));
    manifest.output(dir + "/tom.json", jsonio::tom_json(tom, names));
  }
  manifest.finish(dir);
  return 0;
}

struct ClusterArgs {
  std::string in, tree, normalize = "zscore", out_dir;
  BinFlags bins;
  int rows = 0, cols = 0;
  som::TrainSchedule schedule;
  double k = 2.0;
  std::uint64_t seed = 0;
};

int run_cluster(const ClusterArgs& args) {
  Manifest manifest("cluster", args.seed);
  manifest.param("normalize", args.normalize);
  manifest.param("rows", args.rows);
  manifest.param("cols", args.cols);
  manifest.param("epochs", args.schedule.epochs);
  manifest.param("k", args.k);

  const auto dataset = load_dataset(manifest, args.in, args.tree);
  const auto binning =
      matrices::auto_binning(dataset, args.bins.bin_seconds(), args.bins.timeout_seconds());
  const auto stays = matrices::derive_stays(dataset, args.bins.timeout_seconds());
  const auto freq = matrices::build_frequency_matrix(dataset, binning.start, binning.end());
  const auto spent = matrices::build_timespent_matrix(
      stays, binning.start, binning.end(), dataset.object_count(), dataset.locations.size());

  const som::Normalize normalize = args.normalize == "minmax" ? som::Normalize::minmax
                                   : args.normalize == "none" ? som::Normalize::none
                                                              : som::Normalize::zscore;
  const auto features = som::build_features(freq, spent, normalize);
  const int side = som::default_grid_side(features.n);
  const int rows = args.rows > 0 ? args.rows : side;
  const int cols = args.cols > 0 ? args.cols : side;

  som::TrainSchedule schedule = args.schedule;
  schedule.seed = args.seed;
  const auto grid0 = som::init_grid(rows, cols, features, args.seed);
  const auto result = som::train(grid0, features, schedule);
  const auto umatrix = som::compute_umatrix(result.grid);
  const auto assignment = som::assign_and_aggregate(result.grid, features);
  const auto flags = som::detect_outstanding(umatrix, assignment, args.k);
  fsio::log(fsio::LogLevel::info,
            "quantization error " + std::to_string(result.qe_trace.front()) + " -> " +
                std::to_string(result.qe_trace.back()) + ", " + std::to_string(flags.size()) +
                " flagged");

  const auto& names = dataset.object_ids;
  const std::string dir = args.out_dir;
  manifest.output(dir + "/grid.json", jsonio::grid_json(result.grid, schedule));
  manifest.output(dir + "/umatrix.csv", jsonio::umatrix_csv(umatrix));
  manifest.output(dir + "/umatrix.json", jsonio::umatrix_json(umatrix, assignment, flags, names));
  manifest.output(dir + "/flags.json", jsonio::flags_json(flags, names));
  manifest.output(dir + "/umatrix.svg",
                  viz::render_umatrix(umatrix, assignment, flags, viz::RenderSpec{}));

  std::set<int> flagged;
  for (const auto& f : flags) flagged.insert(f.object);
  std::vector<matrices::StayInterval> flagged_stays;
  for (const auto& s : stays) {
    if (flagged.count(s.object) > 0) flagged_stays.push_back(s);
  }
  manifest.output(dir + "/timecube.json", jsonio::timecube_json(flagged_stays, dataset.locations,
                                                                binning.bin_seconds, names));
  manifest.output(dir + "/timecube.svg", viz::render_timecube(flagged_stays, dataset.locations,
                                                              viz::RenderSpec{}, names));
  manifest.finish(dir);
  return 0;
}

struct PredictArgs {
  std::string in, tree, flow_model = "knn", out_dir;
  BinFlags bins;
  std::vector<std::string> models = all_model_names();
  int window = 8, stride = 1, split_bin = 0;
  std::int64_t split_time = 0;
  bool has_split_bin = false, has_split_time = false, keep_absent = false;
  int train_minutes = 0;  // 0 = all history before the split
  predict::RnnConfig rnn;
  std::uint64_t seed = 0;
};

predict::EvalOptions eval_options(const PredictArgs& args) {
  predict::EvalOptions options;
  options.window = args.window;
  options.stride = args.stride;
  options.drop_all_absent = !args.keep_absent;
  options.train.rnn = args.rnn;
  options.seed = args.seed;
  return options;
}

int run_predict(const PredictArgs& args) {
  Manifest manifest("predict", args.seed);
  manifest.param("window", args.window);
  manifest.param("models", args.models);
  manifest.param("flow_model", args.flow_model);
  manifest.param("train_minutes", args.train_minutes);

  const auto dataset = load_dataset(manifest, args.in, args.tree);
  const auto binning =
      matrices::auto_binning(dataset, args.bins.bin_seconds(), args.bins.timeout_seconds());
  const auto stays = matrices::derive_stays(dataset, args.bins.timeout_seconds());
  const auto tom = matrices::build_time_oriented_matrix(stays, binning, dataset.object_count());
  const int target_bin = resolve_target_bin(binning, args.split_bin, args.split_time,
                                            args.has_split_bin, args.has_split_time);
  manifest.param("target_bin", target_bin);
  const int n_classes = dataset.locations.size() + 1;

  const int full_minutes =
      static_cast<int>(static_cast<std::int64_t>(target_bin) * binning.bin_seconds / 60);
  const int probe = args.train_minutes > 0 ? args.train_minutes : full_minutes;
  const auto report = predict::evaluate_over_time(tom, n_classes, target_bin, {probe},
                                                  resolve_models(args.models), eval_options(args));

  const std::string dir = args.out_dir;
  manifest.output(dir + "/report.json", jsonio::report_json(report));
  manifest.output(dir + "/curves.csv", jsonio::curves_csv(report));

  // both flow maps describe the transition into the target bin
  const auto flow_kind = *predict::model_kind_of(args.flow_model);
  const auto ws = predict::make_windows(tom, n_classes, args.window, args.stride,
                                        !args.keep_absent, 0, target_bin);
  const auto flow_model = predict::train_model(flow_kind, ws, eval_options(args).train,
                                               mix_seed(args.seed, 0xF10));
  const auto actual = predict::build_flow_map(tom, dataset.locations.size(), target_bin - 1);
  const auto predicted = predict::build_predicted_flow_map(
      tom, dataset.locations.size(), target_bin - 1, flow_model, args.window);
  manifest.output(dir + "/flow_actual.json", jsonio::flow_json(actual, dataset.locations));
  manifest.output(dir + "/flow_predicted.json", jsonio::flow_json(predicted, dataset.locations));
  manifest.output(dir + "/flow_actual.svg",
                  viz::render_flowmap(actual, dataset.locations, viz::RenderSpec{}));
  manifest.output(dir + "/flow_predicted.svg",
                  viz::render_flowmap(predicted, dataset.locations, viz::RenderSpec{}));
  manifest.finish(dir);
  return 0;
}

struct EvaluateArgs {
  PredictArgs base;
  std::vector<int> probe_minutes;
};

int run_evaluate(const EvaluateArgs& args) {
  Manifest manifest("evaluate", args.base.seed);
  manifest.param("window", args.base.window);
  manifest.param("models", args.base.models);
  manifest.param("probe_minutes", args.probe_minutes);

  const auto dataset = load_dataset(manifest, args.base.in, args.base.tree);
  const auto binning = matrices::auto_binning(dataset, args.base.bins.bin_seconds(),
                                              args.base.bins.timeout_seconds());
  const auto stays = matrices::derive_stays(dataset, args.base.bins.timeout_seconds());
  const auto tom = matrices::build_time_oriented_matrix(stays, binning, dataset.object_count());
  const int target_bin = resolve_target_bin(binning, args.base.split_bin, args.base.split_time,
                                            args.base.has_split_bin, args.base.has_split_time);
  manifest.param("target_bin", target_bin);

  const auto report = predict::evaluate_over_time(tom, dataset.locations.size() + 1, target_bin,
                                                  args.probe_minutes,
                                                  resolve_models(args.base.models),
                                                  eval_options(args.base));

  const std::string dir = args.base.out_dir;
  manifest.output(dir + "/curves.csv", jsonio::curves_csv(report));
  manifest.output(dir + "/report.json", jsonio::report_json(report));
  manifest.finish(dir);
  return 0;
}

struct RenderArgs {
  std::string kind, in, out, ramp = "sequential";
  viz::RenderSpec spec;
  bool no_legend = false;
};

int run_render(const RenderArgs& args) {
  Manifest manifest("render", 0);
  manifest.param("kind", args.kind);
  manifest.param("width", args.spec.width);
  manifest.param("height", args.spec.height);
  manifest.param("ramp", args.ramp);

  viz::RenderSpec spec = args.spec;
  spec.ramp = args.ramp == "diverging" ? viz::ColorRamp::diverging : viz::ColorRamp::sequential;
  spec.legend = !args.no_legend;
  const std::string text = manifest.input(args.in);

  std::string svg;
  if (args.kind == "umatrix") {
    som::UMatrix u;
    som::ClusterAssignment assignment;
    std::vector<som::OutstandingHit> flags;
    std::vector<std::string> names;
    jsonio::parse_umatrix_json(text, u, assignment, flags, names);
    svg = viz::render_umatrix(u, assignment, flags, spec);
  } else if (args.kind == "heatmap") {
    const auto parsed = jsonio::parse_matrix_json(text);
    if (parsed.kind == "frequency") {
      matrices::VisitFrequencyMatrix m(parsed.objects, parsed.locations);
      for (int i = 0; i < parsed.objects; ++i) {
        for (int loc = 1; loc <= parsed.locations; ++loc) {
          m.add(i, loc, static_cast<int>(
                            parsed.data[static_cast<std::size_t>(i) * parsed.locations + loc - 1]));
        }
      }
      svg = viz::render_heatmap(m, spec, parsed.names);
    } else {
      matrices::TimeSpentMatrix m(parsed.objects, parsed.locations);
      for (int i = 0; i < parsed.objects; ++i) {
        for (int loc = 1; loc <= parsed.locations; ++loc) {
          m.add(i, loc, parsed.data[static_cast<std::size_t>(i) * parsed.locations + loc - 1]);
        }
      }
      svg = viz::render_heatmap(m, spec, parsed.names);
    }
  } else if (args.kind == "flowmap") {
    predict::FlowMap flow;
    ingest::LocationTree tree;
    jsonio::parse_flow_json(text, flow, tree);
    svg = viz::render_flowmap(flow, tree, spec);
  } else {
    std::vector<matrices::StayInterval> stays;
    ingest::LocationTree tree;
    std::vector<std::string> names;
    jsonio::parse_timecube_json(text, stays, tree, names);
    svg = viz::render_timecube(stays, tree, spec, names);
  }

  manifest.output(args.out, svg);
  manifest.finish(parent_dir(args.out));
  return 0;
}

void add_predict_flags(CLI::App* cmd, PredictArgs& args, bool with_train_minutes) {
  cmd->add_option("--in", args.in, "Canonical check-in CSV")->required();
  cmd->add_option("--tree", args.tree, "Location tree CSV pinning ids");
  add_bin_flags(cmd, args.bins);
  cmd->add_option("--window", args.window, "Input window length in bins")
      ->default_val(8)
      ->check(CLI::PositiveNumber);
  cmd->add_option("--stride", args.stride, "Window start step")
      ->default_val(1)
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--keep-absent", args.keep_absent, "Keep all-absent training windows");
  cmd->add_option("--split-bin", args.split_bin, "First test bin");
  cmd->add_option("--split-time", args.split_time, "Train/test cut as epoch seconds");
  cmd->add_option("--models", args.models, "Model kinds to evaluate")
      ->delimiter(',')
      ->check(CLI::IsMember(all_model_names()));
  cmd->add_option("--hidden", args.rnn.hidden, "Recurrent hidden units")->default_val(32);
  cmd->add_option("--rnn-epochs", args.rnn.epochs, "Recurrent training epochs")->default_val(30);
  cmd->add_option("--rnn-lr", args.rnn.lr, "Recurrent learning rate")->default_val(0.05);
  cmd->add_option("--seed", args.seed, "Deterministic run seed")->default_val(0);
  cmd->add_option("--out-dir", args.out_dir, "Output directory")->required();
  if (with_train_minutes) {
    cmd->add_option("--train-minutes", args.train_minutes,
                    "History offered to the models (0 = everything before the split)")
        ->default_val(0);
    cmd->add_option("--flow-model", args.flow_model, "Model behind the predicted flow map")
        ->default_val("knn")
        ->check(CLI::IsMember(all_model_names()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-spatial mobility patterns: matrices, clustering, prediction, rendering"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic population");
  synth_cmd->add_option("--config", synth_args.config, "Flat key=value generator config");
  auto* seed_opt =
      synth_cmd->add_option("--seed", synth_args.seed, "Generator seed")->default_val(0);
  synth_cmd->add_option("--out", synth_args.out, "Canonical CSV output path")->required();

  IngestArgs ingest_args;
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse raw records into canonical CSV");
  ingest_cmd->add_option("--format", ingest_args.format, "Input format")
      ->default_val("canonical")
      ->check(CLI::IsMember({"canonical", "mobile", "vast"}));
  ingest_cmd->add_option("--in", ingest_args.in, "Input record file")->required();
  ingest_cmd->add_option("--out", ingest_args.out, "Canonical CSV output path")->required();
  ingest_cmd->add_option("--tree", ingest_args.tree, "Location tree CSV pinning ids");

  MatricesArgs matrices_args;
  auto* matrices_cmd = app.add_subcommand("matrices", "Build the time-spatial matrices");
  matrices_cmd->add_option("--in", matrices_args.in, "Canonical check-in CSV")->required();
  matrices_cmd->add_option("--tree", matrices_args.tree, "Location tree CSV pinning ids");
  matrices_cmd->add_option("--which", matrices_args.which, "Which matrix to emit")
      ->default_val("all")
      ->check(CLI::IsMember({"all", "frequency", "timespent", "sequence", "tom"}));
  add_bin_flags(matrices_cmd, matrices_args.bins);
  matrices_cmd->add_option("--out-dir", matrices_args.out_dir, "Output directory")->required();

  ClusterArgs cluster_args;
  auto* cluster_cmd = app.add_subcommand("cluster", "Train the map and flag outstanding movers");
  cluster_cmd->add_option("--in", cluster_args.in, "Canonical check-in CSV")->required();
  cluster_cmd->add_option("--tree", cluster_args.tree, "Location tree CSV pinning ids");
  add_bin_flags(cluster_cmd, cluster_args.bins);
  cluster_cmd->add_option("--normalize", cluster_args.normalize, "Feature scaling")
      ->default_val("zscore")
      ->check(CLI::IsMember({"zscore", "minmax", "none"}));
  cluster_cmd->add_option("--rows", cluster_args.rows, "Grid rows (0 = auto)")->default_val(0);
  cluster_cmd->add_option("--cols", cluster_args.cols, "Grid cols (0 = auto)")->default_val(0);
  cluster_cmd->add_option("--epochs", cluster_args.schedule.epochs, "Training epochs")
      ->default_val(50)
      ->check(CLI::PositiveNumber);
  cluster_cmd->add_option("--lr0", cluster_args.schedule.lr0, "Initial learning rate")
      ->default_val(0.5);
  cluster_cmd->add_option("--lr1", cluster_args.schedule.lr1, "Final learning rate")
      ->default_val(0.05);
  cluster_cmd->add_option("--sigma0", cluster_args.schedule.sigma0, "Initial neighborhood radius")
      ->default_val(3.0);
  cluster_cmd->add_option("--sigma1", cluster_args.schedule.sigma1, "Final neighborhood radius")
      ->default_val(0.5);
  cluster_cmd->add_option("--k", cluster_args.k, "Outlier threshold in std units")
      ->default_val(2.0);
  cluster_cmd->add_option("--seed", cluster_args.seed, "Deterministic run seed")->default_val(0);
  cluster_cmd->add_option("--out-dir", cluster_args.out_dir, "Output directory")->required();

  PredictArgs predict_args;
  auto* predict_cmd =
      app.add_subcommand("predict", "Score next-location models and build flow maps");
  add_predict_flags(predict_cmd, predict_args, true);

  EvaluateArgs evaluate_args;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Accuracy curves over training-history length");
  add_predict_flags(evaluate_cmd, evaluate_args.base, false);
  evaluate_cmd
      ->add_option("--probe-minutes", evaluate_args.probe_minutes,
                   "Training-history lengths to score")
      ->required()
      ->delimiter(',');

  RenderArgs render_args;
  auto* render_cmd = app.add_subcommand("render", "Render a JSON artifact to SVG");
  render_cmd->add_option("--kind", render_args.kind, "Artifact kind")
      ->required()
      ->check(CLI::IsMember({"umatrix", "heatmap", "flowmap", "timecube"}));
  render_cmd->add_option("--in", render_args.in, "Artifact JSON path")->required();
  render_cmd->add_option("--out", render_args.out, "SVG output path")->required();
  render_cmd->add_option("--width", render_args.spec.width, "Canvas width")->default_val(720);
  render_cmd->add_option("--height", render_args.spec.height, "Canvas height")->default_val(540);
  render_cmd->add_option("--margin", render_args.spec.margin, "Canvas margin")->default_val(48);
  render_cmd->add_option("--ramp", render_args.ramp, "Color ramp")
      ->default_val("sequential")
      ->check(CLI::IsMember({"sequential", "diverging"}));
  render_cmd->add_flag("--no-legend", render_args.no_legend, "Suppress the legend");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    synth_args.seed_given = seed_opt->count() > 0;
    predict_args.has_split_bin = predict_cmd->count("--split-bin") > 0;
    predict_args.has_split_time = predict_cmd->count("--split-time") > 0;
    evaluate_args.base.has_split_bin = evaluate_cmd->count("--split-bin") > 0;
    evaluate_args.base.has_split_time = evaluate_cmd->count("--split-time") > 0;

    if (synth_cmd->parsed()) return run_synth(synth_args);
    if (ingest_cmd->parsed()) return run_ingest(ingest_args);
    if (matrices_cmd->parsed()) return run_matrices(matrices_args);
    if (cluster_cmd->parsed()) return run_cluster(cluster_args);
    if (predict_cmd->parsed()) return run_predict(predict_args);
    if (evaluate_cmd->parsed()) return run_evaluate(evaluate_args);
    if (render_cmd->parsed()) return run_render(render_args);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
