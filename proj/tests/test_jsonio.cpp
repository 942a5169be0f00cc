#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "mobpat/fsio.hpp"
#include "mobpat/jsonio.hpp"

using namespace mobpat;
using namespace mobpat::jsonio;

namespace {

matrices::TimeOrientedMatrix small_tom() {
  matrices::TimeOrientedMatrix tom;
  tom.n_objects = 2;
  tom.binning.start = 1000;
  tom.binning.bin_seconds = 600;
  tom.binning.n_bins = 3;
  tom.cells = {1, 2, 0, 3, 3, 1};
  return tom;
}

ingest::LocationTree small_tree() {
  ingest::LocationTree tree;
  tree.add("gate a", "gate", std::nullopt, 0.0, 4.0);
  tree.add("gate b", "gate", std::nullopt, 3.0, 1.0);
  return tree;
}

}  // namespace

TEST_CASE("frequency and time-spent tables serialize with location headers") {
  matrices::VisitFrequencyMatrix freq(2, 3);
  freq.add(0, 1, 4);
  freq.add(1, 3, 2);
  CHECK(matrix_csv(freq, {"alice", "bob"}) ==
        "object,1,2,3\nalice,4,0,0\nbob,0,0,2\n");

  matrices::TimeSpentMatrix spent(1, 2);
  spent.add(0, 2, 1800.5);
  CHECK(matrix_csv(spent) == "object,1,2\n0,0,1800.5\n");
}

TEST_CASE("the time grid serializes to CSV with bin headers") {
  CHECK(tom_csv(small_tom(), {"a", "b"}) ==
        "object,bin0,bin1,bin2\na,1,2,0\nb,3,3,1\n");
}

TEST_CASE("U-values serialize as a bare grid") {
  som::UMatrix u;
  u.rows = 2;
  u.cols = 2;
  u.values = {0.0, 1.5, 2.0, 0.25};
  CHECK(umatrix_csv(u) == "0,1.5\n2,0.25\n");
}

TEST_CASE("accuracy curves list one row per model and probe") {
  predict::EvaluationReport report;
  predict::ModelEvaluation m;
  m.kind = predict::ModelKind::knn;
  m.probes = {{60, 1, 5, 0.5}, {120, 2, 9, 0.75}};
  report.models.push_back(m);
  CHECK(curves_csv(report) == "model,minutes,accuracy\nknn,60,0.500000\nknn,120,0.750000\n");
}

TEST_CASE("matrix envelopes read back for rendering") {
  matrices::TimeSpentMatrix spent(2, 2);
  spent.add(0, 1, 120.0);
  spent.add(1, 2, 45.5);
  const auto parsed = parse_matrix_json(matrix_json(spent, 0, 3600, {"a", "b"}));
  CHECK(parsed.kind == "time_spent");
  CHECK(parsed.objects == 2);
  CHECK(parsed.locations == 2);
  CHECK(parsed.data == std::vector<double>{120.0, 0.0, 0.0, 45.5});
  CHECK(parsed.names == std::vector<std::string>{"a", "b"});

  matrices::VisitFrequencyMatrix freq(1, 1);
  freq.add(0, 1, 3);
  CHECK(parse_matrix_json(matrix_json(freq, 0, 10)).kind == "frequency");
  CHECK_THROWS_AS(parse_matrix_json(tom_json(small_tom())), BadArtifactError);
}

TEST_CASE("the location tree CSV writer feeds the existing reader") {
  ingest::LocationTree tree;
  tree.add("park", "area");
  tree.add("gate,1", "gate", 1, 2.5, -1.0);
  const auto text = tree_csv(tree);
  CHECK(text == "name,category,parent,x,y\npark,area,,,\n\"gate,1\",gate,park,2.5,-1\n");
  const auto back = ingest::parse_location_tree_csv(text);
  CHECK(back == tree);
}

TEST_CASE("the time grid round-trips through its JSON envelope") {
  const auto tom = small_tom();
  const auto text = tom_json(tom, {"a", "b"});
  const auto back = parse_tom_json(text);
  CHECK(back.n_objects == tom.n_objects);
  CHECK(back.binning == tom.binning);
  CHECK(back.cells == tom.cells);
  CHECK_THROWS_AS(parse_tom_json("{}"), BadArtifactError);
  CHECK_THROWS_AS(parse_tom_json("not json"), BadArtifactError);
}

TEST_CASE("a trained grid round-trips with its schedule attached") {
  som::SomGrid grid;
  grid.rows = 2;
  grid.cols = 1;
  grid.dim = 2;
  grid.weights = {0.5, 1.5, -2.0, 0.125};
  som::TrainSchedule schedule;
  schedule.seed = 42;
  const auto text = grid_json(grid, schedule);
  CHECK(text.find("\"seed\": 42") != std::string::npos);
  const auto back = parse_grid_json(text);
  CHECK(back.rows == 2);
  CHECK(back.cols == 1);
  CHECK(back.dim == 2);
  CHECK(back.weights == grid.weights);

  CHECK_THROWS_AS(parse_grid_json("{\"rows\":1,\"cols\":1,\"dim\":3,\"weights\":[1]}"),
                  BadArtifactError);
}

TEST_CASE("the node map round-trips with hits and flags") {
  som::UMatrix u;
  u.rows = 1;
  u.cols = 2;
  u.values = {0.5, 3.0};
  som::ClusterAssignment assignment;
  assignment.hits = {3, 1};
  std::vector<som::OutstandingHit> flags = {{2, 0, 1, 3.0}};

  const auto text = umatrix_json(u, assignment, flags, {"r0", "r1", "o2"});
  som::UMatrix u2;
  som::ClusterAssignment a2;
  std::vector<som::OutstandingHit> f2;
  std::vector<std::string> names;
  parse_umatrix_json(text, u2, a2, f2, names);
  CHECK(u2.values == u.values);
  CHECK(a2.hits == assignment.hits);
  REQUIRE(f2.size() == 1);
  CHECK(f2[0].object == 2);
  CHECK(f2[0].u_value == doctest::Approx(3.0));
  CHECK(names[2] == "o2");
}

TEST_CASE("flow maps round-trip with their embedded locations") {
  predict::FlowMap flow;
  flow.n_locations = 2;
  flow.bin_t = 7;
  flow.label = "actual";
  flow.weights = {0.0, 4.0, 1.0, 0.0};

  const auto text = flow_json(flow, small_tree());
  predict::FlowMap back;
  ingest::LocationTree tree;
  parse_flow_json(text, back, tree);
  CHECK(back.label == "actual");
  CHECK(back.bin_t == 7);
  CHECK(back.weights == flow.weights);
  CHECK(tree.size() == 2);
  CHECK(tree.node(1).name == "gate a");
  CHECK(tree.node(2).x == doctest::Approx(3.0));

  CHECK_THROWS_AS(
      [] {
        predict::FlowMap f;
        ingest::LocationTree t;
        parse_flow_json("{\"label\":\"x\",\"bin_t\":0,\"n_locations\":1,\"locations\":[],"
                        "\"edges\":[{\"origin\":5,\"dest\":1,\"weight\":1}]}",
                        f, t);
      }(),
      BadArtifactError);
}

TEST_CASE("stay sequences round-trip for the space-time rendering") {
  const std::vector<matrices::StayInterval> stays = {{0, 1, 100, 200}, {0, 2, 200, 300}};
  const auto text = timecube_json(stays, small_tree(), 600, {"walker"});

  std::vector<matrices::StayInterval> back;
  ingest::LocationTree tree;
  std::vector<std::string> names;
  parse_timecube_json(text, back, tree, names);
  CHECK(back == stays);
  CHECK(tree.size() == 2);
  REQUIRE(names.size() == 1);
  CHECK(names[0] == "walker");
}

TEST_CASE("evaluation reports list models with probes and confusion rows") {
  predict::EvaluationReport report;
  report.target_bin = 5;
  report.n_classes = 2;
  report.n_objects = 3;
  predict::ModelEvaluation m;
  m.kind = predict::ModelKind::uniform;
  m.overall_accuracy = 1.0 / 3.0;
  m.probes = {{60, 1, 2, 1.0 / 3.0}};
  m.confusion = {1, 0, 2, 0};
  report.models.push_back(m);

  const auto text = report_json(report);
  CHECK(text.find("\"kind\": \"uniform\"") != std::string::npos);
  CHECK(text.find("\"target_bin\": 5") != std::string::npos);
  CHECK(text.find("\"confusion\"") != std::string::npos);
  CHECK(report_json(report) == text);
}

TEST_CASE("ground truth serializes objects in id order") {
  synth::GroundTruth truth;
  truth.base_epoch = 1000;
  truth.bin_seconds = 3600;
  truth.bins_per_day = 24;
  truth.markov = {{1.0, 0.0}, {0.5, 0.5}};
  truth.routes = {{2, 5, 0.1}};
  truth.objects["r0001"] = {"r0001", "regular", 0, 1, 3, 6, 4};

  const auto text = truth_json(truth);
  CHECK(text.find("\"class\": \"regular\"") != std::string::npos);
  CHECK(text.find("\"destination\": 5") != std::string::npos);
  CHECK(truth_json(truth) == text);
}

TEST_CASE("files write atomically and read back byte-for-byte") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "mobpat_fsio_test";
  fs::remove_all(dir);
  const auto path = (dir / "artifact.json").string();

  fsio::write_file(path, "{\"x\": 1}\n");
  CHECK(fsio::read_file(path) == "{\"x\": 1}\n");
  fsio::write_file(path, "second\n");
  CHECK(fsio::read_file(path) == "second\n");

  // the temp staging file never survives a successful write
  CHECK(!fs::exists(path + ".tmp"));
  CHECK_THROWS_AS(fsio::read_file((dir / "missing.json").string()), fsio::IoError);
  fs::remove_all(dir);
}

TEST_CASE("content digests match the reference FNV-1a vectors") {
  CHECK(fsio::digest_hex("") == "cbf29ce484222325");
  CHECK(fsio::digest_hex("a") == "af63dc4c8601ec8c");
  CHECK(fsio::digest_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("the diagnostic level follows the environment") {
  setenv("MOBPAT_LOG", "quiet", 1);
  CHECK(fsio::log_level() == fsio::LogLevel::quiet);
  setenv("MOBPAT_LOG", "debug", 1);
  CHECK(fsio::log_level() == fsio::LogLevel::debug);
  unsetenv("MOBPAT_LOG");
  CHECK(fsio::log_level() == fsio::LogLevel::info);
}
