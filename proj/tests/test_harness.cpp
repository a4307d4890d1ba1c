/*
 *
 * Copyright 2026 shedcep authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "shedcep/harness.hpp"
#include "shedcep/model_io.hpp"
#include "shedcep/stream_io.hpp"
#include "support/test_util.hpp"

using namespace shedcep;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = SHEDCEP_CONFIG_DIR;

ExperimentConfig small(std::vector<std::string> overrides = {}) {
  overrides.insert(overrides.begin(), {"training.events=5000", "evaluation.events=5000"});
  return load_experiment(kConfigs / "ds1_q1.json", overrides);
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / ("shedcep-harness-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(SHEDCEP_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void expect_config_error(const Json& doc, const std::string& needle) {
  try {
    parse_experiment(doc, kConfigs);
    ADD_FAILURE() << "accepted: " << doc.dump();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Config, OverridesParseJsonOrString) {
  Json doc = Json::object();
  apply_override(doc, "a.b.c=3");
  apply_override(doc, "a.flag=true");
  apply_override(doc, "name=hello world");
  apply_override(doc, "list=[1,2]");
  EXPECT_EQ(doc["a"]["b"]["c"], 3);
  EXPECT_EQ(doc["a"]["flag"], true);
  EXPECT_EQ(doc["name"], "hello world");
  EXPECT_EQ(doc["list"].size(), 2u);
  EXPECT_THROW(apply_override(doc, "novalue"), ConfigError);
}

TEST(Config, RejectsUnknownKeysWithTheirPath) {
  Json base = load_json_file(kConfigs / "ds1_q1.json");
  auto with = [&](const std::string& assignment) {
    Json d = base;
    apply_override(d, assignment);
    return d;
  };
  expect_config_error(with("shedder.bogus=1"), "shedder.bogus");
  expect_config_error(with("training.tree.depth=3"), "training.tree.depth");
  expect_config_error(with("colour=1"), "colour");
  expect_config_error(with("load.clock=\"sundial\""), "load.clock");
  expect_config_error(with("shedder.kind=\"magic\""), "magic");
  expect_config_error(with("training.train=false"), "training.model");
  expect_config_error(with("load.cost.per_type_ms.Z=3"), "per_type_ms.Z");
  expect_config_error(with("shedder.safety_fraction=0.4"), "safety_fraction");
  Json no_dataset = base;
  no_dataset.erase("dataset");
  expect_config_error(no_dataset, "dataset");
}

TEST(Config, ParsesDocumentedFields) {
  const auto cfg = small({"shedder.latency_bound_ms=500", "load.cost.per_type_ms={\"B\": 4}",
                          "engine.negation_kills_all=false", "load.clock=wall"});
  EXPECT_EQ(cfg.shedder.kind, ShedderKind::GspiceH);
  EXPECT_EQ(cfg.shedder.latency_bound, 0.5);
  EXPECT_EQ(cfg.cost.cost(0), 0.002);
  EXPECT_EQ(cfg.cost.cost(1), 0.004);
  EXPECT_FALSE(cfg.engine.negation_kills_all);
  EXPECT_EQ(cfg.clock, ClockMode::WallClock);
  EXPECT_EQ(cfg.training_events, 5000u);
  EXPECT_EQ(cfg.train.pane.length, 10u);
}

TEST(Config, TooFewEventsIsAnError) {
  const auto cfg = small({"dataset.count=100"});
  EXPECT_THROW(load_experiment_data(cfg), ConfigError);
}

TEST(GroundTruth, NegatedQueryEmptyAndRepeatable) {
  const StreamSchema schema({"R", "C", "X"}, {AttributeDecl{"ID", 0, 100, 1}});
  const auto ps = shedcep::testing::patterns_from(R"({"patterns": [{"id": "q", "window": {"size": 250, "slide": 10},
      "sequences": [{"elements": [{"type": "R"}, {"type": "C", "negated": true, "where": "C.ID = R.ID"},
                                  {"type": "X"}], "where": "R.ID = X.ID"}]}]})",
                                         schema);
  using shedcep::testing::make_event;
  const std::vector<Event> s = {make_event(0, 0, 0, {1}), make_event(1, 1, 1, {1}), make_event(2, 2, 2, {2}),
                                make_event(3, 3, 0, {3}), make_event(4, 4, 2, {3})};
  const auto g = ground_truth(ps, s);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].events, (std::vector<Seq>{3, 4}));
  EXPECT_TRUE(ground_truth(ps, {}).empty());
  EXPECT_EQ(ground_truth(ps, s), g);
}

TEST(Scoring, CountsAndPercentagesFromSets) {
  const StreamSchema schema({"A", "B"}, {});
  const auto ps = shedcep::testing::patterns_from(R"({"patterns": [
      {"id": "P", "weight": 2, "window": {"size": 10, "slide": 10}, "sequences": [{"elements": [{"type": "A"}]}]},
      {"id": "Q", "window": {"size": 10, "slide": 10}, "sequences": [{"elements": [{"type": "B"}]}]}]})",
                                         schema);
  auto ce = [](std::uint32_t p, WindowId w, std::vector<Seq> ev) { return ComplexEvent{p, w, std::move(ev), 1.0}; };
  const std::vector<ComplexEvent> truth = {ce(0, 0, {1}), ce(0, 0, {2}), ce(0, 1, {3}), ce(1, 0, {4})};
  const std::vector<ComplexEvent> detected = {ce(0, 0, {1}), ce(0, 1, {9}), ce(1, 0, {4})};
  const auto q = score_detections(ps, truth, detected);
  EXPECT_EQ(q[0].ground_truth, 3u);
  EXPECT_EQ(q[0].false_negatives, 2u);
  EXPECT_EQ(q[0].false_positives, 1u);
  EXPECT_NEAR(q[0].fn_percent(), 200.0 / 3.0, 1e-12);
  EXPECT_EQ(q[1].false_negatives, 0u);
  QoRReport r;
  r.patterns = q;
  EXPECT_EQ(r.weighted_objective(), 2.0 * 3);
}

TEST(Experiment, NoShedderAtFullRateIsExact) {
  const auto r = run_experiment(small({"shedder.kind=none", "load.rate_multiplier=1.0"}));
  EXPECT_GT(r.total_ground_truth(), 0u);
  EXPECT_EQ(r.total_false_negatives(), 0u);
  EXPECT_EQ(r.total_false_positives(), 0u);
  EXPECT_EQ(r.dropped, 0u);
  EXPECT_EQ(r.drop_ratio(), 0.0);
}

TEST(Experiment, NoDropsMeansNoErrors) {
  // A generous bound never trips the detector.
  const auto r = run_experiment(small({"shedder.latency_bound_ms=100000000"}));
  EXPECT_EQ(r.dropped, 0u);
  EXPECT_EQ(r.activations, 0u);
  EXPECT_EQ(r.total_false_negatives(), 0u);
  EXPECT_EQ(r.total_false_positives(), 0u);
}

TEST(Experiment, ShedderKeepsTheBound) {
  for (const char* kind : {"gspice-h", "gspice-t", "gspice-f", "espice", "bl"}) {
    const auto r = run_experiment(small({std::string("shedder.kind=") + kind}));
    EXPECT_EQ(r.violations, 0u) << kind;
    EXPECT_GT(r.dropped, 0u) << kind;
    EXPECT_LE(r.latency_max, r.latency_bound) << kind;
    EXPECT_EQ(r.shedder, kind);
  }
}

TEST(Experiment, LatencyAccountingWithoutShedding) {
  const auto r = run_experiment(small({"shedder.kind=none", "load.rate_multiplier=2.0"}));
  EXPECT_GT(r.violations, 0u);
  EXPECT_GT(r.latency_max, r.latency_p99);
  EXPECT_GE(r.latency_p99, r.latency_p50);
  EXPECT_GE(r.latency_p50, 0.002);
}

TEST(Experiment, ReportJsonRoundTripAndCsv) {
  const auto r = run_experiment(small());
  const auto back = QoRReport::from_json(Json::parse(r.to_json().dump()));
  EXPECT_EQ(back, r);
  EXPECT_EQ(back.to_json().dump(), r.to_json().dump());
  const auto csv = r.to_csv();
  EXPECT_EQ(csv.rfind("name,shedder,", 0), 0u);
  EXPECT_NE(csv.find(",ALL,,"), std::string::npos);
  EXPECT_NE(csv.find(",weighted_objective,"), std::string::npos);
  EXPECT_THROW(QoRReport::from_json(Json::parse(R"({"schema": "x"})")), ConfigError);
}

TEST(Experiment, CompareRules) {
  const auto a = run_experiment(small());
  const auto b = run_experiment(small({"shedder.kind=bl"}));
  const auto csv = compare_reports({a, a}, TableFormat::Csv);
  std::istringstream lines(csv);
  std::string header, row1, row2;
  std::getline(lines, header);
  std::getline(lines, row1);
  std::getline(lines, row2);
  EXPECT_EQ(row1, row2);
  const auto json = Json::parse(compare_reports({a, b}, TableFormat::Json));
  EXPECT_EQ(json["schema"], "shedcep-compare/1");
  EXPECT_EQ(json["rows"].size(), 2u);
  EXPECT_THROW(compare_reports({a}, TableFormat::Csv), ConfigError);
  const auto other = run_experiment(small({"queries=\"queries/q3.json\""}));
  EXPECT_THROW(compare_reports({a, other}, TableFormat::Csv), ConfigError);
}

TEST(Experiment, SavedModelReproducesTrainedRun) {
  const auto dir = scratch_dir();
  const auto cfg = small({"shedder.kind=gspice-f"});
  const auto data = load_experiment_data(cfg);
  const auto outcome = train_on_prefix(cfg, data);
  save_model(outcome.model, dir / "f.json");
  const auto trained = run_experiment(cfg);
  const auto loaded = run_experiment(small({"shedder.kind=gspice-f", "training.train=false",
                                            "training.model=\"" + (dir / "f.json").string() + "\""}));
  EXPECT_EQ(loaded.to_json().dump(), trained.to_json().dump());
  EXPECT_THROW(run_experiment(small({"training.train=false", "training.model=\"/nonexistent.json\""})),
               ConfigError);
  fs::remove_all(dir);
}

TEST(Experiment, StreamFileDataset) {
  const auto dir = scratch_dir();
  const auto synth = small();
  const auto events = generate_synthetic(*synth.synthetic);
  write_stream(dir / "s.csv", events, synth.synthetic->schema());
  Json doc = load_json_file(kConfigs / "ds1_q1.json");
  doc["dataset"] = {{"file", (dir / "s.csv").string()},
                    {"schema", {{"types", {"A", "B", "C"}},
                                {"attributes", {{{"name", "V1"}, {"min", 1}, {"max", 10}, {"bin_size", 1}}}}}}};
  doc["training"]["events"] = 5000;
  doc["evaluation"]["events"] = 5000;
  const auto from_file = run_experiment(parse_experiment(doc, kConfigs));
  const auto generated = run_experiment(synth);
  EXPECT_EQ(from_file.patterns, generated.patterns);
  EXPECT_EQ(from_file.dropped, generated.dropped);
  fs::remove_all(dir);
}

TEST(Experiment, RetrainingSwapsModelsAndKeepsTheBound) {
  const auto r = run_experiment(small({"training.retrain_interval=1000"}));
  EXPECT_EQ(r.violations, 0u);
  EXPECT_GT(r.dropped, 0u);
}

TEST(Experiment, WallClockModeRuns) {
  const auto r = run_experiment(small({"evaluation.events=1500", "load.clock=wall", "load.rate_multiplier=0.5",
                                       "load.cost.per_event_ms=0.5", "shedder.kind=none"}));
  EXPECT_EQ(r.clock, "wall");
  EXPECT_EQ(r.events, 1500u);
  EXPECT_EQ(r.total_false_negatives(), 0u);
}

TEST(Cli, ExitCodesAndDeterminism) {
  const auto dir = scratch_dir();
  const std::string cfg = (kConfigs / "ds1_q1.json").string();
  const std::string sz = " --set training.events=3000 --set evaluation.events=3000";
  const auto a = dir / "a.json", b = dir / "b.json", q3 = dir / "q3.json";
  EXPECT_EQ(cli("run -c " + cfg + sz + " --json " + a.string()), 0);
  EXPECT_EQ(cli("run -c " + cfg + sz + " --json " + b.string()), 0);
  EXPECT_EQ(read_file(a), read_file(b));
  EXPECT_EQ(cli("compare " + a.string() + " " + b.string()), 0);
  EXPECT_EQ(cli("run -c " + cfg + sz + " --set queries=queries/q3.json --json " + q3.string()), 0);
  EXPECT_EQ(cli("compare " + a.string() + " " + q3.string()), 2);
  EXPECT_EQ(cli("run -c " + cfg + sz + " --set shedder.bogus=1"), 2);
  EXPECT_EQ(cli("run -c " + cfg + sz + " --set shedder.kind=none --set load.rate_multiplier=2 --assert-lb"), 3);
  EXPECT_EQ(cli("run -c " + cfg + sz + " --assert-lb"), 0);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("run"), 2);
  EXPECT_EQ(cli("compare " + cfg + " " + a.string()), 2);

  const auto model = dir / "m.json", groups = dir / "g.csv", stream = dir / "s.csv";
  EXPECT_EQ(cli("train -c " + cfg + sz + " -m " + model.string() + " --groups " + groups.string()), 0);
  EXPECT_TRUE(fs::exists(model));
  EXPECT_NE(read_file(groups).find(",M,O,U"), std::string::npos);
  EXPECT_EQ(cli("inspect-model " + model.string()), 0);
  EXPECT_EQ(cli("generate -c " + cfg + sz + " -o " + stream.string()), 0);
  EXPECT_TRUE(fs::file_size(stream) > 0);
  fs::remove_all(dir);
}
