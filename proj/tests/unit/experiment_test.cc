// Copyright 2026 The Poke Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "poke/experiment.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "poke/error.h"
#include "test_util.h"

namespace poke {
namespace {

using ::poke::testing::ReadBytes;
using ::poke::testing::TempDir;

ExperimentConfig BlobOnly(const std::filesystem::path& work) {
  ExperimentConfig c;
  c.sizes = {1000, 2000};
  c.models = {"blob"};
  c.episodes = 6;
  c.work_dir = work;
  return c;
}

// Learned cells trained for a handful of steps on a small dataset.
ExperimentConfig Tiny(const std::filesystem::path& work) {
  ExperimentConfig c;
  c.sizes = {300};
  c.models = {"joint", "inverse", "blob"};
  c.episodes = 4;
  c.work_dir = work;
  c.train_inline = true;
  c.train.epochs = 1;
  c.train.max_steps = 3;
  c.train.batch_size = 8;
  c.planner.max_pokes = 3;
  c.blob.max_pokes = 3;
  return c;
}

TEST(ExperimentTest, EpisodePosesArePairedAndSeparated) {
  ExperimentConfig c;
  std::set<std::pair<double, double>> seen;
  for (int e = 0; e < 200; ++e) {
    const auto [init, goal] = EpisodePoses(c, e);
    EXPECT_EQ(EpisodePoses(c, e), std::make_pair(init, goal));
    EXPECT_GE(std::hypot(goal.cx - init.cx, goal.cy - init.cy), c.min_goal_distance);
    EXPECT_TRUE(InBounds(init, c.arena));
    EXPECT_TRUE(InBounds(goal, c.arena));
    seen.insert({init.cx, goal.cx});
  }
  EXPECT_EQ(seen.size(), 200u);
}

TEST(ExperimentTest, RowsPerEpisodeStartAtOne) {
  Episode e;
  e.init = {10, 10, 0};
  e.goal = {30, 10, 0};
  e.steps.push_back({{10, 10, 0}, Poke{}, {20, 10, 0.5}});
  e.reason = TerminalReason::kNoPoke;
  const auto rows = EpisodeRows(e, "joint", 10000, 3, 99, 4);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].rel_loc_err, 1.0);
  EXPECT_EQ(rows[0].pose_err_deg, 0.0);
  EXPECT_DOUBLE_EQ(rows[1].rel_loc_err, 0.5);
  for (int k = 1; k <= 4; ++k) {
    EXPECT_EQ(rows[k].k, k);
    EXPECT_DOUBLE_EQ(rows[k].rel_loc_err, 0.5);
    EXPECT_NEAR(rows[k].pose_err_deg, 0.5 * 180 / std::numbers::pi, 1e-9);
    EXPECT_EQ(rows[k].terminal_reason, TerminalReason::kNoPoke);
    EXPECT_EQ(rows[k].episode, 3);
    EXPECT_EQ(rows[k].seed, 99u);
  }
}

TEST(ExperimentTest, BlobRowsIdenticalAcrossSizes) {
  TempDir dir;
  const ExperimentConfig c = BlobOnly(dir.path());
  const auto rows = RunExperiment(c);
  const size_t per_size = 6 * 11;
  ASSERT_EQ(rows.size(), 2 * per_size);
  for (size_t i = 0; i < per_size; ++i) {
    MetricRow a = rows[i], b = rows[per_size + i];
    EXPECT_EQ(a.train_size, 1000u);
    EXPECT_EQ(b.train_size, 2000u);
    b.train_size = a.train_size;
    EXPECT_EQ(a, b);
  }
  for (const MetricRow& r : rows) {
    if (r.k == 0) EXPECT_EQ(r.rel_loc_err, 1.0);
    EXPECT_GE(r.pose_err_deg, 0.0);
    EXPECT_LE(r.pose_err_deg, 90.0);
  }
}

TEST(ExperimentTest, MissingCheckpointIsAnError) {
  TempDir dir;
  ExperimentConfig c = BlobOnly(dir.path());
  c.models = {"joint"};
  EXPECT_THROW(RunExperiment(c), IoError);
}

TEST(ExperimentTest, InlineTrainingIsReproducible) {
  TempDir dir;
  ExperimentConfig c = Tiny(dir / "a");
  const auto rows = RunExperiment(c);
  EXPECT_EQ(rows.size(), 3u * 4 * 4);
  EXPECT_TRUE(std::filesystem::exists(CheckpointPath(c, "joint", 300)));
  EXPECT_TRUE(std::filesystem::exists(CheckpointPath(c, "inverse", 300)));
  EXPECT_TRUE(std::filesystem::exists(DatasetPath(c, 300)));
  const Checkpoint inv = LoadCheckpoint(CheckpointPath(c, "inverse", 300));
  EXPECT_EQ(std::stod(inv.metadata.at("lambda")), 0.0);
  EXPECT_EQ(ModelTrainConfig(c, "inverse").lambda, 0.0);
  EXPECT_EQ(ModelTrainConfig(c, "joint").lambda, 0.1);

  // Cached checkpoints give the same rows; so does a fresh directory.
  EXPECT_EQ(RunExperiment(c), rows);
  c.work_dir = dir / "b";
  EXPECT_EQ(RunExperiment(c), rows);
  EXPECT_EQ(ReadBytes(CheckpointPath(c, "joint", 300)),
            ReadBytes(CheckpointPath(Tiny(dir / "a"), "joint", 300)));
  EXPECT_EQ(ReadBytes(DatasetPath(c, 300)), ReadBytes(DatasetPath(Tiny(dir / "a"), 300)));

  // Bit-identical CSVs at a fixed worker count.
  c.jobs = 3;
  c.work_dir = dir / "c";
  std::ostringstream a, b;
  WriteMetricsCsv(a, RunExperiment(c));
  c.work_dir = dir / "d";
  WriteMetricsCsv(b, RunExperiment(c));
  EXPECT_EQ(a.str(), b.str());
}

TEST(MetricsCsvTest, RoundTrip) {
  std::vector<MetricRow> rows{{"joint", 10000, 0, 123, 0, 1.0, 12.5, TerminalReason::kNoPoke},
                              {"blob", 20000, 7, 5, 3, 0.1234567890123456789, 89.99,
                               TerminalReason::kThreshold}};
  std::stringstream ss;
  WriteMetricsCsv(ss, rows, {"config a = 1"});
  EXPECT_EQ(ss.str().substr(0, 15), "# config a = 1\n");
  EXPECT_EQ(ReadMetricsCsv(ss), rows);
}

TEST(MetricsCsvTest, MalformedFiles) {
  std::istringstream empty("");
  EXPECT_THROW(ReadMetricsCsv(empty), FormatError);
  std::istringstream header_only(
      "model,train_size,episode,seed,k,rel_loc_err,pose_err_deg,terminal_reason\n");
  EXPECT_THROW(ReadMetricsCsv(header_only), FormatError);
  std::istringstream bad_header("a,b\n");
  EXPECT_THROW(ReadMetricsCsv(bad_header), FormatError);
  std::istringstream short_row(
      "model,train_size,episode,seed,k,rel_loc_err,pose_err_deg,terminal_reason\n"
      "joint,1,2,3,4,0.5\n");
  EXPECT_THROW(ReadMetricsCsv(short_row), FormatError);
  std::istringstream bad_number(
      "model,train_size,episode,seed,k,rel_loc_err,pose_err_deg,terminal_reason\n"
      "joint,1,2,3,4,abc,1,no-poke\n");
  EXPECT_THROW(ReadMetricsCsv(bad_number), FormatError);
}

TEST(SummaryTest, HandComputedFixture) {
  std::istringstream csv(
      "model,train_size,episode,seed,k,rel_loc_err,pose_err_deg,terminal_reason\n"
      "joint,10000,0,1,1,0.2,10,no-poke\n"
      "joint,10000,1,2,1,0.4,20,no-poke\n"
      "joint,10000,2,3,1,0.9,60,max-steps\n");
  const ExperimentSummary s = Summarize(ReadMetricsCsv(csv), 1);
  const CellSummary* cell = s.Find("joint", 10000);
  ASSERT_NE(cell, nullptr);
  EXPECT_EQ(cell->episodes, 3);
  ASSERT_EQ(cell->curve.size(), 1u);
  const CurvePoint& p = cell->curve[0];
  EXPECT_EQ(p.k, 1);
  EXPECT_EQ(p.n, 3);
  EXPECT_NEAR(p.mean_rel_loc_err, 0.5, 1e-12);
  EXPECT_NEAR(p.mean_pose_err, 30.0, 1e-12);
  // Sample variances: 0.13 and 700.
  EXPECT_NEAR(*p.stderr_rel_loc_err, std::sqrt(0.13 / 3), 1e-12);
  EXPECT_NEAR(*p.stderr_pose_err, std::sqrt(700.0 / 3), 1e-12);
}

TEST(SummaryTest, SingleRowHasNoStandardError) {
  std::istringstream csv(
      "model,train_size,episode,seed,k,rel_loc_err,pose_err_deg,terminal_reason\n"
      "inverse,20000,0,1,0,1,5,no-poke\n");
  const ExperimentSummary s = Summarize(ReadMetricsCsv(csv));
  const CurvePoint& p = s.Find("inverse", 20000)->curve[0];
  EXPECT_EQ(p.n, 1);
  EXPECT_FALSE(p.stderr_rel_loc_err.has_value());
  EXPECT_FALSE(p.stderr_pose_err.has_value());
  std::ostringstream table;
  WriteSummaryTable(table, s);
  EXPECT_NE(table.str().find("inverse"), std::string::npos);
}

TEST(SummaryTest, PairedComparisons) {
  std::vector<MetricRow> rows;
  for (int e = 0; e < 10; ++e) {
    for (const char* m : {"joint", "inverse", "blob"}) {
      const double err = std::string(m) == "joint" ? 0.1 : (std::string(m) == "inverse" ? 0.3 : 0.2);
      rows.push_back({m, 10000, e, 0, 0, 1.0, 0, TerminalReason::kMaxSteps});
      rows.push_back({m, 10000, e, 0, 5, err + 0.001 * e, 0, TerminalReason::kMaxSteps});
    }
  }
  const ExperimentSummary s = Summarize(rows, 5);
  const PairedComparison* c = s.FindComparison("joint", "inverse", 10000);
  ASSERT_NE(c, nullptr);
  EXPECT_EQ(c->test.wins, 10);
  EXPECT_NEAR(c->test.p_value, 2.0 / 1024, 1e-15);
  EXPECT_NEAR(c->mean_a, 0.1045, 1e-12);
  EXPECT_NEAR(c->mean_b, 0.3045, 1e-12);
  EXPECT_EQ(s.FindComparison("inverse", "blob", 10000)->test.losses, 10);
  EXPECT_EQ(s.FindComparison("joint", "blob", 20000), nullptr);
}

TEST(SummaryTest, CurveFiles) {
  TempDir dir;
  std::istringstream csv(
      "model,train_size,episode,seed,k,rel_loc_err,pose_err_deg,terminal_reason\n"
      "blob,5,0,1,0,1,5,threshold\n");
  const auto paths = WriteCurveFiles(dir.path(), Summarize(ReadMetricsCsv(csv)));
  ASSERT_EQ(paths.size(), 1u);
  std::ifstream in(paths[0]);
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(line, "0\t1\tnan\t5\tnan");
}

TEST(ExperimentConfigTest, Validation) {
  ExperimentConfig c;
  c.models = {"oracle"};
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = ExperimentConfig{};
  c.sizes = {};
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = ExperimentConfig{};
  c.episodes = 0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
}

}  // namespace
}  // namespace poke
