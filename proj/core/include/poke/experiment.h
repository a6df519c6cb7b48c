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

#ifndef POKE_EXPERIMENT_H_
#define POKE_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "poke/blob.h"
#include "poke/metrics.h"
#include "poke/planner.h"
#include "poke/trainer.h"

namespace poke {

inline constexpr std::string_view kJointModel = "joint";
inline constexpr std::string_view kInverseModel = "inverse";
inline constexpr std::string_view kBlobModel = "blob";

// One line of the experiment CSV: the state of one episode after k pokes.
struct MetricRow {
  std::string model;
  uint64_t train_size = 0;
  int episode = 0;
  uint64_t seed = 0;
  int k = 0;
  double rel_loc_err = 0.0;
  double pose_err_deg = 0.0;
  TerminalReason terminal_reason = TerminalReason::kMaxSteps;

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

struct ExperimentConfig {
  std::vector<uint64_t> sizes = {10000, 20000, 100000};
  std::vector<std::string> models = {"joint", "inverse", "blob"};
  int episodes = 200;
  uint64_t seed = 7;       // episode (init, goal) seeds derive from this
  uint64_t data_seed = 42;  // dataset generation seed
  double min_goal_distance = 8.0;
  std::filesystem::path work_dir = "poke_work";
  // Generate data and train missing checkpoints instead of failing.
  bool train_inline = false;
  TrainConfig train;
  PlannerConfig planner;
  BlobConfig blob;
  ArenaParams arena;
  int jobs = 1;

  void Validate() const;
};

// Where RunExperiment looks for artifacts of one cell.
std::filesystem::path DatasetPath(const ExperimentConfig& config,
                                  uint64_t size);
std::filesystem::path CheckpointPath(const ExperimentConfig& config,
                                     std::string_view model, uint64_t size);

// Deterministic (init, goal) pair of an episode; the goal center is at
// least min_goal_distance away from the initial center.
std::pair<Pose, Pose> EpisodePoses(const ExperimentConfig& config,
                                   int episode);
uint64_t EpisodeSeed(const ExperimentConfig& config, int episode);

// Metric rows of one finished episode, one per k in [0, max_pokes].
std::vector<MetricRow> EpisodeRows(const Episode& episode,
                                   std::string_view model, uint64_t train_size,
                                   int episode_id, uint64_t seed,
                                   int max_pokes);

// Train config used for a learned model tag ("inverse" forces lambda 0).
TrainConfig ModelTrainConfig(const ExperimentConfig& config,
                             std::string_view model);

// Loads the checkpoint of a cell, training it first when allowed.
ModelParams ObtainModel(const ExperimentConfig& config, std::string_view model,
                        uint64_t size,
                        const std::function<void(std::string_view)>& log = {});

using ProgressLog = std::function<void(std::string_view)>;

// Runs every (size, model, episode) cell. Rows are ordered by size, then
// model, then episode, then k.
std::vector<MetricRow> RunExperiment(const ExperimentConfig& config,
                                     const ProgressLog& log = {});

// CSV: optional '#' comment lines, then the header
//   model,train_size,episode,seed,k,rel_loc_err,pose_err_deg,terminal_reason
void WriteMetricsCsv(std::ostream& out, const std::vector<MetricRow>& rows,
                     const std::vector<std::string>& comments = {});
// Throws FormatError on a malformed file and on a file without rows.
std::vector<MetricRow> ReadMetricsCsv(std::istream& in);

struct CurvePoint {
  int k = 0;
  int n = 0;
  double mean_rel_loc_err = 0.0;
  std::optional<double> stderr_rel_loc_err;  // absent for n < 2
  double mean_pose_err = 0.0;
  std::optional<double> stderr_pose_err;
};

struct CellSummary {
  std::string model;
  uint64_t train_size = 0;
  int episodes = 0;
  std::vector<CurvePoint> curve;  // ascending k, only the k present
};

struct PairedComparison {
  uint64_t train_size = 0;
  std::string model_a;
  std::string model_b;
  int k = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  SignTestResult test;  // "win" = model_a has the lower error
};

struct ExperimentSummary {
  std::vector<CellSummary> cells;
  std::vector<PairedComparison> comparisons;

  const CellSummary* Find(std::string_view model, uint64_t size) const;
  const PairedComparison* FindComparison(std::string_view a, std::string_view b,
                                         uint64_t size) const;
};

// Mean +- standard error curves per (size, model) and paired sign tests of
// relative location error at `compare_k` pokes (joint vs inverse, and each
// learned model vs blob).
ExperimentSummary Summarize(const std::vector<MetricRow>& rows,
                            int compare_k = 5);

void WriteSummaryTable(std::ostream& out, const ExperimentSummary& summary);
// One TSV per cell: k, mean/stderr of both errors. Returns written paths.
std::vector<std::filesystem::path> WriteCurveFiles(
    const std::filesystem::path& dir, const ExperimentSummary& summary);

// "key = value" lines describing the configuration (for file headers).
std::vector<std::string> DescribeExperiment(const ExperimentConfig& config);

}  // namespace poke

#endif  // POKE_EXPERIMENT_H_
