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


// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. All thresholds are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "cli.h"
#include "poke/blob.h"
#include "poke/datastore.h"
#include "poke/experiment.h"
#include "poke/gradcheck_suite.h"
#include "poke/metrics.h"
#include "poke/model.h"
#include "poke/planner.h"
#include "poke/rng.h"
#include "poke/sim2d.h"
#include "poke/trainer.h"

namespace poke {
namespace {

namespace fs = std::filesystem;

// Training protocol shared by every learned cell.
constexpr int kEpochs = 60;

// Criterion 1.
constexpr double kGradTolerance = 1e-4;
constexpr double kGradSeconds = 60.0;
// Criterion 2.
constexpr double kAdditivityTolerance = 1e-10;
constexpr int kAdditivitySamples = 100;
// Criterion 3.
constexpr uint64_t kSanitySize = 20000;
constexpr double kLocChanceMultiple = 5.0;
constexpr double kAngleChanceMultiple = 3.0;
constexpr double kLenChanceMultiple = 2.0;
constexpr double kSanitySeconds = 60.0 * 60;
// Criterion 4.
constexpr uint64_t kSmallSize = 10000;
constexpr uint64_t kMediumSize = 20000;
constexpr uint64_t kLargeSize = 50000;
constexpr int kEpisodes = 200;
constexpr int kCompareK = 5;
constexpr double kAlpha = 0.05;
constexpr double kSuiteSeconds = 4 * 3600.0;
constexpr int kSmokeEpisodes = 50;
constexpr double kSmokeSeconds = 15 * 60.0;
// Criterion 5.
constexpr int kCollapseSteps = 2000;
constexpr double kCollapsedRatio = 0.01;
constexpr double kHealthyRatio = 0.10;
constexpr int kCollapseProbe = 256;
constexpr int kCollapseEvery = 100;
// Criterion 6.
constexpr int kBlobEpisodes = 200;
constexpr double kBlobSuccessError = 0.2;
constexpr double kBlobSuccessRate = 0.9;
// Criterion 7.
constexpr int kMaxPokes = 10;
// Planner direction check.
constexpr int kDirectionEpisodes = 100;
constexpr double kDirectionShift = 20.0;
constexpr double kDirectionRate = 0.8;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Report {
 public:
  void Detail(const std::string& line) { fmt::print("    {}\n", line); }

  void Verdict(const std::string& id, bool pass, const std::string& what) {
    fmt::print("{} [{}] {}\n", pass ? "PASS" : "FAIL", id, what);
    std::fflush(stdout);
    if (!pass) ++failures_;
  }

  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

ExperimentConfig BaseExperiment(const fs::path& work_dir) {
  ExperimentConfig c;
  c.work_dir = work_dir;
  c.train_inline = true;
  c.train.epochs = kEpochs;
  c.episodes = kEpisodes;
  c.planner.max_pokes = kMaxPokes;
  c.blob.max_pokes = kMaxPokes;
  return c;
}

ProgressLog Progress() {
  return [](std::string_view line) {
    fmt::print(stderr, "{}\n", line);
  };
}

// --- 1 ---------------------------------------------------------------------

void GradientCorrectness(Report& report) {
  const auto start = Clock::now();
  const auto reports = RunGradCheckSuite();
  const double elapsed = Seconds(start);
  const double worst = MaxRelativeError(reports);
  for (const auto& r : reports) {
    report.Detail(fmt::format("{:<34} max rel {:.3e}  ({} entries, {} skipped)",
                              r.name, r.result.max_rel_error,
                              r.result.entries_checked, r.result.entries_skipped));
  }
  std::ostringstream out, err;
  const int exit_code = cli::RunCli({"poke", "gradcheck"}, out, err);
  report.Verdict("1", worst < kGradTolerance && elapsed < kGradSeconds && exit_code == 0,
                 fmt::format("gradient check: max rel error {:.3e} (< {:g}), "
                             "{:.1f} s (< {:g} s), cli exit {}",
                             worst, kGradTolerance, elapsed, kGradSeconds,
                             exit_code));
}

// --- 2 ---------------------------------------------------------------------

std::vector<InteractionRecord> RandomRecords(int n, uint64_t seed,
                                             const ArenaParams& arena) {
  Rng rng(seed);
  std::vector<InteractionRecord> records(n);
  for (auto& r : records) {
    r.pose_t = RandomPose(arena, rng);
    r.poke = SampleRandomPoke(r.pose_t, arena, rng);
    r.pose_t1 = Step(r.pose_t, r.poke, arena);
  }
  return records;
}

std::vector<std::string> DataLines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  return lines;
}

void LossStructure(Report& report, const fs::path& work) {
  const ArenaParams arena;
  ModelParams params = ModelParams::Initialize(arena.arena_size, 21);
  Rng rng(22);
  for (LayerParams* layer : params.Layers()) {
    for (double& b : layer->biases.values()) b = rng.Uniform(-0.05, 0.05);
  }
  const Batch batch = MakeBatch(RandomRecords(kAdditivitySamples, 23, arena), arena);
  const LossBreakdown joint = JointLossValue(batch, params, {0.1, 1.0, true});
  const LossBreakdown zero = JointLossValue(batch, params, {0.0, 1.0, true});
  const double lhs = joint.total - zero.total;
  const double rhs = 0.1 * joint.forward;
  const double rel = std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));

  ExperimentConfig cfg;
  const LossConfig inv = ModelTrainConfig(cfg, kInverseModel).loss();
  const bool inverse_config_matches =
      JointLossValue(batch, params, inv).total == zero.total;

  // The inverse command must train exactly like a joint model at lambda 0.
  fs::create_directories(work);
  const std::string data = (work / "structure.pokd").string();
  std::ostringstream out, err;
  bool cli_ok = cli::RunCli({"poke", "gen", "--n", "600", "--seed", "5", "--out", data},
                            out, err) == 0;
  const std::string inv_ckpt = (work / "inverse.pokm").string();
  const std::string zero_ckpt = (work / "lambda0.pokm").string();
  cli_ok = cli_ok &&
           cli::RunCli({"poke", "train", "--data", data, "--model", "inverse",
                        "--epochs", "2", "--out", inv_ckpt, "--log",
                        inv_ckpt + ".csv"},
                       out, err) == 0 &&
           cli::RunCli({"poke", "train", "--data", data, "--model", "joint",
                        "--lambda", "0", "--epochs", "2", "--out", zero_ckpt,
                        "--log", zero_ckpt + ".csv"},
                       out, err) == 0;
  bool logs_equal = false;
  bool weights_equal = false;
  if (cli_ok) {
    const auto a = DataLines(ReadFile(inv_ckpt + ".csv"));
    const auto b = DataLines(ReadFile(zero_ckpt + ".csv"));
    logs_equal = a.size() == 3 && a == b;
    const ModelParams pa = ModelParams::FromCheckpoint(LoadCheckpoint(inv_ckpt));
    const ModelParams pb = ModelParams::FromCheckpoint(LoadCheckpoint(zero_ckpt));
    weights_equal = true;
    const auto la = pa.Layers();
    const auto lb = pb.Layers();
    for (size_t i = 0; i < la.size(); ++i) {
      weights_equal = weights_equal &&
                      std::ranges::equal(la[i]->weights.values(), lb[i]->weights.values()) &&
                      std::ranges::equal(la[i]->biases.values(), lb[i]->biases.values());
    }
  }
  report.Detail(fmt::format("L(0.1) - L(0) = {:.17g}, 0.1 L_fwd = {:.17g}", lhs, rhs));
  report.Verdict("2",
                 rel <= kAdditivityTolerance && inverse_config_matches && cli_ok &&
                     logs_equal && weights_equal,
                 fmt::format("loss structure: additivity rel {:.2e} (<= {:g}) over {} "
                             "samples; inverse == lambda 0: loss {}, training log {}, "
                             "weights {}",
                             rel, kAdditivityTolerance, kAdditivitySamples,
                             inverse_config_matches ? "yes" : "no",
                             logs_equal ? "identical" : "differs",
                             weights_equal ? "identical" : "differ"));
}

// --- 3 ---------------------------------------------------------------------

double LearningSanity(Report& report, const ExperimentConfig& cfg) {
  const auto start = Clock::now();
  const ModelParams params = ObtainModel(cfg, kInverseModel, kSanitySize, Progress());
  const double elapsed = Seconds(start);

  const DatasetReader dataset(DatasetPath(cfg, kSanitySize));
  std::vector<InteractionRecord> heldout;
  for (uint64_t i = 0; i < dataset.size(); ++i) {
    if (IsHeldOut(i)) heldout.push_back(dataset.Read(i));
  }
  const HeldOutMetrics m = Evaluate(heldout, cfg.arena, params,
                                    ModelTrainConfig(cfg, kInverseModel).loss());
  const double loc_min = kLocChanceMultiple / kLocationBins;
  const double ang_min = kAngleChanceMultiple / kAngleBins;
  const double len_min = kLenChanceMultiple / kLengthBins;
  report.Verdict(
      "3",
      m.loc_acc >= loc_min && m.angle_acc >= ang_min && m.len_acc >= len_min &&
          elapsed <= kSanitySeconds,
      fmt::format("inverse model on {} samples, {} held out: top-1 loc {:.4f} "
                  "(>= {:.4f}), angle {:.4f} (>= {:.4f}), length {:.4f} (>= {:.4f}); "
                  "{:.0f} s (<= {:g} s)",
                  kSanitySize, heldout.size(), m.loc_acc, loc_min, m.angle_acc,
                  ang_min, m.len_acc, len_min, elapsed, kSanitySeconds));
  return elapsed;
}

// --- 4 ---------------------------------------------------------------------

std::vector<MetricRow> DirectionalReproduction(Report& report,
                                               const ExperimentConfig& cfg,
                                               double prior_seconds,
                                               const fs::path& smoke_dir) {
  const auto start = Clock::now();
  const std::vector<MetricRow> rows = RunExperiment(cfg, Progress());
  const double elapsed = Seconds(start) + prior_seconds;
  const ExperimentSummary summary = Summarize(rows, kCompareK);
  {
    std::ofstream csv(cfg.work_dir / "metrics.csv");
    WriteMetricsCsv(csv, rows, DescribeExperiment(cfg));
    std::ofstream table(cfg.work_dir / "summary.txt");
    WriteSummaryTable(table, summary);
  }

  bool pass = elapsed <= kSuiteSeconds;
  for (uint64_t size : cfg.sizes) {
    const PairedComparison* c =
        summary.FindComparison(kJointModel, kInverseModel, size);
    if (c == nullptr) {
      pass = false;
      continue;
    }
    const bool significant = c->test.p_value < kAlpha;
    const bool joint_better = c->mean_a < c->mean_b && c->test.wins > c->test.losses;
    const bool ok = size == kLargeSize ? !significant : joint_better && significant;
    pass = pass && ok;
    report.Detail(fmt::format(
        "{:>6}: joint {:.4f} vs inverse {:.4f} at k={}; wins {} losses {} ties {}; "
        "p = {:.3g}; want {} -> {}",
        size, c->mean_a, c->mean_b, kCompareK, c->test.wins, c->test.losses,
        c->test.ties, c->test.p_value,
        size == kLargeSize ? "parity (p >= 0.05)" : "joint lower, p < 0.05",
        ok ? "ok" : "not met"));
  }

  ExperimentConfig smoke = cfg;
  smoke.work_dir = smoke_dir;
  smoke.sizes = {2000, 5000};
  smoke.episodes = kSmokeEpisodes;
  const auto smoke_start = Clock::now();
  std::vector<MetricRow> smoke_rows = RunExperiment(smoke, Progress());
  const double smoke_elapsed = Seconds(smoke_start);
  const bool smoke_ok = smoke_elapsed <= kSmokeSeconds &&
                        smoke_rows.size() == 2 * 3 * kSmokeEpisodes * (kMaxPokes + 1);
  report.Detail(fmt::format("smoke (2K/5K, {} episodes): {:.0f} s (<= {:g} s)",
                            kSmokeEpisodes, smoke_elapsed, kSmokeSeconds));
  report.Verdict("4", pass && smoke_ok,
                 fmt::format("joint vs inverse paired sign test over {} episodes; "
                             "suite {:.0f} s (<= {:g} s); smoke {}",
                             cfg.episodes, elapsed, kSuiteSeconds,
                             smoke_ok ? "ok" : "not met"));
  std::vector<MetricRow> all = rows;
  all.insert(all.end(), smoke_rows.begin(), smoke_rows.end());
  return all;
}

// --- 5 ---------------------------------------------------------------------

struct NormTrace {
  double lowest = 1.0;  // minimum of mean latent norm / initial value
  double last = 1.0;
};

NormTrace TraceLatentNorm(const std::vector<InteractionRecord>& train,
                          const std::vector<InteractionRecord>& probe,
                          const ArenaParams& arena, const TrainConfig& config) {
  Trainer trainer(ModelParams::Initialize(arena.arena_size, config.seed), config);
  const double initial = MeanLatentNorm(probe, arena, trainer.params());
  NormTrace trace;
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(config.seed);
  std::vector<InteractionRecord> batch(config.batch_size);
  size_t cursor = order.size();
  for (int step = 1; step <= kCollapseSteps; ++step) {
    if (cursor + config.batch_size > order.size()) {
      for (size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng.UniformInt(i + 1)]);
      }
      cursor = 0;
    }
    for (int b = 0; b < config.batch_size; ++b) batch[b] = train[order[cursor++]];
    trainer.Step(batch, arena);
    if (step % kCollapseEvery == 0) {
      trace.last = MeanLatentNorm(probe, arena, trainer.params()) / initial;
      trace.lowest = std::min(trace.lowest, trace.last);
    }
  }
  return trace;
}

void FeatureCollapse(Report& report, const fs::path& work) {
  const ArenaParams arena;
  fs::create_directories(work);
  const fs::path path = work / "collapse.pokd";
  GenerateDataset(kSmallSize, 77, arena, path);
  const DatasetReader dataset(path);
  std::vector<InteractionRecord> train, probe;
  for (uint64_t i = 0; i < dataset.size(); ++i) {
    (IsHeldOut(i) ? probe : train).push_back(dataset.Read(i));
  }
  probe.resize(kCollapseProbe);

  TrainConfig forward_only;
  forward_only.inverse_weight = 0.0;
  forward_only.detach_target = false;
  const NormTrace fwd = TraceLatentNorm(train, probe, arena, forward_only);
  const NormTrace joint = TraceLatentNorm(train, probe, arena, TrainConfig{});
  report.Detail(fmt::format("forward only, undetached: min ratio {:.4f}, final {:.4f}",
                            fwd.lowest, fwd.last));
  report.Detail(fmt::format("default joint: min ratio {:.4f}, final {:.4f}",
                            joint.lowest, joint.last));
  report.Verdict("5", fwd.lowest < kCollapsedRatio && joint.lowest > kHealthyRatio,
                 fmt::format("latent norm / initial over {} steps: forward-only min "
                             "{:.4f} (< {:g}), joint min {:.4f} (> {:g})",
                             kCollapseSteps, fwd.lowest, kCollapsedRatio, joint.lowest,
                             kHealthyRatio));
}

// --- 6 ---------------------------------------------------------------------

std::vector<Episode> BaselineCompetence(Report& report, const ExperimentConfig& cfg) {
  int successes = 0;
  int pose_improved = 0;
  std::vector<Episode> episodes;
  for (int e = 0; e < kBlobEpisodes; ++e) {
    const auto [init, goal] = EpisodePoses(cfg, e);
    Episode ep = RunBlobEpisode(init, goal, cfg.arena, cfg.blob);
    const Pose last = ep.PoseAfter(kMaxPokes);
    if (RelativeLocationError(last, goal, init) < kBlobSuccessError) ++successes;
    if (PoseErrorDegrees(last, goal) < PoseErrorDegrees(init, goal)) ++pose_improved;
    episodes.push_back(std::move(ep));
  }
  const double rate = static_cast<double>(successes) / kBlobEpisodes;
  report.Detail(fmt::format("pose error improved in {} of {} (not required)",
                            pose_improved, kBlobEpisodes));
  report.Verdict("6", rate >= kBlobSuccessRate,
                 fmt::format("blob baseline: {} of {} episodes end with relative "
                             "location error < {:g} ({:.3f} >= {:g})",
                             successes, kBlobEpisodes, kBlobSuccessError, rate,
                             kBlobSuccessRate));
  return episodes;
}

// --- 7 ---------------------------------------------------------------------

void Invariants(Report& report, const std::vector<MetricRow>& rows,
                std::vector<Episode> episodes, const ExperimentConfig& cfg,
                const fs::path& work) {
  // Learned-planner episodes on top of the blob ones.
  const ModelParams joint = ObtainModel(cfg, kJointModel, kSmallSize);
  for (int e = 0; e < cfg.episodes; ++e) {
    const auto [init, goal] = EpisodePoses(cfg, e);
    episodes.push_back(RunEpisode(init, goal, joint, cfg.arena, cfg.planner));
  }
  size_t too_long = 0;
  for (const Episode& ep : episodes) too_long += ep.steps.size() > kMaxPokes;

  size_t bad_k0 = 0, bad_pose = 0, bad_k = 0;
  for (const MetricRow& r : rows) {
    if (r.k == 0 && r.rel_loc_err != 1.0) ++bad_k0;
    if (!(r.pose_err_deg >= 0.0 && r.pose_err_deg <= 90.0)) ++bad_pose;
    if (r.k < 0 || r.k > kMaxPokes) ++bad_k;
  }

  // Dataset roundtrip: read everything and write it back.
  fs::create_directories(work);
  const fs::path original = work / "roundtrip_a.pokd";
  const fs::path copy = work / "roundtrip_b.pokd";
  GenerateDataset(5000, 99, ArenaParams{.noise_std = 0.5}, original);
  const DatasetReader reader(original);
  {
    DatasetWriter writer(copy, reader.header().params, reader.header().seed);
    for (const auto& r : reader.ReadAll()) writer.Append(r);
  }
  const bool roundtrip = ReadFile(original) == ReadFile(copy) &&
                         DatasetReader(copy).ReadAll() == reader.ReadAll();

  // Two independent runs of one small experiment.
  auto run = [&](const std::string& name) {
    ExperimentConfig c = BaseExperiment(work / name);
    c.sizes = {1000};
    c.episodes = 20;
    c.train.epochs = 2;
    std::ostringstream csv;
    WriteMetricsCsv(csv, RunExperiment(c), DescribeExperiment(c));
    return std::vector<std::string>{
        csv.str(), ReadFile(DatasetPath(c, 1000)),
        ReadFile(CheckpointPath(c, kJointModel, 1000)),
        ReadFile(CheckpointPath(c, kInverseModel, 1000))};
  };
  const auto first = run("repeat_a");
  const auto second = run("repeat_b");
  const bool identical = first == second;

  report.Detail(fmt::format("{} episodes over {} pokes; {} rows: {} with k=0 error != 1, "
                            "{} with pose error outside [0, 90], {} with k outside [0, {}]",
                            too_long, kMaxPokes, rows.size(), bad_k0, bad_pose, bad_k,
                            kMaxPokes));
  report.Verdict("7",
                 too_long == 0 && bad_k0 == 0 && bad_pose == 0 && bad_k == 0 &&
                     !rows.empty() && roundtrip && identical,
                 fmt::format("invariants: {} episodes within {} pokes, {} CSV rows "
                             "checked, dataset roundtrip {}, repeated runs {}",
                             episodes.size(), kMaxPokes, rows.size(),
                             roundtrip ? "identity" : "differs",
                             identical ? "bit-identical" : "differ"));
}

// --- planner direction -------------------------------------------------------

void PlannerDirection(Report& report, const ExperimentConfig& cfg) {
  const ModelParams model = ObtainModel(cfg, kJointModel, kMediumSize);
  Rng rng(1234);
  int positive = 0;
  for (int e = 0; e < kDirectionEpisodes; ++e) {
    Pose init, goal;
    do {
      init = RandomPose(cfg.arena, rng);
      goal = {init.cx + kDirectionShift, init.cy, init.theta};
    } while (!InBounds(goal, cfg.arena));
    const Poke poke =
        PlanNextPoke(Render(init, cfg.arena), Render(goal, cfg.arena), model, cfg.arena);
    if (!poke.is_nopoke && MotionDirection(poke).x > 0.0) ++positive;
  }
  const double rate = static_cast<double>(positive) / kDirectionEpisodes;
  report.Verdict("planner", rate >= kDirectionRate,
                 fmt::format("goal {:g} px to the right: first poke moves +x in {} of "
                             "{} episodes ({:.2f} >= {:g})",
                             kDirectionShift, positive, kDirectionEpisodes, rate,
                             kDirectionRate));
}

}  // namespace
}  // namespace poke

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  using namespace poke;

  CLI::App app("acceptance run");
  std::string work = "acceptance_work";
  std::vector<std::string> only;
  app.add_option("--work-dir", work, "scratch directory (cleared first)");
  app.add_option("--only", only, "subset of 1,2,5,6 to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const fs::path root = fs::absolute(work);
  fs::remove_all(root);
  fs::create_directories(root);
  const auto start = Clock::now();
  Report report;
  auto wants = [&](const std::string& id) {
    return only.empty() || std::find(only.begin(), only.end(), id) != only.end();
  };
  // An exception fails its criterion without stopping the run.
  auto guarded = [&](const std::string& id, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      report.Verdict(id, false, fmt::format("error: {}", e.what()));
    }
  };

  if (wants("1")) guarded("1", [&] { GradientCorrectness(report); });
  if (wants("2")) guarded("2", [&] { LossStructure(report, root / "structure"); });
  ExperimentConfig cfg = BaseExperiment(root / "experiment");
  cfg.sizes = {kSmallSize, kMediumSize, kLargeSize};
  std::vector<MetricRow> rows;
  if (only.empty()) {
    double sanity_seconds = 0.0;
    guarded("3", [&] { sanity_seconds = LearningSanity(report, cfg); });
    guarded("4", [&] {
      rows = DirectionalReproduction(report, cfg, sanity_seconds, root / "smoke");
    });
  }
  if (wants("5")) guarded("5", [&] { FeatureCollapse(report, root / "collapse"); });
  std::vector<Episode> blob_episodes;
  if (wants("6")) guarded("6", [&] { blob_episodes = BaselineCompetence(report, cfg); });
  if (only.empty()) {
    guarded("planner", [&] { PlannerDirection(report, cfg); });
    guarded("7", [&] {
      Invariants(report, rows, std::move(blob_episodes), cfg, root / "invariants");
    });
  }

  fmt::print("{} failed; total {:.0f} s\n", report.failures(), Seconds(start));
  return report.failures() == 0 ? 0 : 1;
}
