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

#include "cli.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "poke/blob.h"
#include "poke/checkpoint.h"
#include "poke/config.h"
#include "poke/datastore.h"
#include "poke/error.h"
#include "poke/experiment.h"
#include "poke/gradcheck_suite.h"
#include "poke/metrics.h"
#include "poke/planner.h"
#include "poke/trainer.h"

namespace poke::cli {
namespace {

constexpr double kGradCheckThreshold = 1e-4;
constexpr double kBaselineSuccess = 0.2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double Degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

// "cx,cy,theta_degrees"
Pose ParsePoseArg(const std::string& text, std::string_view flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("{}: bad number '{}'", flag, item));
    }
  }
  if (v.size() != 3) {
    throw UsageError(fmt::format("{}: expected \"cx,cy,theta_degrees\", got '{}'",
                                 flag, text));
  }
  return Pose{v[0], v[1], WrapAngle(v[2] * std::numbers::pi / 180.0)};
}

std::string FormatPose(const Pose& p) {
  return fmt::format("({:.2f}, {:.2f}, {:.1f} deg)", p.cx, p.cy,
                     Degrees(p.theta));
}

std::string FormatPoke(const Poke& p) {
  if (p.is_nopoke) return "no-poke";
  return fmt::format("at ({:.2f}, {:.2f}) theta {:.1f} deg length {:.2f}",
                     p.px, p.py, Degrees(p.theta), p.length);
}

std::ofstream OpenOutput(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot create '{}'", path));
  return out;
}

void WriteComments(std::ostream& out, const std::vector<std::string>& lines) {
  for (const std::string& l : lines) out << "# " << l << '\n';
}

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<int> jobs;

  // gen
  uint64_t gen_n = 0;
  std::optional<uint64_t> gen_seed;
  std::string gen_out;

  // train
  std::string train_data;
  std::string train_model = std::string(kJointModel);
  std::optional<double> train_lambda;
  std::string train_out;
  std::string train_log;
  std::optional<int> train_epochs;
  std::optional<int> train_batch;
  std::optional<double> train_lr;
  std::optional<uint64_t> train_seed;
  std::optional<int64_t> train_max_steps;

  // eval
  std::vector<uint64_t> eval_sizes;
  std::vector<std::string> eval_models;
  std::optional<int> eval_episodes;
  std::string eval_work_dir;
  bool eval_train_inline = false;
  std::string eval_out = "metrics.csv";
  std::string eval_summary;
  std::string eval_curves;

  // plan
  std::string plan_model;
  std::string plan_init;
  std::string plan_goal;
  std::optional<int> plan_max_pokes;
  std::string plan_dump;

  // baseline
  std::optional<int> baseline_episodes;
  std::string baseline_out;
  bool baseline_verbose = false;

  // gradcheck
  uint64_t gc_seed = 0;
  double gc_fraction = 0.01;
  double gc_step = 1e-5;
};

class Runner {
 public:
  Runner(Options options, std::ostream& out, std::ostream& err)
      : opt_(std::move(options)), out_(out), err_(err) {}

  void LoadConfig() {
    std::string path = opt_.config_path;
    if (path.empty()) {
      if (const char* env = std::getenv("POKE_CONFIG"); env && *env) path = env;
    }
    if (!path.empty()) ApplyConfigFile(config_, path);
    for (const std::string& o : opt_.overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) {
        throw UsageError(fmt::format("--set expects key=value, got '{}'", o));
      }
      SetConfigValue(config_, o.substr(0, eq), o.substr(eq + 1));
    }
    if (opt_.jobs) config_.experiment.jobs = *opt_.jobs;
  }

  ExperimentConfig& exp() { return config_.experiment; }

  // Validates the final config and echoes it to stderr.
  void Finalize() {
    config_.experiment.train.jobs = config_.experiment.jobs;
    config_.experiment.Validate();
    for (const std::string& line : DescribeConfig(config_)) {
      fmt::print(err_, "config: {}\n", line);
    }
  }

  int Gen() {
    if (opt_.gen_seed) exp().data_seed = *opt_.gen_seed;
    Finalize();
    if (opt_.gen_n == 0) throw UsageError("--n must be positive");
    const DatasetHeader h =
        GenerateDataset(opt_.gen_n, exp().data_seed, exp().arena, opt_.gen_out);
    fmt::print(out_, "wrote {}\n", opt_.gen_out);
    fmt::print(out_, "  format version {}, {} records of {} bytes, seed {}\n",
               h.version, h.record_count, kDatasetRecordBytes, h.seed);
    const ArenaParams& a = h.params;
    fmt::print(out_,
               "  arena {} px, object {}x{}, k_t {}, k_r {}, wall margin {}, "
               "noise {}, poke length [{}, {}]\n",
               a.arena_size, a.rect_w, a.rect_h, a.k_t, a.k_r, a.wall_margin,
               a.noise_std, a.l_min, a.l_max);
    return kExitOk;
  }

  int Train() {
    TrainConfig& t = exp().train;
    if (opt_.train_model == kInverseModel) {
      if (opt_.train_lambda && *opt_.train_lambda != 0.0) {
        throw UsageError(
            "--model inverse trains without the forward loss; --lambda must "
            "be 0 or omitted");
      }
      t.lambda = 0.0;
    } else if (opt_.train_lambda) {
      t.lambda = *opt_.train_lambda;
    }
    if (opt_.train_epochs) t.epochs = *opt_.train_epochs;
    if (opt_.train_batch) t.batch_size = *opt_.train_batch;
    if (opt_.train_lr) t.learning_rate = *opt_.train_lr;
    if (opt_.train_seed) t.seed = *opt_.train_seed;
    if (opt_.train_max_steps) t.max_steps = *opt_.train_max_steps;
    Finalize();

    const DatasetReader dataset(opt_.train_data);
    fmt::print(err_, "training {} model on {} records (lambda {})\n",
               opt_.train_model, dataset.size(), t.lambda);
    const TrainResult result = poke::Train(dataset, t, [&](const EpochLog& e) {
      fmt::print(out_,
                 "epoch {:3d}  train {:.5f}  heldout {:.5f}  "
                 "acc loc {:.3f} angle {:.3f} length {:.3f}\n",
                 e.epoch, e.train_loss, e.heldout_loss, e.heldout_loc_acc,
                 e.heldout_angle_acc, e.heldout_len_acc);
      out_.flush();
    });

    std::map<std::string, std::string> meta = {
        {"model", opt_.train_model},
        {"lambda", fmt::format("{}", t.lambda)},
        {"train_size", std::to_string(dataset.size())},
        {"data_seed", std::to_string(dataset.header().seed)},
        {"steps", std::to_string(result.steps)},
    };
    for (const std::string& line : DescribeConfig(config_)) {
      const auto eq = line.find(" = ");
      meta["config." + line.substr(0, eq)] = line.substr(eq + 3);
    }
    SaveCheckpoint(result.params.ToCheckpoint(meta), opt_.train_out);
    const std::string log_path =
        opt_.train_log.empty() ? opt_.train_out + ".csv" : opt_.train_log;
    std::ofstream log = OpenOutput(log_path);
    WriteComments(log, DescribeConfig(config_));
    WriteTrainingLog(log, result.log);
    fmt::print(out_, "wrote {} ({} steps) and {}\n", opt_.train_out,
               result.steps, log_path);
    return kExitOk;
  }

  int Eval() {
    if (!opt_.eval_sizes.empty()) exp().sizes = opt_.eval_sizes;
    if (!opt_.eval_models.empty()) exp().models = opt_.eval_models;
    if (opt_.eval_episodes) exp().episodes = *opt_.eval_episodes;
    if (!opt_.eval_work_dir.empty()) exp().work_dir = opt_.eval_work_dir;
    if (opt_.eval_train_inline) exp().train_inline = true;
    Finalize();
    const std::vector<MetricRow> rows =
        RunExperiment(exp(), [&](std::string_view msg) {
          fmt::print(err_, "{}\n", msg);
          err_.flush();
        });
    {
      std::ofstream csv = OpenOutput(opt_.eval_out);
      WriteMetricsCsv(csv, rows, DescribeConfig(config_));
    }
    const ExperimentSummary summary = Summarize(rows);
    WriteSummaryTable(out_, summary);
    if (!opt_.eval_summary.empty()) {
      std::ofstream s = OpenOutput(opt_.eval_summary);
      WriteComments(s, DescribeConfig(config_));
      WriteSummaryTable(s, summary);
    }
    if (!opt_.eval_curves.empty()) WriteCurveFiles(opt_.eval_curves, summary);
    fmt::print(out_, "wrote {} ({} rows)\n", opt_.eval_out, rows.size());
    return kExitOk;
  }

  int Plan() {
    if (opt_.plan_max_pokes) exp().planner.max_pokes = *opt_.plan_max_pokes;
    const Pose init = ParsePoseArg(opt_.plan_init, "--init");
    const Pose goal = ParsePoseArg(opt_.plan_goal, "--goal");
    Finalize();
    const ArenaParams& arena = exp().arena;
    if (!InBounds(init, arena) || !InBounds(goal, arena)) {
      throw UsageError("--init and --goal must keep the object inside the walls");
    }
    std::string path = opt_.plan_model;
    if (path.empty()) {
      path = CheckpointPath(exp(), kJointModel, exp().sizes.back()).string();
    }
    const ModelParams model = ModelParams::FromCheckpoint(LoadCheckpoint(path));
    if (model.image_size != arena.image_size()) {
      throw InvalidArgument(fmt::format(
          "model expects {} px images but the arena renders {} px",
          model.image_size, arena.image_size()));
    }
    const Episode episode = RunEpisode(init, goal, model, arena, exp().planner);
    fmt::print(out_, "model {}\n", path);
    fmt::print(out_, "init {}  goal {}\n", FormatPose(init), FormatPose(goal));
    for (size_t k = 0; k < episode.steps.size(); ++k) {
      const EpisodeStep& s = episode.steps[k];
      fmt::print(out_, "step {:2d}: poke {} -> {}  rel_loc_err {:.4f}  pose_err {:.1f} deg\n",
                 k + 1, FormatPoke(s.poke), FormatPose(s.after),
                 RelativeLocationError(s.after, goal, init),
                 PoseErrorDegrees(s.after, goal));
    }
    fmt::print(out_, "terminal: {} after {} pokes\n",
               TerminalReasonName(episode.reason), episode.steps.size());
    if (!opt_.plan_dump.empty()) {
      std::ofstream dump = OpenOutput(opt_.plan_dump);
      WriteEpisodeDump(dump, episode);
    }
    return kExitOk;
  }

  int Baseline() {
    if (opt_.baseline_episodes) exp().episodes = *opt_.baseline_episodes;
    Finalize();
    std::vector<MetricRow> rows;
    int successes = 0;
    double rel_sum = 0.0, pose_sum = 0.0, pokes_sum = 0.0;
    for (int e = 0; e < exp().episodes; ++e) {
      const auto [init, goal] = EpisodePoses(exp(), e);
      const uint64_t seed = EpisodeSeed(exp(), e);
      const Episode ep =
          RunBlobEpisode(init, goal, exp().arena, exp().blob, seed);
      const double rel = RelativeLocationError(ep.final_pose(), goal, init);
      const double pose = PoseErrorDegrees(ep.final_pose(), goal);
      successes += rel < kBaselineSuccess;
      rel_sum += rel;
      pose_sum += pose;
      pokes_sum += static_cast<double>(ep.steps.size());
      if (opt_.baseline_verbose) {
        fmt::print(out_, "episode {:3d}: {} pokes, {}, rel_loc_err {:.4f}, pose_err {:.1f} deg\n",
                   e, ep.steps.size(), TerminalReasonName(ep.reason), rel, pose);
      }
      const auto r = EpisodeRows(ep, kBlobModel, 0, e, seed, exp().blob.max_pokes);
      rows.insert(rows.end(), r.begin(), r.end());
    }
    const double n = exp().episodes;
    fmt::print(out_, "blob baseline over {} episodes\n", exp().episodes);
    fmt::print(out_, "  final rel_loc_err < {}: {} ({:.1f}%)\n", kBaselineSuccess,
               successes, 100.0 * successes / n);
    fmt::print(out_, "  mean final rel_loc_err {:.4f}, mean final pose_err {:.2f} deg, "
               "mean pokes {:.2f}\n", rel_sum / n, pose_sum / n, pokes_sum / n);
    if (!opt_.baseline_out.empty()) {
      std::ofstream csv = OpenOutput(opt_.baseline_out);
      WriteMetricsCsv(csv, rows, DescribeConfig(config_));
    }
    return kExitOk;
  }

  int GradCheck() {
    Finalize();
    GradCheckSuiteOptions o;
    o.seed = opt_.gc_seed;
    o.network_fraction = opt_.gc_fraction;
    o.step = opt_.gc_step;
    const auto reports = RunGradCheckSuite(o);
    for (const GradCheckReport& r : reports) {
      fmt::print(out_,
                 "{:<34} max_rel_error {:.3e}  entries {:5d} ({} near zero, {} "
                 "skipped at kinks)  worst {}\n",
                 r.name, r.result.max_rel_error, r.result.entries_checked,
                 r.result.entries_below_floor, r.result.entries_skipped,
                 r.result.worst);
    }
    const double worst = MaxRelativeError(reports);
    const bool ok = worst < kGradCheckThreshold;
    fmt::print(out_, "max relative error {:.3e} (threshold {:.0e}): {}\n", worst,
               kGradCheckThreshold, ok ? "ok" : "FAILED");
    return ok ? kExitOk : kExitRuntime;
  }

 private:
  Options opt_;
  std::ostream& out_;
  std::ostream& err_;
  GlobalConfig config_;
};

std::string ConfigKeyHelp() {
  std::string text = "Config keys (`key = value` lines, '#' comments):\n";
  for (const ConfigKeyInfo& k : ConfigKeys()) {
    text += fmt::format("  {:<30} {:<18} {}\n", k.key, k.default_value, k.help);
  }
  return text;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  Options opt;
  CLI::App app("Learn to poke a simulated object: data generation, joint "
               "forward/inverse model training, greedy planning and "
               "evaluation.", "poke");
  app.footer(ConfigKeyHelp() +
             "\nPoses are written \"cx,cy,theta_degrees\".\n"
             "Exit codes: 0 ok, 1 runtime error, 2 usage error.\n"
             "POKE_CONFIG names the config file when --config is absent.");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", opt.config_path, "key = value config file");
  app.add_option("--set", opt.overrides, "override one config key (key=value)");
  app.add_option("--jobs", opt.jobs, "worker threads")->check(CLI::PositiveNumber);

  CLI::App* gen = app.add_subcommand("gen", "generate an interaction dataset");
  gen->add_option("--n", opt.gen_n, "number of records")->required();
  gen->add_option("--seed", opt.gen_seed, "generation seed");
  gen->add_option("--out", opt.gen_out, "output .pokd file")->required();

  CLI::App* train = app.add_subcommand("train", "train a joint or inverse model");
  train->add_option("--data", opt.train_data, "dataset file")->required();
  train->add_option("--model", opt.train_model, "joint | inverse")
      ->check(CLI::IsMember({std::string(kJointModel), std::string(kInverseModel)}));
  train->add_option("--lambda", opt.train_lambda, "forward loss weight (joint)");
  train->add_option("--out", opt.train_out, "output checkpoint")->required();
  train->add_option("--log", opt.train_log, "training CSV (default <out>.csv)");
  train->add_option("--epochs", opt.train_epochs)->check(CLI::PositiveNumber);
  train->add_option("--batch-size", opt.train_batch)->check(CLI::PositiveNumber);
  train->add_option("--lr", opt.train_lr)->check(CLI::PositiveNumber);
  train->add_option("--seed", opt.train_seed);
  train->add_option("--max-steps", opt.train_max_steps)->check(CLI::NonNegativeNumber);

  CLI::App* eval = app.add_subcommand("eval", "run the paired planning experiment");
  eval->add_option("--sizes", opt.eval_sizes, "training set sizes")->delimiter(',');
  eval->add_option("--models", opt.eval_models, "subset of joint,inverse,blob")
      ->delimiter(',')
      ->check(CLI::IsMember({std::string(kJointModel), std::string(kInverseModel),
                             std::string(kBlobModel)}));
  eval->add_option("--episodes", opt.eval_episodes)->check(CLI::PositiveNumber);
  eval->add_option("--work-dir", opt.eval_work_dir, "datasets and checkpoints");
  eval->add_flag("--train-inline", opt.eval_train_inline,
                 "generate data and train missing checkpoints");
  eval->add_option("--out", opt.eval_out, "metrics CSV")->capture_default_str();
  eval->add_option("--summary", opt.eval_summary, "also write the summary table here");
  eval->add_option("--curves", opt.eval_curves, "directory for per-curve TSV files");

  CLI::App* plan = app.add_subcommand("plan", "run one planning episode");
  plan->add_option("--model", opt.plan_model,
                   "checkpoint (default: joint model of the largest size in "
                   "the work dir)");
  plan->add_option("--init", opt.plan_init, "initial pose cx,cy,theta_degrees")
      ->required();
  plan->add_option("--goal", opt.plan_goal, "goal pose cx,cy,theta_degrees")
      ->required();
  plan->add_option("--max-pokes", opt.plan_max_pokes)->check(CLI::PositiveNumber);
  plan->add_option("--dump", opt.plan_dump, "write the episode dump here");

  CLI::App* baseline = app.add_subcommand("baseline", "run blob baseline episodes");
  baseline->add_option("--episodes", opt.baseline_episodes)->check(CLI::PositiveNumber);
  baseline->add_option("--out", opt.baseline_out, "metrics CSV");
  baseline->add_flag("--verbose", opt.baseline_verbose, "one line per episode");

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  gradcheck->add_option("--seed", opt.gc_seed)->capture_default_str();
  gradcheck->add_option("--fraction", opt.gc_fraction,
                        "fraction of network parameters probed")
      ->check(CLI::Range(1e-6, 1.0))
      ->capture_default_str();
  gradcheck->add_option("--step", opt.gc_step, "central difference step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  Runner runner(std::move(opt), out, err);
  try {
    runner.LoadConfig();
    if (*gen) return runner.Gen();
    if (*train) return runner.Train();
    if (*eval) return runner.Eval();
    if (*plan) return runner.Plan();
    if (*baseline) return runner.Baseline();
    if (*gradcheck) return runner.GradCheck();
  } catch (const UsageError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace poke::cli
