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
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include "poke/datastore.h"
#include "poke/error.h"
#include "poke/metrics.h"

namespace poke {
namespace {

constexpr std::string_view kCsvHeader =
    "model,train_size,episode,seed,k,rel_loc_err,pose_err_deg,terminal_reason";

bool IsLearned(std::string_view model) {
  return model == kJointModel || model == kInverseModel;
}

std::string Fingerprint(const ExperimentConfig& config, std::string_view model,
                        uint64_t size) {
  const TrainConfig t = ModelTrainConfig(config, model);
  const ArenaParams& a = config.arena;
  return fmt::format(
      "model={} size={} data_seed={} lambda={} batch={} epochs={} lr={} "
      "seed={} jobs={} max_steps={} arena={},{},{},{},{},{},{},{},{}",
      model, size, config.data_seed, t.lambda, t.batch_size, t.epochs,
      t.learning_rate, t.seed, t.jobs, t.max_steps, a.arena_size, a.rect_w,
      a.rect_h, a.k_t, a.k_r, a.wall_margin, a.noise_std, a.l_min, a.l_max);
}

template <typename Fn>
void ParallelFor(int count, int jobs, Fn&& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += jobs) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : workers) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T ParseNumber(const std::string& s, size_t line_no) {
  std::istringstream ss(s);
  T v;
  if (!(ss >> v) || !ss.eof()) {
    throw FormatError(fmt::format("csv line {}: bad number '{}'", line_no, s));
  }
  return v;
}

std::string OptionalNumber(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string("-");
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (sizes.empty()) throw InvalidArgument("experiment needs at least one size");
  if (models.empty()) throw InvalidArgument("experiment needs at least one model");
  for (const std::string& m : models) {
    if (m != kJointModel && m != kInverseModel && m != kBlobModel) {
      throw InvalidArgument(fmt::format("unknown model tag '{}'", m));
    }
  }
  for (uint64_t s : sizes) {
    if (s == 0) throw InvalidArgument("train size must be positive");
  }
  if (episodes < 1) throw InvalidArgument("episodes must be positive");
  if (!(min_goal_distance > 1e-9)) {
    throw InvalidArgument("min_goal_distance must be positive");
  }
  if (jobs < 1) throw InvalidArgument("jobs must be positive");
  arena.Validate();
  train.Validate();
  planner.Validate();
  blob.Validate();
}

std::filesystem::path DatasetPath(const ExperimentConfig& config,
                                  uint64_t size) {
  return config.work_dir / fmt::format("data_{}_{}.pokd", size, config.data_seed);
}

std::filesystem::path CheckpointPath(const ExperimentConfig& config,
                                     std::string_view model, uint64_t size) {
  return config.work_dir / fmt::format("{}_{}.pokm", model, size);
}

uint64_t EpisodeSeed(const ExperimentConfig& config, int episode) {
  return HashIndex(config.seed, static_cast<uint64_t>(episode));
}

std::pair<Pose, Pose> EpisodePoses(const ExperimentConfig& config,
                                   int episode) {
  Rng rng(EpisodeSeed(config, episode));
  const Pose init = RandomPose(config.arena, rng);
  Pose goal = RandomPose(config.arena, rng);
  while ((goal.center() - init.center()).Norm() < config.min_goal_distance) {
    goal = RandomPose(config.arena, rng);
  }
  return {init, goal};
}

std::vector<MetricRow> EpisodeRows(const Episode& episode,
                                   std::string_view model, uint64_t train_size,
                                   int episode_id, uint64_t seed,
                                   int max_pokes) {
  std::vector<MetricRow> rows;
  rows.reserve(max_pokes + 1);
  for (int k = 0; k <= max_pokes; ++k) {
    const Pose pose = episode.PoseAfter(static_cast<size_t>(k));
    rows.push_back({std::string(model), train_size, episode_id, seed, k,
                    RelativeLocationError(pose, episode.goal, episode.init),
                    PoseErrorDegrees(pose, episode.goal), episode.reason});
  }
  return rows;
}

TrainConfig ModelTrainConfig(const ExperimentConfig& config,
                             std::string_view model) {
  TrainConfig t = config.train;
  t.jobs = config.jobs;
  if (model == kInverseModel) t.lambda = 0.0;
  return t;
}

ModelParams ObtainModel(const ExperimentConfig& config, std::string_view model,
                        uint64_t size,
                        const std::function<void(std::string_view)>& log) {
  if (!IsLearned(model)) {
    throw InvalidArgument(fmt::format("'{}' is not a learned model", model));
  }
  const auto ckpt_path = CheckpointPath(config, model, size);
  const std::string fingerprint = Fingerprint(config, model, size);
  if (std::filesystem::exists(ckpt_path)) {
    Checkpoint c = LoadCheckpoint(ckpt_path);
    const auto it = c.metadata.find("fingerprint");
    const bool matches = it != c.metadata.end() && it->second == fingerprint;
    if (matches || !config.train_inline) {
      if (!matches && log) {
        log(fmt::format("warning: {} was trained with a different config",
                        ckpt_path.string()));
      }
      return ModelParams::FromCheckpoint(c);
    }
  } else if (!config.train_inline) {
    throw IoError(fmt::format("missing checkpoint '{}' (train it first or "
                              "enable inline training)",
                              ckpt_path.string()));
  }

  std::filesystem::create_directories(config.work_dir);
  const auto data_path = DatasetPath(config, size);
  bool regenerate = true;
  if (std::filesystem::exists(data_path)) {
    try {
      const DatasetReader existing(data_path);
      regenerate = existing.size() != size ||
                   existing.header().seed != config.data_seed ||
                   !(existing.header().params == QuantizeParams(config.arena));
    } catch (const Error&) {
      regenerate = true;
    }
  }
  if (regenerate) {
    if (log) log(fmt::format("generating {} records -> {}", size, data_path.string()));
    GenerateDataset(size, config.data_seed, config.arena, data_path);
  }

  const TrainConfig train = ModelTrainConfig(config, model);
  if (log) {
    log(fmt::format("training {} model on {} records (lambda={})", model, size,
                    train.lambda));
  }
  const DatasetReader dataset(data_path);
  const TrainResult result = Train(dataset, train, [&](const EpochLog& e) {
    if (log) {
      log(fmt::format(
          "  [{} {}] epoch {} train={:.4f} heldout={:.4f} acc(loc/ang/len)="
          "{:.3f}/{:.3f}/{:.3f}",
          model, size, e.epoch, e.train_loss, e.heldout_loss, e.heldout_loc_acc,
          e.heldout_angle_acc, e.heldout_len_acc));
    }
  });
  Checkpoint c = result.params.ToCheckpoint({
      {"model", std::string(model)},
      {"lambda", fmt::format("{}", train.lambda)},
      {"train_size", std::to_string(size)},
      {"data_seed", std::to_string(config.data_seed)},
      {"train_seed", std::to_string(train.seed)},
      {"steps", std::to_string(result.steps)},
      {"fingerprint", fingerprint},
  });
  SaveCheckpoint(c, ckpt_path);
  std::ofstream log_csv(ckpt_path.string() + ".train.csv");
  WriteTrainingLog(log_csv, result.log);
  return result.params;
}

std::vector<MetricRow> RunExperiment(const ExperimentConfig& config,
                                     const ProgressLog& log) {
  config.Validate();
  std::vector<MetricRow> rows;
  std::vector<std::vector<MetricRow>> blob_cache;
  for (uint64_t size : config.sizes) {
    for (const std::string& model : config.models) {
      std::vector<std::vector<MetricRow>> per_episode(config.episodes);
      if (model == kBlobModel) {
        // The blob policy never sees training data; its episodes depend only
        // on the episode seeds.
        if (blob_cache.empty()) {
          blob_cache.resize(config.episodes);
          ParallelFor(config.episodes, config.jobs, [&](int e) {
            const auto [init, goal] = EpisodePoses(config, e);
            const uint64_t seed = EpisodeSeed(config, e);
            const Episode ep = RunBlobEpisode(init, goal, config.arena,
                                              config.blob, seed);
            blob_cache[e] = EpisodeRows(ep, model, 0, e, seed,
                                        config.blob.max_pokes);
          });
        }
        per_episode = blob_cache;
        for (auto& ep_rows : per_episode) {
          for (MetricRow& r : ep_rows) r.train_size = size;
        }
      } else {
        const ModelParams params = ObtainModel(config, model, size, log);
        if (log) log(fmt::format("planning {} episodes with {} model ({})",
                                 config.episodes, model, size));
        ParallelFor(config.episodes, config.jobs, [&](int e) {
          const auto [init, goal] = EpisodePoses(config, e);
          const uint64_t seed = EpisodeSeed(config, e);
          PlannerConfig planner = config.planner;
          planner.seed = HashIndex(config.planner.seed, seed);
          InverseModelPolicy policy(params, config.arena, planner);
          const Episode ep = RunPolicyEpisode(init, goal, policy, config.arena,
                                              planner.max_pokes, seed);
          per_episode[e] =
              EpisodeRows(ep, model, size, e, seed, planner.max_pokes);
        });
      }
      for (auto& ep_rows : per_episode) {
        rows.insert(rows.end(), ep_rows.begin(), ep_rows.end());
      }
    }
  }
  return rows;
}

void WriteMetricsCsv(std::ostream& out, const std::vector<MetricRow>& rows,
                     const std::vector<std::string>& comments) {
  for (const std::string& c : comments) out << "# " << c << '\n';
  out << kCsvHeader << '\n';
  for (const MetricRow& r : rows) {
    fmt::print(out, "{},{},{},{},{},{},{},{}\n", r.model, r.train_size,
               r.episode, r.seed, r.k, r.rel_loc_err, r.pose_err_deg,
               TerminalReasonName(r.terminal_reason));
  }
}

std::vector<MetricRow> ReadMetricsCsv(std::istream& in) {
  std::vector<MetricRow> rows;
  std::string line;
  size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw FormatError(fmt::format("csv line {}: unexpected header '{}'",
                                      line_no, line));
      }
      header_seen = true;
      continue;
    }
    const std::vector<std::string> f = SplitCsv(line);
    if (f.size() != 8) {
      throw FormatError(fmt::format("csv line {}: expected 8 fields, got {}",
                                    line_no, f.size()));
    }
    MetricRow r;
    r.model = f[0];
    r.train_size = ParseNumber<uint64_t>(f[1], line_no);
    r.episode = ParseNumber<int>(f[2], line_no);
    r.seed = ParseNumber<uint64_t>(f[3], line_no);
    r.k = ParseNumber<int>(f[4], line_no);
    r.rel_loc_err = ParseNumber<double>(f[5], line_no);
    r.pose_err_deg = ParseNumber<double>(f[6], line_no);
    r.terminal_reason = ParseTerminalReason(f[7]);
    if (r.k < 0) throw FormatError(fmt::format("csv line {}: negative k", line_no));
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw FormatError("csv has no header");
  if (rows.empty()) throw FormatError("csv has no rows");
  return rows;
}

const CellSummary* ExperimentSummary::Find(std::string_view model,
                                           uint64_t size) const {
  for (const CellSummary& c : cells) {
    if (c.model == model && c.train_size == size) return &c;
  }
  return nullptr;
}

const PairedComparison* ExperimentSummary::FindComparison(
    std::string_view a, std::string_view b, uint64_t size) const {
  for (const PairedComparison& c : comparisons) {
    if (c.model_a == a && c.model_b == b && c.train_size == size) return &c;
  }
  return nullptr;
}

ExperimentSummary Summarize(const std::vector<MetricRow>& rows,
                            int compare_k) {
  if (rows.empty()) throw InvalidArgument("no rows to summarize");
  // (size, model) -> k -> episode -> row
  std::map<std::pair<uint64_t, std::string>,
           std::map<int, std::map<int, const MetricRow*>>>
      cells;
  std::vector<std::pair<uint64_t, std::string>> order;
  for (const MetricRow& r : rows) {
    auto key = std::make_pair(r.train_size, r.model);
    if (!cells.contains(key)) order.push_back(key);
    cells[key][r.k][r.episode] = &r;
  }

  ExperimentSummary summary;
  for (const auto& key : order) {
    CellSummary cell;
    cell.train_size = key.first;
    cell.model = key.second;
    std::map<int, bool> episodes;
    for (const auto& [k, by_episode] : cells[key]) {
      CurvePoint p;
      p.k = k;
      p.n = static_cast<int>(by_episode.size());
      double sr = 0.0, sp = 0.0;
      for (const auto& [e, r] : by_episode) {
        episodes[e] = true;
        sr += r->rel_loc_err;
        sp += r->pose_err_deg;
      }
      p.mean_rel_loc_err = sr / p.n;
      p.mean_pose_err = sp / p.n;
      if (p.n >= 2) {
        double vr = 0.0, vp = 0.0;
        for (const auto& [e, r] : by_episode) {
          vr += (r->rel_loc_err - p.mean_rel_loc_err) *
                (r->rel_loc_err - p.mean_rel_loc_err);
          vp += (r->pose_err_deg - p.mean_pose_err) *
                (r->pose_err_deg - p.mean_pose_err);
        }
        p.stderr_rel_loc_err = std::sqrt(vr / (p.n - 1) / p.n);
        p.stderr_pose_err = std::sqrt(vp / (p.n - 1) / p.n);
      }
      cell.curve.push_back(p);
    }
    cell.episodes = static_cast<int>(episodes.size());
    summary.cells.push_back(std::move(cell));
  }

  auto compare = [&](uint64_t size, const std::string& a, const std::string& b) {
    const auto ia = cells.find({size, a});
    const auto ib = cells.find({size, b});
    if (ia == cells.end() || ib == cells.end()) return;
    const auto ka = ia->second.find(compare_k);
    const auto kb = ib->second.find(compare_k);
    if (ka == ia->second.end() || kb == ib->second.end()) return;
    std::vector<double> va, vb;
    for (const auto& [e, r] : ka->second) {
      const auto other = kb->second.find(e);
      if (other == kb->second.end()) continue;
      va.push_back(r->rel_loc_err);
      vb.push_back(other->second->rel_loc_err);
    }
    if (va.empty()) return;
    PairedComparison c;
    c.train_size = size;
    c.model_a = a;
    c.model_b = b;
    c.k = compare_k;
    for (size_t i = 0; i < va.size(); ++i) {
      c.mean_a += va[i] / va.size();
      c.mean_b += vb[i] / vb.size();
    }
    c.test = PairedSignTest(va, vb);
    summary.comparisons.push_back(std::move(c));
  };
  std::vector<uint64_t> sizes;
  for (const auto& key : order) {
    if (std::find(sizes.begin(), sizes.end(), key.first) == sizes.end()) {
      sizes.push_back(key.first);
    }
  }
  for (uint64_t size : sizes) {
    compare(size, std::string(kJointModel), std::string(kInverseModel));
    compare(size, std::string(kJointModel), std::string(kBlobModel));
    compare(size, std::string(kInverseModel), std::string(kBlobModel));
  }
  return summary;
}

void WriteSummaryTable(std::ostream& out, const ExperimentSummary& summary) {
  fmt::print(out, "{:<8} {:>10} {:>8} {:>4} {:>12} {:>10} {:>12} {:>10}\n",
             "model", "train_size", "episodes", "k", "rel_loc_err", "stderr",
             "pose_err_deg", "stderr");
  for (const CellSummary& cell : summary.cells) {
    for (const CurvePoint& p : cell.curve) {
      fmt::print(out, "{:<8} {:>10} {:>8} {:>4} {:>12.6f} {:>10} {:>12.4f} {:>10}\n",
                 cell.model, cell.train_size, cell.episodes, p.k,
                 p.mean_rel_loc_err, OptionalNumber(p.stderr_rel_loc_err),
                 p.mean_pose_err, OptionalNumber(p.stderr_pose_err));
    }
  }
  if (summary.comparisons.empty()) return;
  fmt::print(out, "\npaired sign tests on rel_loc_err (win = first model lower)\n");
  fmt::print(out, "{:>10} {:<18} {:>3} {:>10} {:>10} {:>5} {:>6} {:>5} {:>10}\n",
             "train_size", "comparison", "k", "mean_a", "mean_b", "wins",
             "losses", "ties", "p_value");
  for (const PairedComparison& c : summary.comparisons) {
    fmt::print(out, "{:>10} {:<18} {:>3} {:>10.6f} {:>10.6f} {:>5} {:>6} {:>5} {:>10.3g}\n",
               c.train_size, c.model_a + " vs " + c.model_b, c.k, c.mean_a,
               c.mean_b, c.test.wins, c.test.losses, c.test.ties,
               c.test.p_value);
  }
}

std::vector<std::filesystem::path> WriteCurveFiles(
    const std::filesystem::path& dir, const ExperimentSummary& summary) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (const CellSummary& cell : summary.cells) {
    const auto path =
        dir / fmt::format("curve_{}_{}.tsv", cell.model, cell.train_size);
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot create '{}'", path.string()));
    out << "# k\tmean_rel_loc_err\tstderr_rel_loc_err\tmean_pose_err_deg\t"
           "stderr_pose_err_deg\n";
    for (const CurvePoint& p : cell.curve) {
      fmt::print(out, "{}\t{}\t{}\t{}\t{}\n", p.k, p.mean_rel_loc_err,
                 p.stderr_rel_loc_err ? fmt::format("{}", *p.stderr_rel_loc_err) : "nan",
                 p.mean_pose_err,
                 p.stderr_pose_err ? fmt::format("{}", *p.stderr_pose_err) : "nan");
    }
    paths.push_back(path);
  }
  return paths;
}

std::vector<std::string> DescribeExperiment(const ExperimentConfig& config) {
  const ArenaParams& a = config.arena;
  const TrainConfig& t = config.train;
  return {
      fmt::format("experiment.sizes = {}", fmt::join(config.sizes, ",")),
      fmt::format("experiment.models = {}", fmt::join(config.models, ",")),
      fmt::format("experiment.episodes = {}", config.episodes),
      fmt::format("experiment.seed = {}", config.seed),
      fmt::format("experiment.data_seed = {}", config.data_seed),
      fmt::format("experiment.min_goal_distance = {}", config.min_goal_distance),
      fmt::format("arena = size {} rect {}x{} k_t {} k_r {} margin {} noise {} "
                  "len [{}, {}]",
                  a.arena_size, a.rect_w, a.rect_h, a.k_t, a.k_r, a.wall_margin,
                  a.noise_std, a.l_min, a.l_max),
      fmt::format("train = lambda {} batch {} epochs {} lr {} seed {} jobs {}",
                  t.lambda, t.batch_size, t.epochs, t.learning_rate, t.seed,
                  t.jobs),
      fmt::format("planner = max_pokes {} sample {} temperature {} seed {}",
                  config.planner.max_pokes, config.planner.sample,
                  config.planner.temperature, config.planner.seed),
      fmt::format("blob = threshold {} len_gain {} max_pokes {}",
                  config.blob.threshold, config.blob.len_gain,
                  config.blob.max_pokes),
  };
}

}  // namespace poke
