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

#include "poke/planner.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "poke/error.h"
#include "poke/losses.h"

namespace poke {
namespace {

int Argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

int SampleIndex(const std::vector<double>& logits, double temperature,
                Rng& rng) {
  std::vector<double> scaled(logits);
  for (double& v : scaled) v /= temperature;
  const std::vector<double> p = Softmax(scaled);
  double u = rng.Uniform();
  for (size_t i = 0; i < p.size(); ++i) {
    if (u < p[i]) return static_cast<int>(i);
    u -= p[i];
  }
  return static_cast<int>(p.size()) - 1;
}

std::string PoseFields(const Pose& p) {
  return fmt::format("{} {} {}", p.cx, p.cy, p.theta);
}

Pose ReadPose(std::istream& in) {
  Pose p;
  if (!(in >> p.cx >> p.cy >> p.theta)) {
    throw FormatError("episode dump: malformed pose");
  }
  return p;
}

void Expect(std::istream& in, std::string_view word) {
  std::string token;
  if (!(in >> token) || token != word) {
    throw FormatError(fmt::format("episode dump: expected '{}', got '{}'",
                                  word, token));
  }
}

}  // namespace

std::string_view TerminalReasonName(TerminalReason reason) {
  switch (reason) {
    case TerminalReason::kNoPoke:
      return "no-poke";
    case TerminalReason::kMaxSteps:
      return "max-steps";
    case TerminalReason::kThreshold:
      return "threshold";
  }
  return "unknown";
}

TerminalReason ParseTerminalReason(std::string_view name) {
  for (TerminalReason r : {TerminalReason::kNoPoke, TerminalReason::kMaxSteps,
                           TerminalReason::kThreshold}) {
    if (TerminalReasonName(r) == name) return r;
  }
  throw FormatError(fmt::format("unknown terminal reason '{}'", name));
}

Pose Episode::PoseAfter(size_t k) const {
  if (steps.empty()) return init;
  if (k == 0) return steps.front().before;
  return steps[std::min(k, steps.size()) - 1].after;
}

void PlannerConfig::Validate() const {
  if (max_pokes < 1) throw InvalidArgument("max_pokes must be at least 1");
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
}

InverseModelPolicy::InverseModelPolicy(const ModelParams& model,
                                       const ArenaParams& arena,
                                       const PlannerConfig& config)
    : model_(model), arena_(arena), config_(config), rng_(config.seed) {
  config_.Validate();
  if (arena.image_size() != model.image_size) {
    throw InvalidArgument(fmt::format(
        "arena renders {}px images but the model expects {}px",
        arena.image_size(), model.image_size));
  }
}

void InverseModelPolicy::SetGoal(const Observation& goal) {
  goal_latent_ = Encode(goal, model_);
}

Poke InverseModelPolicy::Decide(const Observation& current) {
  if (goal_latent_.empty()) throw Error("policy goal not set");
  const LatentState x = Encode(current, model_);
  const std::vector<double> trunk = InverseTrunk(x, goal_latent_, model_);
  auto choose = [&](const std::vector<double>& logits) {
    return config_.sample ? SampleIndex(logits, config_.temperature, rng_)
                          : Argmax(logits);
  };
  DiscretizedAction a;
  a.loc_bin = choose(LocationLogits(trunk, model_));
  a.angle_bin = choose(AngleLogits(trunk, a.loc_bin, model_));
  a.len_bin = choose(LengthLogits(trunk, a.loc_bin, a.angle_bin, model_));
  last_action_ = a;
  return Undiscretize(a, arena_);
}

Poke PlanNextPoke(const Observation& current, const Observation& goal,
                  const ModelParams& model, const ArenaParams& arena) {
  if (current.size() != goal.size()) {
    throw InvalidArgument("current and goal images differ in size");
  }
  InverseModelPolicy policy(model, arena, PlannerConfig{});
  policy.SetGoal(goal);
  return policy.Decide(current);
}

Episode RunPolicyEpisode(const Pose& init, const Pose& goal, Policy& policy,
                         const ArenaParams& arena, int max_pokes,
                         uint64_t noise_seed) {
  if (max_pokes < 1) throw InvalidArgument("max_pokes must be at least 1");
  Episode episode;
  episode.init = init;
  episode.goal = goal;
  episode.reason = TerminalReason::kMaxSteps;
  Rng noise(noise_seed);
  policy.SetGoal(Render(goal, arena));
  Pose current = init;
  for (int k = 0; k < max_pokes; ++k) {
    const Poke poke = policy.Decide(Render(current, arena));
    if (poke.is_nopoke) {
      episode.reason = policy.stop_reason();
      break;
    }
    const Pose next = Step(current, poke, arena, &noise);
    episode.steps.push_back({current, poke, next});
    current = next;
  }
  return episode;
}

Episode RunEpisode(const Pose& init, const Pose& goal, const ModelParams& model,
                   const ArenaParams& arena, const PlannerConfig& config) {
  InverseModelPolicy policy(model, arena, config);
  return RunPolicyEpisode(init, goal, policy, arena, config.max_pokes,
                          config.seed);
}

void WriteEpisodeDump(std::ostream& out, const Episode& episode) {
  fmt::print(out, "init {}\n", PoseFields(episode.init));
  fmt::print(out, "goal {}\n", PoseFields(episode.goal));
  for (size_t k = 0; k < episode.steps.size(); ++k) {
    const EpisodeStep& s = episode.steps[k];
    fmt::print(out, "step {} before {} poke {} {} {} {} {} after {}\n", k,
               PoseFields(s.before), s.poke.px, s.poke.py, s.poke.theta,
               s.poke.length, s.poke.is_nopoke ? 1 : 0, PoseFields(s.after));
  }
  fmt::print(out, "end {}\n", TerminalReasonName(episode.reason));
}

std::vector<Episode> ReadEpisodeDump(std::istream& in) {
  std::vector<Episode> episodes;
  std::string line;
  Episode current;
  bool open = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "init") {
      if (open) throw FormatError("episode dump: 'init' before 'end'");
      current = Episode{};
      current.init = ReadPose(ls);
      open = true;
    } else if (!open) {
      throw FormatError(fmt::format("episode dump: '{}' outside an episode", kind));
    } else if (kind == "goal") {
      current.goal = ReadPose(ls);
    } else if (kind == "step") {
      size_t k;
      if (!(ls >> k) || k != current.steps.size()) {
        throw FormatError("episode dump: steps out of order");
      }
      EpisodeStep s;
      Expect(ls, "before");
      s.before = ReadPose(ls);
      Expect(ls, "poke");
      int nopoke;
      if (!(ls >> s.poke.px >> s.poke.py >> s.poke.theta >> s.poke.length >> nopoke)) {
        throw FormatError("episode dump: malformed poke");
      }
      s.poke.is_nopoke = nopoke != 0;
      Expect(ls, "after");
      s.after = ReadPose(ls);
      current.steps.push_back(s);
    } else if (kind == "end") {
      std::string reason;
      ls >> reason;
      current.reason = ParseTerminalReason(reason);
      episodes.push_back(std::move(current));
      open = false;
    } else {
      throw FormatError(fmt::format("episode dump: unknown record '{}'", kind));
    }
  }
  if (open) throw FormatError("episode dump: missing 'end'");
  return episodes;
}

}  // namespace poke
