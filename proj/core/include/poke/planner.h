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

#ifndef POKE_PLANNER_H_
#define POKE_PLANNER_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poke/model.h"
#include "poke/sim2d.h"

namespace poke {

enum class TerminalReason { kNoPoke, kMaxSteps, kThreshold };

std::string_view TerminalReasonName(TerminalReason reason);
TerminalReason ParseTerminalReason(std::string_view name);

struct EpisodeStep {
  Pose before;
  Poke poke;
  Pose after;

  friend bool operator==(const EpisodeStep&, const EpisodeStep&) = default;
};

struct Episode {
  Pose init;
  Pose goal;
  std::vector<EpisodeStep> steps;
  TerminalReason reason = TerminalReason::kMaxSteps;

  // Pose after k pokes; the final pose for k beyond the last step.
  Pose PoseAfter(size_t k) const;
  Pose final_pose() const { return PoseAfter(steps.size()); }

  friend bool operator==(const Episode&, const Episode&) = default;
};

struct PlannerConfig {
  int max_pokes = 10;
  // Argmax per head by default; otherwise sample each head from
  // softmax(logits / temperature) along the conditioning chain.
  bool sample = false;
  double temperature = 1.0;
  uint64_t seed = 0;

  void Validate() const;
};

// Closed-loop controller queried once per step. Returning a no-poke ends the
// episode with stop_reason().
class Policy {
 public:
  virtual ~Policy() = default;
  // Called once per episode before the first Decide().
  virtual void SetGoal(const Observation& goal) = 0;
  virtual Poke Decide(const Observation& current) = 0;
  virtual TerminalReason stop_reason() const = 0;
};

// Greedy inverse-model policy. The goal latent is computed once per episode.
class InverseModelPolicy : public Policy {
 public:
  InverseModelPolicy(const ModelParams& model, const ArenaParams& arena,
                     const PlannerConfig& config);

  void SetGoal(const Observation& goal) override;
  Poke Decide(const Observation& current) override;
  TerminalReason stop_reason() const override { return TerminalReason::kNoPoke; }

  // The discretized choice behind the last Decide().
  const DiscretizedAction& last_action() const { return last_action_; }

 private:
  const ModelParams& model_;
  ArenaParams arena_;
  PlannerConfig config_;
  Rng rng_;
  LatentState goal_latent_;
  DiscretizedAction last_action_;
};

// Encodes both images, runs the inverse chain with argmax selection and
// maps the bins back to a poke (no-poke when the length head picks bin 10).
Poke PlanNextPoke(const Observation& current, const Observation& goal,
                  const ModelParams& model, const ArenaParams& arena);

// Render-decide-step loop; stops on the policy's stop signal or after
// max_pokes. `noise_seed` feeds the simulator when arena.noise_std > 0.
Episode RunPolicyEpisode(const Pose& init, const Pose& goal, Policy& policy,
                         const ArenaParams& arena, int max_pokes,
                         uint64_t noise_seed = 0);

Episode RunEpisode(const Pose& init, const Pose& goal, const ModelParams& model,
                   const ArenaParams& arena, const PlannerConfig& config);

// Line-delimited dump, one pose or poke per line:
//   init <cx> <cy> <theta>
//   goal <cx> <cy> <theta>
//   step <k> before <cx> <cy> <theta> poke <px> <py> <theta> <length> <nopoke>
//        after <cx> <cy> <theta>            (all on one line)
//   end <terminal_reason>
// Numbers are printed with round-trip precision.
void WriteEpisodeDump(std::ostream& out, const Episode& episode);
// Reads episodes until end of stream.
std::vector<Episode> ReadEpisodeDump(std::istream& in);

}  // namespace poke

#endif  // POKE_PLANNER_H_
