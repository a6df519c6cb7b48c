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

#include <sstream>

#include <gtest/gtest.h>

#include "poke/error.h"
#include "poke/metrics.h"

namespace poke {
namespace {

// Heads reduced to constant logits chosen by their biases.
ModelParams ConstantModel(int loc_bin, int angle_bin, int len_bin) {
  ModelParams params = ModelParams::Initialize(64, 1);
  for (LayerParams* l : {&params.inverse_location, &params.inverse_angle, &params.inverse_length}) {
    l->weights.SetZero();
    l->biases.SetZero();
  }
  params.inverse_location.biases[loc_bin] = 1.0;
  params.inverse_angle.biases[angle_bin] = 1.0;
  params.inverse_length.biases[len_bin] = 1.0;
  return params;
}

// Pushes straight at the goal through the object center, or stops when close.
class OraclePolicy : public Policy {
 public:
  OraclePolicy(const Pose& goal, double stop) : goal_(goal), stop_(stop) {}
  void SetGoal(const Observation&) override {}
  void set_current(const Pose* current) { current_ = current; }
  Poke Decide(const Observation&) override {
    const Vec2 d = goal_.center() - current_->center();
    const double dist = d.Norm();
    if (dist < stop_) return Poke::NoPoke();
    // Motion direction is theta + pi, so theta points away from the goal.
    const double theta = WrapAngle(std::atan2(-d.y, -d.x));
    return Poke{current_->cx, current_->cy, theta, 20.0, false};
  }
  TerminalReason stop_reason() const override { return TerminalReason::kThreshold; }

 private:
  Pose goal_;
  double stop_;
  const Pose* current_ = nullptr;
};

// A policy that never stops.
class RestlessPolicy : public Policy {
 public:
  void SetGoal(const Observation&) override { ++goals_; }
  Poke Decide(const Observation&) override {
    ++calls_;
    return Poke{32, 32, 0.3 * calls_, 12.0, false};
  }
  TerminalReason stop_reason() const override { return TerminalReason::kNoPoke; }
  int calls_ = 0;
  int goals_ = 0;
};

TEST(PlannerTest, NoPokeBinStops) {
  const ArenaParams arena;
  const ModelParams model = ConstantModel(210, 3, kNoPokeBin);
  const Observation image = Render({30, 30, 0}, arena);
  EXPECT_TRUE(PlanNextPoke(image, image, model, arena).is_nopoke);
  const Episode e = RunEpisode({30, 30, 0}, {40, 30, 0}, model, arena, {});
  EXPECT_TRUE(e.steps.empty());
  EXPECT_EQ(e.reason, TerminalReason::kNoPoke);
  EXPECT_EQ(e.final_pose(), (Pose{30, 30, 0}));
}

TEST(PlannerTest, PredictedPokeIsBinCenterInsideImage) {
  const ArenaParams arena;
  for (int loc : {0, 19, 210, 399}) {
    const ModelParams model = ConstantModel(loc, 8, 4);
    const Observation image = Render({30, 30, 0}, arena);
    const Poke p = PlanNextPoke(image, Render({40, 30, 0}, arena), model, arena);
    EXPECT_FALSE(p.is_nopoke);
    EXPECT_EQ(p, Undiscretize({loc, 8, 4}, arena));
    EXPECT_GT(p.px, 0);
    EXPECT_LT(p.px, 64);
    EXPECT_GT(p.py, 0);
    EXPECT_LT(p.py, 64);
  }
  EXPECT_THROW(PlanNextPoke(Observation(32), Observation(32), ConstantModel(0, 0, 0), arena),
               InvalidArgument);
}

TEST(PlannerTest, EpisodesNeverExceedMaxPokes) {
  const ArenaParams arena;
  // Location bin at the center and a real length: the model always pokes.
  const ModelParams model = ConstantModel(210, 0, 9);
  for (int max_pokes : {1, 3, 10}) {
    PlannerConfig config;
    config.max_pokes = max_pokes;
    const Episode e = RunEpisode({32, 32, 0}, {50, 50, 0}, model, arena, config);
    EXPECT_EQ(e.steps.size(), static_cast<size_t>(max_pokes));
    EXPECT_EQ(e.reason, TerminalReason::kMaxSteps);
    for (size_t k = 0; k < e.steps.size(); ++k) {
      EXPECT_TRUE(InBounds(e.steps[k].after, arena));
      if (k + 1 < e.steps.size()) EXPECT_EQ(e.steps[k].after, e.steps[k + 1].before);
      EXPECT_EQ(e.steps[k].after, Step(e.steps[k].before, e.steps[k].poke, arena));
    }
  }
  PlannerConfig bad;
  bad.max_pokes = 0;
  EXPECT_THROW(bad.Validate(), InvalidArgument);
  EXPECT_THROW(RunEpisode({32, 32, 0}, {50, 50, 0}, model, arena, bad), InvalidArgument);
}

TEST(PlannerTest, RestlessPolicyIsCutOff) {
  const ArenaParams arena;
  RestlessPolicy policy;
  const Episode e = RunPolicyEpisode({32, 32, 0}, {10, 10, 0}, policy, arena, 10);
  EXPECT_EQ(e.steps.size(), 10u);
  EXPECT_EQ(policy.calls_, 10);
  EXPECT_EQ(policy.goals_, 1);
}

TEST(PlannerTest, InitEqualsGoalGivesZeroStepEpisode) {
  const ArenaParams arena;
  const Pose pose{25, 35, 0.5};
  OraclePolicy policy(pose, 0.5);
  policy.set_current(&pose);
  const Episode e = RunPolicyEpisode(pose, pose, policy, arena, 10);
  EXPECT_TRUE(e.steps.empty());
  EXPECT_EQ(e.reason, TerminalReason::kThreshold);
}

TEST(PlannerTest, PoseAfterClampsToFinal) {
  Episode e;
  e.init = {10, 10, 0};
  e.steps.push_back({{10, 10, 0}, Poke{}, {12, 10, 0}});
  e.steps.push_back({{12, 10, 0}, Poke{}, {14, 10, 0}});
  EXPECT_EQ(e.PoseAfter(0), (Pose{10, 10, 0}));
  EXPECT_EQ(e.PoseAfter(1), (Pose{12, 10, 0}));
  EXPECT_EQ(e.PoseAfter(2), (Pose{14, 10, 0}));
  EXPECT_EQ(e.PoseAfter(9), (Pose{14, 10, 0}));
}

TEST(PlannerTest, DeterministicForFixedModelAndSeed) {
  const ArenaParams arena;
  const ModelParams model = ModelParams::Initialize(64, 3);
  PlannerConfig config;
  EXPECT_EQ(RunEpisode({20, 20, 0}, {40, 44, 1}, model, arena, config),
            RunEpisode({20, 20, 0}, {40, 44, 1}, model, arena, config));
  config.sample = true;
  config.seed = 9;
  EXPECT_EQ(RunEpisode({20, 20, 0}, {40, 44, 1}, model, arena, config),
            RunEpisode({20, 20, 0}, {40, 44, 1}, model, arena, config));
}

TEST(EpisodeDumpTest, RoundTrip) {
  const ArenaParams arena;
  const ModelParams model = ConstantModel(210, 5, 6);
  std::vector<Episode> episodes;
  PlannerConfig config;
  config.max_pokes = 4;
  episodes.push_back(RunEpisode({20.1, 20.7, 0.123456789}, {40, 44, 1}, model, arena, config));
  episodes.push_back(RunEpisode({30, 30, 0}, {40, 44, 1}, ConstantModel(0, 0, kNoPokeBin),
                                arena, config));
  Episode with_nopoke = episodes[0];
  with_nopoke.steps[1].poke = Poke::NoPoke();
  with_nopoke.reason = TerminalReason::kThreshold;
  episodes.push_back(with_nopoke);

  std::stringstream ss;
  for (const Episode& e : episodes) WriteEpisodeDump(ss, e);
  EXPECT_EQ(ReadEpisodeDump(ss), episodes);

  std::istringstream bad("init 1 2 3\ngoal 1 2\nend no-poke\n");
  EXPECT_THROW(ReadEpisodeDump(bad), FormatError);
  std::istringstream truncated("init 1 2 3\ngoal 1 2 3\n");
  EXPECT_THROW(ReadEpisodeDump(truncated), FormatError);
}

TEST(TerminalReasonTest, NamesRoundTrip) {
  for (TerminalReason r :
       {TerminalReason::kNoPoke, TerminalReason::kMaxSteps, TerminalReason::kThreshold}) {
    EXPECT_EQ(ParseTerminalReason(TerminalReasonName(r)), r);
  }
  EXPECT_THROW(ParseTerminalReason("bogus"), FormatError);
}

}  // namespace
}  // namespace poke
