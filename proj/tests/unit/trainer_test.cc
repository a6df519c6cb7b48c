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

#include "poke/trainer.h"

#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "poke/error.h"
#include "poke/rng.h"
#include "poke/sim2d.h"
#include "test_util.h"

namespace poke {
namespace {

using ::poke::testing::TempDir;

TrainConfig Quick() {
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 16;
  c.learning_rate = 1e-3;
  return c;
}

std::vector<uint8_t> CheckpointBytes(const TrainResult& r) {
  return SerializeCheckpoint(r.params.ToCheckpoint({}));
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.Validate());
  for (auto mutate : std::vector<void (*)(TrainConfig&)>{
           [](TrainConfig& t) { t.lambda = -1; }, [](TrainConfig& t) { t.batch_size = 0; },
           [](TrainConfig& t) { t.epochs = 0; }, [](TrainConfig& t) { t.learning_rate = 0; },
           [](TrainConfig& t) { t.jobs = 0; }, [](TrainConfig& t) { t.max_steps = -1; },
           [](TrainConfig& t) { t.inverse_weight = -0.5; }}) {
    TrainConfig bad;
    mutate(bad);
    EXPECT_THROW(bad.Validate(), InvalidArgument);
  }
}

TEST(TrainerTest, HeldOutSplitIsATenth) {
  int held = 0;
  for (uint64_t i = 0; i < 100000; ++i) held += IsHeldOut(i);
  // Binomial(1e5, 0.1): sd ~ 95.
  EXPECT_NEAR(held, 10000, 500);
  EXPECT_EQ(IsHeldOut(12345), IsHeldOut(12345));
}

TEST(TrainerTest, SameSeedSameCheckpoint) {
  TempDir dir;
  GenerateDataset(400, 3, ArenaParams{}, dir / "d.pokd");
  const DatasetReader data(dir / "d.pokd");
  const TrainResult a = Train(data, Quick());
  const TrainResult b = Train(data, Quick());
  EXPECT_EQ(CheckpointBytes(a), CheckpointBytes(b));
  ASSERT_EQ(a.log.size(), 2u);
  EXPECT_EQ(a.log[1].train_loss, b.log[1].train_loss);
  EXPECT_EQ(a.log[0].epoch, 0);
  EXPECT_GT(a.steps, 0);

  TrainConfig other = Quick();
  other.seed = 2;
  EXPECT_NE(CheckpointBytes(Train(data, other)), CheckpointBytes(a));
}

TEST(TrainerTest, FixedWorkerCountIsDeterministic) {
  TempDir dir;
  GenerateDataset(300, 4, ArenaParams{}, dir / "d.pokd");
  const DatasetReader data(dir / "d.pokd");
  TrainConfig c = Quick();
  c.jobs = 3;
  const TrainResult a = Train(data, c);
  const TrainResult b = Train(data, c);
  EXPECT_EQ(CheckpointBytes(a), CheckpointBytes(b));
  // Different worker counts only reorder a floating-point reduction.
  c.jobs = 1;
  const TrainResult single = Train(data, c);
  EXPECT_NEAR(single.log.back().train_loss, a.log.back().train_loss, 1e-6);
}

TEST(TrainerTest, MaxStepsStopsEarly) {
  TempDir dir;
  GenerateDataset(400, 5, ArenaParams{}, dir / "d.pokd");
  TrainConfig c = Quick();
  c.epochs = 50;
  c.max_steps = 5;
  const TrainResult r = Train(DatasetReader(dir / "d.pokd"), c);
  EXPECT_EQ(r.steps, 5);
  EXPECT_EQ(r.log.size(), 1u);
}

TEST(TrainerTest, LossDecreasesOnTenThousandSamples) {
  TempDir dir;
  GenerateDataset(10000, 6, ArenaParams{}, dir / "d.pokd");
  TrainConfig c;
  c.epochs = 6;
  c.jobs = 2;
  std::vector<double> seen;
  const TrainResult r =
      Train(DatasetReader(dir / "d.pokd"), c, [&](const EpochLog& e) { seen.push_back(e.train_loss); });
  ASSERT_EQ(r.log.size(), 6u);
  EXPECT_EQ(seen.size(), 6u);
  EXPECT_LT(r.log[5].train_loss, r.log[0].train_loss);
  EXPECT_LT(r.log[5].heldout_loss, r.log[0].heldout_loss);
  EXPECT_GT(r.log[5].heldout_loc_acc, 1.0 / 400);

  std::ostringstream out;
  WriteTrainingLog(out, r.log);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
}

struct LatentStats {
  double mean_norm = 0.0;
  double spread = 0.0;  // mean distance to the mean latent
};

LatentStats Stats(const std::vector<InteractionRecord>& records, const ArenaParams& arena,
                  const ModelParams& params) {
  std::vector<LatentState> xs;
  LatentState mean(kLatentDim, 0.0);
  for (const auto& r : records) {
    xs.push_back(Encode(Render(r.pose_t, arena), params));
    for (int j = 0; j < kLatentDim; ++j) mean[j] += xs.back()[j] / records.size();
  }
  LatentStats s;
  for (const auto& x : xs) {
    double d = 0.0;
    for (int j = 0; j < kLatentDim; ++j) d += (x[j] - mean[j]) * (x[j] - mean[j]);
    s.spread += std::sqrt(d) / xs.size();
  }
  s.mean_norm = MeanLatentNorm(records, arena, params);
  return s;
}

struct CollapseRun {
  LatentStats before, after;
  double first_forward = 0.0, last_forward = 0.0;
};

CollapseRun RunSteps(const TrainConfig& config, int steps) {
  const ArenaParams arena;
  Rng rng(31);
  std::vector<InteractionRecord> records(2048);
  for (auto& r : records) {
    r.pose_t = RandomPose(arena, rng);
    r.poke = SampleRandomPoke(r.pose_t, arena, rng);
    r.pose_t1 = Step(r.pose_t, r.poke, arena);
  }
  const std::vector<InteractionRecord> probe(records.begin(), records.begin() + 64);
  Trainer trainer(ModelParams::Initialize(64, 3), config);
  CollapseRun run;
  run.before = Stats(probe, arena, trainer.params());
  for (int s = 0; s < steps; ++s) {
    const size_t offset = (s * config.batch_size) % records.size();
    const LossBreakdown loss = trainer.Step(
        std::span<const InteractionRecord>(records).subspan(offset, config.batch_size), arena);
    if (s == 0) run.first_forward = loss.forward;
    run.last_forward = loss.forward;
  }
  run.after = Stats(probe, arena, trainer.params());
  return run;
}

// Without the inverse loss and with gradients through the target, the
// encoder is free to map every image to the same point.
TEST(TrainerTest, UndetachedForwardOnlyTrainingFindsTheTrivialSolution) {
  TrainConfig c;
  c.inverse_weight = 0.0;
  c.detach_target = false;
  const CollapseRun run = RunSteps(c, 300);
  // Scale free: the latent norm itself is not pinned down by this objective.
  EXPECT_LT(run.last_forward / run.after.mean_norm,
            0.2 * run.first_forward / run.before.mean_norm);
  EXPECT_LT(run.after.spread / run.after.mean_norm,
            0.2 * run.before.spread / run.before.mean_norm);
}

TEST(TrainerTest, DefaultJointTrainingKeepsLatentsInformative) {
  const CollapseRun run = RunSteps(TrainConfig{}, 300);
  EXPECT_GT(run.after.mean_norm, 0.1 * run.before.mean_norm);
  EXPECT_GT(run.after.spread / run.after.mean_norm,
            0.2 * run.before.spread / run.before.mean_norm);
}

TEST(TrainerTest, NonFiniteLossIsReported) {
  const ArenaParams arena;
  Rng rng(7);
  std::vector<InteractionRecord> records(4);
  for (auto& r : records) {
    r.pose_t = RandomPose(arena, rng);
    r.poke = SampleRandomPoke(r.pose_t, arena, rng);
    r.pose_t1 = Step(r.pose_t, r.poke, arena);
  }
  Trainer trainer(ModelParams::Initialize(64, 1), TrainConfig{});
  trainer.params().encoder_fc.biases[0] = std::nan("");
  EXPECT_THROW(trainer.Step(records, arena), NumericError);
}

TEST(TrainerTest, EmptyDatasetIsRejected) {
  TempDir dir;
  { DatasetWriter w(dir / "e.pokd", ArenaParams{}, 1); }
  EXPECT_THROW(Train(DatasetReader(dir / "e.pokd"), Quick()), InvalidArgument);
}

}  // namespace
}  // namespace poke
