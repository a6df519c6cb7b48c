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

#include <vector>

#include <benchmark/benchmark.h>

#include "poke/datastore.h"
#include "poke/layers.h"
#include "poke/model.h"
#include "poke/planner.h"
#include "poke/sim2d.h"
#include "poke/trainer.h"

namespace poke {
namespace {

std::vector<InteractionRecord> Records(int n, const ArenaParams& arena) {
  Rng rng(5);
  std::vector<InteractionRecord> out;
  for (int i = 0; i < n; ++i) {
    InteractionRecord r;
    r.pose_t = RandomPose(arena, rng);
    r.poke = SampleRandomPoke(r.pose_t, arena, rng);
    r.pose_t1 = Step(r.pose_t, r.poke, arena);
    out.push_back(r);
  }
  return out;
}

void BM_Render(benchmark::State& state) {
  const ArenaParams arena;
  const Pose pose{32.0, 30.0, 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(Render(pose, arena));
}
BENCHMARK(BM_Render);

void BM_Step(benchmark::State& state) {
  const ArenaParams arena;
  Rng rng(1);
  const Pose pose = RandomPose(arena, rng);
  const Poke poke = SampleRandomPoke(pose, arena, rng);
  for (auto _ : state) benchmark::DoNotOptimize(Step(pose, poke, arena));
}
BENCHMARK(BM_Step);

void BM_Conv1Forward(benchmark::State& state) {
  Rng rng(2);
  const int n = static_cast<int>(state.range(0));
  const NdArray input = NdArray::Uniform({n, 1, 64, 64}, 0, 1, rng);
  const LayerParams conv = LayerParams::Conv(16, 1, 8, rng);
  for (auto _ : state) benchmark::DoNotOptimize(Conv2dForward(input, conv, 4));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Conv1Forward)->Arg(1)->Arg(64);

void BM_Conv2Backward(benchmark::State& state) {
  Rng rng(3);
  const int n = static_cast<int>(state.range(0));
  const NdArray input = NdArray::Uniform({n, 16, 15, 15}, 0, 1, rng);
  LayerParams conv = LayerParams::Conv(32, 16, 4, rng);
  const NdArray grad = NdArray::Uniform({n, 32, 6, 6}, -1, 1, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Conv2dBackward(input, grad, conv, 2));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_Conv2Backward)->Arg(1)->Arg(64);

void BM_JointLossStep(benchmark::State& state) {
  const ArenaParams arena;
  const int n = static_cast<int>(state.range(0));
  const auto records = Records(n, arena);
  const Batch batch = MakeBatch(records, arena);
  ModelParams params = ModelParams::Initialize(arena.image_size(), 9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(JointLoss(batch, params, LossConfig{}, true));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_JointLossStep)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_TrainerStep(benchmark::State& state) {
  const ArenaParams arena;
  const auto records = Records(32, arena);
  Trainer trainer(ModelParams::Initialize(arena.image_size(), 9), TrainConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(trainer.Step(records, arena));
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_TrainerStep)->Unit(benchmark::kMillisecond);

void BM_PlannerDecision(benchmark::State& state) {
  const ArenaParams arena;
  const ModelParams params = ModelParams::Initialize(arena.image_size(), 9);
  InverseModelPolicy policy(params, arena, PlannerConfig{});
  policy.SetGoal(Render(Pose{40, 40, 0.3}, arena));
  const Observation current = Render(Pose{20, 24, 1.0}, arena);
  for (auto _ : state) benchmark::DoNotOptimize(policy.Decide(current));
}
BENCHMARK(BM_PlannerDecision)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace poke

BENCHMARK_MAIN();
