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

#include "poke/gradcheck_suite.h"

#include <algorithm>
#include <cmath>

#include "poke/datastore.h"
#include "poke/layers.h"
#include "poke/losses.h"
#include "poke/model.h"
#include "poke/sim2d.h"

namespace poke {
namespace {

// Loss sum(c * y) for fixed random c, so d(loss)/dy = c.
double Project(const NdArray& y, const NdArray& c) {
  double s = 0.0;
  for (size_t i = 0; i < y.size(); ++i) s += y[i] * c[i];
  return s;
}

// Wraps an input tensor so the harness perturbs it like a parameter.
LayerParams InputHolder(NdArray values) {
  return LayerParams(std::move(values), NdArray({1}));
}

GradCheckResult CheckConv(int batch, int in_ch, int size, int out_ch,
                          int kernel, int stride, Rng& rng,
                          const GradCheckOptions& options) {
  LayerParams conv = LayerParams::Conv(out_ch, in_ch, kernel, rng);
  conv.biases = NdArray::Uniform({out_ch}, -0.5, 0.5, rng);
  LayerParams input =
      InputHolder(NdArray::Uniform({batch, in_ch, size, size}, -1, 1, rng));
  const NdArray probe = NdArray::Uniform(
      Conv2dForward(input.weights, conv, stride).shape(), -1, 1, rng);
  std::vector<LayerParams*> layers = {&conv, &input};
  return GradCheck(
      layers, [&] { return Project(Conv2dForward(input.weights, conv, stride), probe); },
      [&] {
        const NdArray dx = Conv2dBackward(input.weights, probe, conv, stride);
        input.weight_grad = dx;
      },
      options);
}

GradCheckResult CheckDense(Rng& rng, const GradCheckOptions& options) {
  LayerParams dense = LayerParams::Dense(5, 7, rng);
  dense.biases = NdArray::Uniform({5}, -0.5, 0.5, rng);
  LayerParams input = InputHolder(NdArray::Uniform({3, 7}, -1, 1, rng));
  const NdArray probe = NdArray::Uniform({3, 5}, -1, 1, rng);
  std::vector<LayerParams*> layers = {&dense, &input};
  return GradCheck(
      layers, [&] { return Project(DenseForward(input.weights, dense), probe); },
      [&] { input.weight_grad = DenseBackward(input.weights, probe, dense); },
      options);
}

GradCheckResult CheckRelu(Rng& rng, const GradCheckOptions& options) {
  // Inputs stay at least 0.1 away from the kink.
  NdArray x({4, 9});
  for (double& v : x.values()) {
    const double mag = rng.Uniform(0.1, 1.0);
    v = rng.Uniform() < 0.5 ? -mag : mag;
  }
  LayerParams input = InputHolder(std::move(x));
  const NdArray probe = NdArray::Uniform({4, 9}, -1, 1, rng);
  std::vector<LayerParams*> layers = {&input};
  return GradCheck(
      layers, [&] { return Project(ReluForward(input.weights), probe); },
      [&] { input.weight_grad = ReluBackward(input.weights, probe); },
      options);
}

GradCheckResult CheckCrossEntropy(Rng& rng, const GradCheckOptions& options) {
  LayerParams logits = InputHolder(NdArray::Uniform({13}, -3, 3, rng));
  constexpr int kTarget = 4;
  std::vector<LayerParams*> layers = {&logits};
  return GradCheck(
      layers,
      [&] { return SoftmaxCrossEntropy(logits.weights.values(), kTarget).loss; },
      [&] {
        const auto g = SoftmaxCrossEntropy(logits.weights.values(), kTarget).grad;
        std::copy(g.begin(), g.end(), logits.weight_grad.data());
      },
      options);
}

GradCheckResult CheckL1(Rng& rng, const GradCheckOptions& options) {
  NdArray target = NdArray::Uniform({10}, -1, 1, rng);
  NdArray pred({10});
  for (size_t i = 0; i < pred.size(); ++i) {
    const double gap = rng.Uniform(0.05, 0.5);
    pred[i] = target[i] + (rng.Uniform() < 0.5 ? -gap : gap);
  }
  LayerParams holder = InputHolder(std::move(pred));
  std::vector<LayerParams*> layers = {&holder};
  return GradCheck(
      layers,
      [&] { return L1Loss(holder.weights.values(), target.values()).loss; },
      [&] {
        const auto g = L1Loss(holder.weights.values(), target.values()).grad;
        std::copy(g.begin(), g.end(), holder.weight_grad.data());
      },
      options);
}

std::vector<InteractionRecord> RandomRecords(int count, const ArenaParams& arena,
                                             Rng& rng) {
  std::vector<InteractionRecord> records;
  for (int i = 0; i < count; ++i) {
    InteractionRecord r;
    r.pose_t = RandomPose(arena, rng);
    r.poke = SampleRandomPoke(r.pose_t, arena, rng);
    r.pose_t1 = Step(r.pose_t, r.poke, arena);
    records.push_back(r);
  }
  return records;
}

GradCheckResult CheckNetwork(const LossConfig& loss, uint64_t seed,
                             const GradCheckOptions& options) {
  const ArenaParams arena;
  Rng rng(seed);
  ModelParams params = ModelParams::Initialize(arena.image_size(), rng.Next());
  // Nonzero biases so their gradients are exercised away from zero.
  for (LayerParams* layer : params.Layers()) {
    for (double& b : layer->biases.values()) b = rng.Uniform(-0.05, 0.05);
  }
  const std::vector<InteractionRecord> records = RandomRecords(2, arena, rng);
  Batch batch = MakeBatch(records, arena);
  // A detached target is a constant of the loss, so it is frozen at the
  // unperturbed parameters for the finite differences too.
  if (loss.detach_target) batch.forward_target = EncodeBatch(batch.images_t1, params);
  std::vector<LayerParams*> layers = params.Layers();
  return GradCheck(
      layers,
      [&] {
        const LossBreakdown b = JointLossValue(batch, params, loss);
        return LossSample{b.total, b.linear_region};
      },
      [&] { JointLoss(batch, params, loss, /*accumulate_gradients=*/true); },
      options);
}

}  // namespace

std::vector<GradCheckReport> RunGradCheckSuite(
    const GradCheckSuiteOptions& options) {
  Rng rng(options.seed);
  GradCheckOptions exhaustive{options.step, 1.0, rng.Next()};
  GradCheckOptions sampled{options.step, options.network_fraction, rng.Next(),
                           options.network_floor};
  std::vector<GradCheckReport> reports;
  reports.push_back({"conv 8x8 stride 4",
                     CheckConv(2, 1, 20, 3, 8, 4, rng, exhaustive)});
  reports.push_back({"conv 4x4 stride 2",
                     CheckConv(2, 3, 10, 4, 4, 2, rng, exhaustive)});
  reports.push_back({"conv 3x3 stride 1",
                     CheckConv(2, 4, 6, 5, 3, 1, rng, exhaustive)});
  reports.push_back({"dense", CheckDense(rng, exhaustive)});
  reports.push_back({"relu", CheckRelu(rng, exhaustive)});
  reports.push_back({"softmax cross-entropy", CheckCrossEntropy(rng, exhaustive)});
  reports.push_back({"l1", CheckL1(rng, exhaustive)});
  reports.push_back({"joint network",
                     CheckNetwork(LossConfig{0.1, 1.0, true}, rng.Next(), sampled)});
  reports.push_back({"joint network, undetached target",
                     CheckNetwork(LossConfig{0.1, 1.0, false}, rng.Next(), sampled)});
  return reports;
}

double MaxRelativeError(const std::vector<GradCheckReport>& reports) {
  double worst = 0.0;
  for (const GradCheckReport& r : reports) {
    worst = std::max(worst, r.result.max_rel_error);
  }
  return worst;
}

}  // namespace poke
