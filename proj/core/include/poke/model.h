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

#ifndef POKE_MODEL_H_
#define POKE_MODEL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poke/checkpoint.h"
#include "poke/datastore.h"
#include "poke/discretize.h"
#include "poke/layers.h"
#include "poke/ndarray.h"
#include "poke/sim2d.h"

namespace poke {

inline constexpr int kLatentDim = 128;
inline constexpr int kInverseHidden = 128;
inline constexpr int kForwardHidden = 128;

using LatentState = std::vector<double>;

// Parameters of the joint model:
//   encoder  conv 8x8/4 (16) -> relu -> conv 4x4/2 (32) -> relu
//            -> conv 3x3/1 (32) -> relu -> dense to kLatentDim
//   inverse  [x_t, x_t1] -> dense 128 -> relu -> location logits;
//            [trunk, onehot(loc)] -> angle logits;
//            [trunk, onehot(loc), onehot(angle)] -> length logits
//   forward  [x_t, u_t] -> dense 128 -> relu -> dense kLatentDim
// One encoder serves both images.
struct ModelParams {
  int image_size = 64;

  LayerParams conv1;
  LayerParams conv2;
  LayerParams conv3;
  LayerParams encoder_fc;

  LayerParams inverse_trunk;
  LayerParams inverse_location;
  LayerParams inverse_angle;
  LayerParams inverse_length;

  LayerParams forward_hidden;
  LayerParams forward_out;

  static ModelParams Initialize(int image_size, uint64_t seed);

  // All layers in a fixed order (the checkpoint and optimizer order).
  std::vector<LayerParams*> Layers();
  std::vector<const LayerParams*> Layers() const;
  static const std::vector<std::string>& LayerNames();

  void ZeroGrad();
  size_t parameter_count() const;

  Checkpoint ToCheckpoint(std::map<std::string, std::string> metadata) const;
  // Throws FormatError when the stored architecture differs from this one.
  static ModelParams FromCheckpoint(const Checkpoint& checkpoint);
};

// Flattened input extent of encoder_fc for a given image size.
int EncoderFeatureSize(int image_size);

// ---------------------------------------------------------------------------
// Single-sample inference.

LatentState Encode(const Observation& image, const ModelParams& params);

struct InverseLogits {
  std::vector<double> location;  // kLocationBins
  std::vector<double> angle;     // kAngleBins
  std::vector<double> length;    // kLengthBins
};

// Hidden trunk activation (post-relu) shared by the three inverse heads.
std::vector<double> InverseTrunk(std::span<const double> x_t,
                                 std::span<const double> x_t1,
                                 const ModelParams& params);
std::vector<double> LocationLogits(std::span<const double> trunk,
                                   const ModelParams& params);
std::vector<double> AngleLogits(std::span<const double> trunk, int loc_bin,
                                const ModelParams& params);
std::vector<double> LengthLogits(std::span<const double> trunk, int loc_bin,
                                 int angle_bin, const ModelParams& params);

// Inference-time chain: angle conditions on argmax location, length on
// argmax location and angle.
InverseLogits InversePredict(std::span<const double> x_t,
                             std::span<const double> x_t1,
                             const ModelParams& params);
// Same with explicit conditioning bins (teacher forcing).
InverseLogits InversePredict(std::span<const double> x_t,
                             std::span<const double> x_t1, int loc_bin,
                             int angle_bin, const ModelParams& params);

// Argmax action from the inference chain.
DiscretizedAction ArgmaxAction(std::span<const double> x_t,
                               std::span<const double> x_t1,
                               const ModelParams& params);

LatentState ForwardPredict(std::span<const double> x_t, const Poke& poke,
                           const ArenaParams& arena, const ModelParams& params);

// ---------------------------------------------------------------------------
// Batched training.

// Rendered images and targets for a set of interaction records.
struct Batch {
  NdArray images_t;   // [N, 1, S, S]
  NdArray images_t1;  // [N, 1, S, S]
  NdArray actions;    // [N, kActionFeatures]
  std::vector<DiscretizedAction> targets;
  // When set, [N, kLatentDim] latents used as the constant forward target in
  // place of the encoded images_t1 (requires a detached target).
  std::optional<NdArray> forward_target;

  int size() const { return static_cast<int>(targets.size()); }
};

Batch MakeBatch(std::span<const InteractionRecord> records,
                const ArenaParams& arena);

struct LossConfig {
  double lambda = 0.1;
  // Weight of the inverse loss; 0 trains the forward objective alone.
  double inverse_weight = 1.0;
  // When true the x_{t+1} target of the forward loss is a constant.
  bool detach_target = true;
};

// Batch means of each loss term.
struct LossBreakdown {
  double total = 0.0;
  double inverse = 0.0;  // sum of the three cross entropies
  double forward = 0.0;  // L1 between predicted and encoded x_{t+1}
  double location = 0.0;
  double angle = 0.0;
  double length = 0.0;
  // Hash of every ReLU gate and L1 residual sign: equal values mean the
  // loss was evaluated in the same linear piece of the network.
  uint64_t linear_region = 0;
};

// total = inverse_weight * L_inv + lambda * L_fwd, averaged over the batch.
// Inverse heads are teacher-forced with the ground-truth bins. With
// `accumulate_gradients` the gradient of `total` is added to params'
// gradient accumulators. Throws NumericError on a non-finite loss.
LossBreakdown JointLoss(const Batch& batch, ModelParams& params,
                        const LossConfig& config, bool accumulate_gradients);
// Loss only; never touches gradients.
LossBreakdown JointLossValue(const Batch& batch, const ModelParams& params,
                             const LossConfig& config);

// Argmax inference chain over a batch; used for held-out accuracy.
std::vector<DiscretizedAction> PredictActions(const Batch& batch,
                                              const ModelParams& params);

// Encodes every image of the batch (rows of images_t) into [N, kLatentDim].
NdArray EncodeBatch(const NdArray& images, const ModelParams& params);

}  // namespace poke

#endif  // POKE_MODEL_H_
