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

#include "poke/model.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "poke/error.h"
#include "poke/losses.h"

namespace poke {
namespace {

constexpr int kConv1Channels = 16;
constexpr int kConv2Channels = 32;
constexpr int kConv3Channels = 32;
constexpr int kConv1Kernel = 8, kConv1Stride = 4;
constexpr int kConv2Kernel = 4, kConv2Stride = 2;
constexpr int kConv3Kernel = 3, kConv3Stride = 1;

constexpr int kAngleInput = kInverseHidden + kLocationBins;
constexpr int kLengthInput = kInverseHidden + kLocationBins + kAngleBins;
constexpr int kForwardInput = kLatentDim + kActionFeatures;

// Row-wise concatenation of rank-2 arrays with equal row counts.
NdArray ConcatColumns(std::initializer_list<const NdArray*> parts) {
  const int n = (*parts.begin())->dim(0);
  int width = 0;
  for (const NdArray* p : parts) width += p->dim(1);
  NdArray out({n, width});
  for (int i = 0; i < n; ++i) {
    double* dst = out.row(i).data();
    for (const NdArray* p : parts) {
      const auto src = p->row(i);
      dst = std::copy(src.begin(), src.end(), dst);
    }
  }
  return out;
}

NdArray OneHot(const std::vector<int>& bins, int classes) {
  NdArray out({static_cast<int>(bins.size()), classes});
  for (size_t i = 0; i < bins.size(); ++i) {
    out.row(static_cast<int>(i))[bins[i]] = 1.0;
  }
  return out;
}

// Adds columns [offset, offset + width) of `src` row i into `dst` row
// dst_row_offset + i.
void AddColumns(const NdArray& src, int offset, int width, NdArray& dst,
                int dst_row_offset, double scale = 1.0) {
  for (int i = 0; i < src.dim(0); ++i) {
    const auto s = src.row(i);
    auto d = dst.row(dst_row_offset + i);
    for (int j = 0; j < width; ++j) d[j] += scale * s[offset + j];
  }
}

int Argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

NdArray RowsToArray(std::span<const double> v) {
  return NdArray({1, static_cast<int>(v.size())},
                 std::vector<double>(v.begin(), v.end()));
}

std::vector<double> FirstRow(const NdArray& a) {
  const auto r = a.row(0);
  return {r.begin(), r.end()};
}

void CheckLatent(std::span<const double> x, const char* what) {
  if (x.size() != static_cast<size_t>(kLatentDim)) {
    throw InvalidArgument(fmt::format("{} has length {}, expected {}", what,
                                      x.size(), kLatentDim));
  }
}

// Folds the sign pattern (> 0) of `values` into `hash`.
void HashSigns(std::span<const double> values, uint64_t& hash) {
  uint64_t word = 0;
  int bits = 0;
  for (double v : values) {
    word = (word << 1) | (v > 0.0 ? 1u : 0u);
    if (++bits == 64) {
      hash = Rng::Mix(hash ^ word);
      word = 0;
      bits = 0;
    }
  }
  hash = Rng::Mix(hash ^ word ^ (static_cast<uint64_t>(bits) << 58));
}

struct EncoderTrace {
  NdArray pre1, h1, pre2, h2, pre3, h3, flat, latent;
};

EncoderTrace EncoderForward(const NdArray& images, const ModelParams& p) {
  EncoderTrace t;
  t.pre1 = Conv2dForward(images, p.conv1, kConv1Stride);
  t.h1 = ReluForward(t.pre1);
  t.pre2 = Conv2dForward(t.h1, p.conv2, kConv2Stride);
  t.h2 = ReluForward(t.pre2);
  t.pre3 = Conv2dForward(t.h2, p.conv3, kConv3Stride);
  t.h3 = ReluForward(t.pre3);
  const int n = images.dim(0);
  t.flat = t.h3.Reshaped({n, static_cast<int>(t.h3.size()) / n});
  t.latent = DenseForward(t.flat, p.encoder_fc);
  return t;
}

void EncoderBackward(const NdArray& images, const EncoderTrace& t,
                     const NdArray& grad_latent, ModelParams& p) {
  const NdArray d_flat = DenseBackward(t.flat, grad_latent, p.encoder_fc);
  const NdArray d_h3 = d_flat.Reshaped(t.h3.shape());
  const NdArray d_h2 = Conv2dBackward(t.h2, ReluBackward(t.pre3, d_h3),
                                      p.conv3, kConv3Stride);
  const NdArray d_h1 = Conv2dBackward(t.h1, ReluBackward(t.pre2, d_h2),
                                      p.conv2, kConv2Stride);
  Conv2dBackward(images, ReluBackward(t.pre1, d_h1), p.conv1, kConv1Stride,
                 /*input_grad=*/false);
}

void CheckImages(const NdArray& images, int image_size) {
  if (images.rank() != 4 || images.dim(1) != 1 || images.dim(2) != image_size ||
      images.dim(3) != image_size) {
    throw InvalidArgument(fmt::format(
        "images {} do not match model input [N, 1, {}, {}]",
        images.ShapeString(), image_size, image_size));
  }
}

struct InverseTrace {
  NdArray z, trunk_pre, trunk, angle_in, length_in;
  NdArray location, angle, length;  // logits
};

InverseTrace InverseForward(const NdArray& latent, int n,
                            const std::vector<int>& loc_cond,
                            const std::vector<int>& angle_cond,
                            const ModelParams& p) {
  InverseTrace t;
  t.z = NdArray({n, 2 * kLatentDim});
  for (int i = 0; i < n; ++i) {
    auto dst = t.z.row(i);
    const auto a = latent.row(i);
    const auto b = latent.row(n + i);
    std::copy(a.begin(), a.end(), dst.begin());
    std::copy(b.begin(), b.end(), dst.begin() + kLatentDim);
  }
  t.trunk_pre = DenseForward(t.z, p.inverse_trunk);
  t.trunk = ReluForward(t.trunk_pre);
  t.location = DenseForward(t.trunk, p.inverse_location);
  const NdArray loc_hot = OneHot(loc_cond, kLocationBins);
  const NdArray angle_hot = OneHot(angle_cond, kAngleBins);
  t.angle_in = ConcatColumns({&t.trunk, &loc_hot});
  t.angle = DenseForward(t.angle_in, p.inverse_angle);
  t.length_in = ConcatColumns({&t.trunk, &loc_hot, &angle_hot});
  t.length = DenseForward(t.length_in, p.inverse_length);
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// ModelParams

int EncoderFeatureSize(int image_size) {
  int s = ConvOutputSize(image_size, kConv1Kernel, kConv1Stride);
  s = ConvOutputSize(s, kConv2Kernel, kConv2Stride);
  s = ConvOutputSize(s, kConv3Kernel, kConv3Stride);
  return kConv3Channels * s * s;
}

ModelParams ModelParams::Initialize(int image_size, uint64_t seed) {
  Rng rng(seed);
  ModelParams p;
  p.image_size = image_size;
  p.conv1 = LayerParams::Conv(kConv1Channels, 1, kConv1Kernel, rng);
  p.conv2 = LayerParams::Conv(kConv2Channels, kConv1Channels, kConv2Kernel, rng);
  p.conv3 = LayerParams::Conv(kConv3Channels, kConv2Channels, kConv3Kernel, rng);
  p.encoder_fc =
      LayerParams::Dense(kLatentDim, EncoderFeatureSize(image_size), rng);
  p.inverse_trunk = LayerParams::Dense(kInverseHidden, 2 * kLatentDim, rng);
  p.inverse_location = LayerParams::Dense(kLocationBins, kInverseHidden, rng);
  p.inverse_angle = LayerParams::Dense(kAngleBins, kAngleInput, rng);
  p.inverse_length = LayerParams::Dense(kLengthBins, kLengthInput, rng);
  p.forward_hidden = LayerParams::Dense(kForwardHidden, kForwardInput, rng);
  p.forward_out = LayerParams::Dense(kLatentDim, kForwardHidden, rng);
  return p;
}

std::vector<LayerParams*> ModelParams::Layers() {
  return {&conv1,          &conv2,           &conv3,
          &encoder_fc,     &inverse_trunk,   &inverse_location,
          &inverse_angle,  &inverse_length,  &forward_hidden,
          &forward_out};
}

std::vector<const LayerParams*> ModelParams::Layers() const {
  auto layers = const_cast<ModelParams*>(this)->Layers();
  return {layers.begin(), layers.end()};
}

const std::vector<std::string>& ModelParams::LayerNames() {
  static const std::vector<std::string> names = {
      "encoder.conv1",   "encoder.conv2",    "encoder.conv3",
      "encoder.fc",      "inverse.trunk",    "inverse.location",
      "inverse.angle",   "inverse.length",   "forward.hidden",
      "forward.out"};
  return names;
}

void ModelParams::ZeroGrad() {
  for (LayerParams* layer : Layers()) layer->ZeroGrad();
}

size_t ModelParams::parameter_count() const {
  size_t n = 0;
  for (const LayerParams* layer : Layers()) n += layer->parameter_count();
  return n;
}

Checkpoint ModelParams::ToCheckpoint(
    std::map<std::string, std::string> metadata) const {
  Checkpoint c;
  metadata["image_size"] = std::to_string(image_size);
  c.metadata = std::move(metadata);
  const auto layers = Layers();
  for (size_t i = 0; i < layers.size(); ++i) {
    c.layers.push_back(
        {LayerNames()[i], LayerParams(layers[i]->weights, layers[i]->biases)});
  }
  return c;
}

ModelParams ModelParams::FromCheckpoint(const Checkpoint& checkpoint) {
  int image_size = 64;
  if (auto it = checkpoint.metadata.find("image_size");
      it != checkpoint.metadata.end()) {
    image_size = std::stoi(it->second);
  }
  ModelParams p = Initialize(image_size, 0);
  const auto layers = p.Layers();
  if (checkpoint.layers.size() != layers.size()) {
    throw FormatError(fmt::format("checkpoint has {} layers, model has {}",
                                  checkpoint.layers.size(), layers.size()));
  }
  for (size_t i = 0; i < layers.size(); ++i) {
    const NamedLayer& stored = checkpoint.layers[i];
    if (stored.name != LayerNames()[i] ||
        !stored.params.weights.SameShape(layers[i]->weights) ||
        !stored.params.biases.SameShape(layers[i]->biases)) {
      throw FormatError(fmt::format(
          "checkpoint layer {} '{}' {} does not match model layer '{}' {}", i,
          stored.name, stored.params.weights.ShapeString(), LayerNames()[i],
          layers[i]->weights.ShapeString()));
    }
    *layers[i] = LayerParams(stored.params.weights, stored.params.biases);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Inference

NdArray EncodeBatch(const NdArray& images, const ModelParams& params) {
  CheckImages(images, params.image_size);
  return EncoderForward(images, params).latent;
}

LatentState Encode(const Observation& image, const ModelParams& params) {
  if (image.size() != params.image_size) {
    throw InvalidArgument(fmt::format("image size {} does not match model {}",
                                      image.size(), params.image_size));
  }
  NdArray input({1, 1, image.size(), image.size()}, image.pixels());
  return FirstRow(EncodeBatch(input, params));
}

std::vector<double> InverseTrunk(std::span<const double> x_t,
                                 std::span<const double> x_t1,
                                 const ModelParams& params) {
  CheckLatent(x_t, "x_t");
  CheckLatent(x_t1, "x_t1");
  NdArray z({1, 2 * kLatentDim});
  std::copy(x_t.begin(), x_t.end(), z.data());
  std::copy(x_t1.begin(), x_t1.end(), z.data() + kLatentDim);
  return FirstRow(ReluForward(DenseForward(z, params.inverse_trunk)));
}

std::vector<double> LocationLogits(std::span<const double> trunk,
                                   const ModelParams& params) {
  return FirstRow(DenseForward(RowsToArray(trunk), params.inverse_location));
}

std::vector<double> AngleLogits(std::span<const double> trunk, int loc_bin,
                                const ModelParams& params) {
  if (loc_bin < 0 || loc_bin >= kLocationBins) {
    throw OutOfRange("location bin out of range");
  }
  NdArray in({1, kAngleInput});
  std::copy(trunk.begin(), trunk.end(), in.data());
  in[kInverseHidden + loc_bin] = 1.0;
  return FirstRow(DenseForward(in, params.inverse_angle));
}

std::vector<double> LengthLogits(std::span<const double> trunk, int loc_bin,
                                 int angle_bin, const ModelParams& params) {
  if (loc_bin < 0 || loc_bin >= kLocationBins || angle_bin < 0 ||
      angle_bin >= kAngleBins) {
    throw OutOfRange("conditioning bin out of range");
  }
  NdArray in({1, kLengthInput});
  std::copy(trunk.begin(), trunk.end(), in.data());
  in[kInverseHidden + loc_bin] = 1.0;
  in[kInverseHidden + kLocationBins + angle_bin] = 1.0;
  return FirstRow(DenseForward(in, params.inverse_length));
}

InverseLogits InversePredict(std::span<const double> x_t,
                             std::span<const double> x_t1,
                             const ModelParams& params) {
  const std::vector<double> trunk = InverseTrunk(x_t, x_t1, params);
  InverseLogits out;
  out.location = LocationLogits(trunk, params);
  const int loc = Argmax(out.location);
  out.angle = AngleLogits(trunk, loc, params);
  out.length = LengthLogits(trunk, loc, Argmax(out.angle), params);
  return out;
}

InverseLogits InversePredict(std::span<const double> x_t,
                             std::span<const double> x_t1, int loc_bin,
                             int angle_bin, const ModelParams& params) {
  const std::vector<double> trunk = InverseTrunk(x_t, x_t1, params);
  return {LocationLogits(trunk, params), AngleLogits(trunk, loc_bin, params),
          LengthLogits(trunk, loc_bin, angle_bin, params)};
}

DiscretizedAction ArgmaxAction(std::span<const double> x_t,
                               std::span<const double> x_t1,
                               const ModelParams& params) {
  const InverseLogits logits = InversePredict(x_t, x_t1, params);
  DiscretizedAction a;
  a.loc_bin = Argmax(logits.location);
  a.angle_bin = Argmax(logits.angle);
  a.len_bin = Argmax(logits.length);
  return a;
}

LatentState ForwardPredict(std::span<const double> x_t, const Poke& poke,
                           const ArenaParams& arena,
                           const ModelParams& params) {
  CheckLatent(x_t, "x_t");
  NdArray in({1, kForwardInput});
  std::copy(x_t.begin(), x_t.end(), in.data());
  const auto u = EncodeAction(poke, arena);
  std::copy(u.begin(), u.end(), in.data() + kLatentDim);
  const NdArray hidden =
      ReluForward(DenseForward(in, params.forward_hidden));
  return FirstRow(DenseForward(hidden, params.forward_out));
}

// ---------------------------------------------------------------------------
// Training

Batch MakeBatch(std::span<const InteractionRecord> records,
                const ArenaParams& arena) {
  const int n = static_cast<int>(records.size());
  const int s = arena.image_size();
  Batch b;
  b.images_t = NdArray({n, 1, s, s});
  b.images_t1 = NdArray({n, 1, s, s});
  b.actions = NdArray({n, kActionFeatures});
  b.targets.reserve(n);
  for (int i = 0; i < n; ++i) {
    const InteractionRecord& r = records[i];
    const Observation before = Render(r.pose_t, arena);
    const Observation after = Render(r.pose_t1, arena);
    std::copy(before.pixels().begin(), before.pixels().end(),
              b.images_t.row(i).begin());
    std::copy(after.pixels().begin(), after.pixels().end(),
              b.images_t1.row(i).begin());
    const auto u = EncodeAction(r.poke, arena);
    std::copy(u.begin(), u.end(), b.actions.row(i).begin());
    b.targets.push_back(Discretize(r.poke, arena));
  }
  return b;
}

LossBreakdown JointLoss(const Batch& batch, ModelParams& params,
                        const LossConfig& config, bool accumulate_gradients) {
  const int n = batch.size();
  if (n == 0) throw InvalidArgument("empty batch");
  if (config.lambda < 0.0 || config.inverse_weight < 0.0) {
    throw InvalidArgument("loss weights must be non-negative");
  }
  CheckImages(batch.images_t, params.image_size);
  CheckImages(batch.images_t1, params.image_size);
  if (batch.forward_target) {
    if (!config.detach_target) {
      throw InvalidArgument("an explicit forward target is always detached");
    }
    if (batch.forward_target->shape() != std::vector<int>{n, kLatentDim}) {
      throw InvalidArgument(fmt::format("forward target has shape {}",
                                        batch.forward_target->ShapeString()));
    }
  }

  // Both images go through the same encoder in one pass: rows [0, n) are
  // x_t, rows [n, 2n) are x_t1.
  NdArray images({2 * n, 1, params.image_size, params.image_size});
  std::copy(batch.images_t.values().begin(), batch.images_t.values().end(),
            images.data());
  std::copy(batch.images_t1.values().begin(), batch.images_t1.values().end(),
            images.data() + batch.images_t.size());
  const EncoderTrace enc = EncoderForward(images, params);

  std::vector<int> loc_cond(n), angle_cond(n);
  for (int i = 0; i < n; ++i) {
    loc_cond[i] = batch.targets[i].loc_bin;
    angle_cond[i] = batch.targets[i].angle_bin;
  }
  const InverseTrace inv =
      InverseForward(enc.latent, n, loc_cond, angle_cond, params);

  NdArray x_t({n, kLatentDim});
  for (int i = 0; i < n; ++i) {
    const auto src = enc.latent.row(i);
    std::copy(src.begin(), src.end(), x_t.row(i).begin());
  }
  const NdArray fwd_in = ConcatColumns({&x_t, &batch.actions});
  const NdArray fwd_pre = DenseForward(fwd_in, params.forward_hidden);
  const NdArray fwd_hidden = ReluForward(fwd_pre);
  const NdArray predicted = DenseForward(fwd_hidden, params.forward_out);

  const double inv_n = 1.0 / n;
  LossBreakdown loss;
  NdArray d_location({n, kLocationBins});
  NdArray d_angle({n, kAngleBins});
  NdArray d_length({n, kLengthBins});
  NdArray d_predicted({n, kLatentDim});
  for (int i = 0; i < n; ++i) {
    const DiscretizedAction& target = batch.targets[i];
    const LossWithGrad loc = SoftmaxCrossEntropy(inv.location.row(i), target.loc_bin);
    const LossWithGrad ang = SoftmaxCrossEntropy(inv.angle.row(i), target.angle_bin);
    const LossWithGrad len = SoftmaxCrossEntropy(inv.length.row(i), target.len_bin);
    const LossWithGrad fwd =
        L1Loss(predicted.row(i), batch.forward_target
                                     ? batch.forward_target->row(i)
                                     : enc.latent.row(n + i));
    loss.location += loc.loss;
    loss.angle += ang.loss;
    loss.length += len.loss;
    loss.forward += fwd.loss;
    const double wi = config.inverse_weight * inv_n;
    const double wf = config.lambda * inv_n;
    for (int j = 0; j < kLocationBins; ++j) d_location.row(i)[j] = wi * loc.grad[j];
    for (int j = 0; j < kAngleBins; ++j) d_angle.row(i)[j] = wi * ang.grad[j];
    for (int j = 0; j < kLengthBins; ++j) d_length.row(i)[j] = wi * len.grad[j];
    for (int j = 0; j < kLatentDim; ++j) d_predicted.row(i)[j] = wf * fwd.grad[j];
  }
  uint64_t region = 0;
  for (const NdArray* pre : {&enc.pre1, &enc.pre2, &enc.pre3, &inv.trunk_pre, &fwd_pre}) {
    HashSigns(pre->values(), region);
  }
  HashSigns(d_predicted.values(), region);
  loss.linear_region = region;
  loss.location *= inv_n;
  loss.angle *= inv_n;
  loss.length *= inv_n;
  loss.forward *= inv_n;
  loss.inverse = loss.location + loss.angle + loss.length;
  loss.total = config.inverse_weight * loss.inverse + config.lambda * loss.forward;
  if (!std::isfinite(loss.total)) {
    throw NumericError(fmt::format("non-finite joint loss {}", loss.total));
  }
  if (!accumulate_gradients) return loss;

  NdArray d_latent({2 * n, kLatentDim});
  if (config.inverse_weight > 0.0) {
    NdArray d_trunk =
        DenseBackward(inv.trunk, d_location, params.inverse_location);
    const NdArray d_angle_in =
        DenseBackward(inv.angle_in, d_angle, params.inverse_angle);
    const NdArray d_length_in =
        DenseBackward(inv.length_in, d_length, params.inverse_length);
    AddColumns(d_angle_in, 0, kInverseHidden, d_trunk, 0);
    AddColumns(d_length_in, 0, kInverseHidden, d_trunk, 0);
    const NdArray d_z = DenseBackward(
        inv.z, ReluBackward(inv.trunk_pre, d_trunk), params.inverse_trunk);
    AddColumns(d_z, 0, kLatentDim, d_latent, 0);
    AddColumns(d_z, kLatentDim, kLatentDim, d_latent, n);
  }
  if (config.lambda > 0.0) {
    const NdArray d_hidden =
        DenseBackward(fwd_hidden, d_predicted, params.forward_out);
    const NdArray d_fwd_in = DenseBackward(
        fwd_in, ReluBackward(fwd_pre, d_hidden), params.forward_hidden);
    AddColumns(d_fwd_in, 0, kLatentDim, d_latent, 0);
    if (!config.detach_target) {
      // d|p - t| / dt = -d|p - t| / dp
      AddColumns(d_predicted, 0, kLatentDim, d_latent, n, -1.0);
    }
  }
  EncoderBackward(images, enc, d_latent, params);
  return loss;
}

LossBreakdown JointLossValue(const Batch& batch, const ModelParams& params,
                             const LossConfig& config) {
  // The forward-only path reads the parameters and writes nothing.
  return JointLoss(batch, const_cast<ModelParams&>(params), config, false);
}

std::vector<DiscretizedAction> PredictActions(const Batch& batch,
                                              const ModelParams& params) {
  const int n = batch.size();
  NdArray images({2 * n, 1, params.image_size, params.image_size});
  std::copy(batch.images_t.values().begin(), batch.images_t.values().end(),
            images.data());
  std::copy(batch.images_t1.values().begin(), batch.images_t1.values().end(),
            images.data() + batch.images_t.size());
  const NdArray latent = EncodeBatch(images, params);

  // Location first, then condition the other heads on the argmax choices.
  std::vector<int> loc(n, 0), angle(n, 0);
  InverseTrace t = InverseForward(latent, n, loc, angle, params);
  for (int i = 0; i < n; ++i) loc[i] = Argmax(t.location.row(i));
  t = InverseForward(latent, n, loc, angle, params);
  for (int i = 0; i < n; ++i) angle[i] = Argmax(t.angle.row(i));
  t = InverseForward(latent, n, loc, angle, params);

  std::vector<DiscretizedAction> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = {loc[i], angle[i], Argmax(t.length.row(i))};
  }
  return out;
}

}  // namespace poke
