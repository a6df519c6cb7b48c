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
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "poke/error.h"

namespace poke {
namespace {

constexpr uint64_t kSplitSalt = 0x5350'4C49'5421ULL;
constexpr uint64_t kShuffleSalt = 0x5348'5546'464CULL;

void AddScaled(NdArray& dst, const NdArray& src, double scale) {
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
}

}  // namespace

void TrainConfig::Validate() const {
  if (lambda < 0.0) throw InvalidArgument("lambda must be non-negative");
  if (inverse_weight < 0.0) {
    throw InvalidArgument("inverse_weight must be non-negative");
  }
  if (batch_size < 1) throw InvalidArgument("batch_size must be positive");
  if (epochs < 1) throw InvalidArgument("epochs must be positive");
  if (!(learning_rate > 0.0)) {
    throw InvalidArgument("learning_rate must be positive");
  }
  if (jobs < 1) throw InvalidArgument("jobs must be positive");
  if (max_steps < 0) throw InvalidArgument("max_steps must be non-negative");
}

bool IsHeldOut(uint64_t index) { return HashIndex(kSplitSalt, index) % 10 == 0; }

Trainer::Trainer(ModelParams params, const TrainConfig& config)
    : params_(std::move(params)), config_(config) {
  config_.Validate();
  params_.ZeroGrad();
  AdamOptions options;
  options.learning_rate = config_.learning_rate;
  adam_ = std::make_unique<Adam>(params_.Layers(), options);
  if (config_.jobs > 1) replicas_.resize(config_.jobs);
}

int64_t Trainer::steps() const { return adam_->step_count(); }

LossBreakdown Trainer::Step(std::span<const InteractionRecord> records,
                            const ArenaParams& arena) {
  const LossConfig loss_config = config_.loss();
  LossBreakdown loss;
  const int n = static_cast<int>(records.size());
  const int shards = std::min<int>(config_.jobs, n);
  if (shards <= 1) {
    loss = JointLoss(MakeBatch(records, arena), params_, loss_config, true);
  } else {
    // Contiguous shards, each on its own replica; gradients are combined in
    // shard order so the sum does not depend on thread timing.
    std::vector<LossBreakdown> shard_loss(shards);
    std::vector<std::exception_ptr> errors(shards);
    std::vector<std::thread> workers;
    std::vector<std::pair<int, int>> ranges;
    for (int s = 0; s < shards; ++s) {
      ranges.emplace_back(n * s / shards, n * (s + 1) / shards);
    }
    for (int s = 0; s < shards; ++s) {
      workers.emplace_back([&, s] {
        try {
          ModelParams& replica = replicas_[s];
          replica = params_;
          replica.ZeroGrad();
          const auto [lo, hi] = ranges[s];
          shard_loss[s] = JointLoss(MakeBatch(records.subspan(lo, hi - lo), arena),
                                    replica, loss_config, true);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      });
    }
    for (std::thread& w : workers) w.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    const auto master = params_.Layers();
    for (int s = 0; s < shards; ++s) {
      const double w = static_cast<double>(ranges[s].second - ranges[s].first) / n;
      const auto layers = replicas_[s].Layers();
      for (size_t l = 0; l < master.size(); ++l) {
        AddScaled(master[l]->weight_grad, layers[l]->weight_grad, w);
        AddScaled(master[l]->bias_grad, layers[l]->bias_grad, w);
      }
      loss.total += w * shard_loss[s].total;
      loss.inverse += w * shard_loss[s].inverse;
      loss.forward += w * shard_loss[s].forward;
      loss.location += w * shard_loss[s].location;
      loss.angle += w * shard_loss[s].angle;
      loss.length += w * shard_loss[s].length;
    }
  }
  adam_->Step();
  return loss;
}

HeldOutMetrics Evaluate(const std::vector<InteractionRecord>& records,
                        const ArenaParams& arena, const ModelParams& params,
                        const LossConfig& loss_config, int batch_size) {
  HeldOutMetrics m;
  if (records.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan};
  }
  size_t loc_hits = 0, angle_hits = 0, len_hits = 0;
  for (size_t start = 0; start < records.size(); start += batch_size) {
    const size_t count = std::min<size_t>(batch_size, records.size() - start);
    const Batch batch = MakeBatch(
        std::span<const InteractionRecord>(records).subspan(start, count), arena);
    m.loss += JointLossValue(batch, params, loss_config).total * count;
    const auto predicted = PredictActions(batch, params);
    for (size_t i = 0; i < count; ++i) {
      loc_hits += predicted[i].loc_bin == batch.targets[i].loc_bin;
      angle_hits += predicted[i].angle_bin == batch.targets[i].angle_bin;
      len_hits += predicted[i].len_bin == batch.targets[i].len_bin;
    }
  }
  const double n = static_cast<double>(records.size());
  m.loss /= n;
  m.loc_acc = loc_hits / n;
  m.angle_acc = angle_hits / n;
  m.len_acc = len_hits / n;
  return m;
}

double MeanLatentNorm(const std::vector<InteractionRecord>& records,
                      const ArenaParams& arena, const ModelParams& params) {
  if (records.empty()) throw InvalidArgument("no records to encode");
  double total = 0.0;
  constexpr size_t kChunk = 64;
  for (size_t start = 0; start < records.size(); start += kChunk) {
    const size_t count = std::min(kChunk, records.size() - start);
    const Batch batch = MakeBatch(
        std::span<const InteractionRecord>(records).subspan(start, count), arena);
    const NdArray latent = EncodeBatch(batch.images_t, params);
    for (size_t i = 0; i < count; ++i) {
      double sq = 0.0;
      for (double v : latent.row(static_cast<int>(i))) sq += v * v;
      total += std::sqrt(sq);
    }
  }
  return total / static_cast<double>(records.size());
}

TrainResult Train(const DatasetReader& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.Validate();
  if (dataset.size() == 0) throw InvalidArgument("dataset is empty");
  const ArenaParams arena = dataset.header().params;

  std::vector<InteractionRecord> train, heldout;
  for (uint64_t i = 0; i < dataset.size(); ++i) {
    (IsHeldOut(i) ? heldout : train).push_back(dataset.Read(i));
  }
  if (train.empty()) throw InvalidArgument("training split is empty");

  Trainer trainer(ModelParams::Initialize(arena.image_size(), config.seed),
                  config);
  Rng shuffle_rng(config.seed ^ kShuffleSalt);
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::vector<InteractionRecord> batch;

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.UniformInt(i)]);
    }
    double loss_sum = 0.0;
    int batches = 0;
    bool stop = false;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t count =
          std::min<size_t>(config.batch_size, order.size() - start);
      batch.clear();
      for (size_t i = 0; i < count; ++i) batch.push_back(train[order[start + i]]);
      try {
        loss_sum += trainer.Step(batch, arena).total;
      } catch (const NumericError& e) {
        throw NumericError(fmt::format("training diverged in epoch {}: {}",
                                       epoch, e.what()));
      }
      ++batches;
      if (config.max_steps > 0 && trainer.steps() >= config.max_steps) {
        stop = true;
        break;
      }
    }
    const HeldOutMetrics held =
        Evaluate(heldout, arena, trainer.params(), config.loss());
    EpochLog entry{epoch,        loss_sum / batches, held.loss,
                   held.loc_acc, held.angle_acc,     held.len_acc};
    if (!std::isfinite(entry.train_loss)) {
      throw NumericError(
          fmt::format("training diverged in epoch {}: loss is NaN", epoch));
    }
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (stop) break;
  }
  result.steps = trainer.steps();
  result.params = trainer.params();
  result.params.ZeroGrad();
  return result;
}

void WriteTrainingLog(std::ostream& out, const std::vector<EpochLog>& log) {
  out << "epoch,train_loss,heldout_loss,heldout_loc_acc,heldout_angle_acc,"
         "heldout_len_acc\n";
  for (const EpochLog& e : log) {
    fmt::print(out, "{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", e.epoch,
               e.train_loss, e.heldout_loss, e.heldout_loc_acc,
               e.heldout_angle_acc, e.heldout_len_acc);
  }
}

}  // namespace poke
