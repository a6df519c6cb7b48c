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

#ifndef POKE_TRAINER_H_
#define POKE_TRAINER_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "poke/adam.h"
#include "poke/datastore.h"
#include "poke/model.h"

namespace poke {

struct TrainConfig {
  double lambda = 0.1;
  int batch_size = 32;
  int epochs = 10;
  double learning_rate = 1e-4;
  uint64_t seed = 1;
  double inverse_weight = 1.0;
  bool detach_target = true;
  // Worker threads per minibatch. Results are bit-identical for a fixed
  // value but may differ between values.
  int jobs = 1;
  // Stop after this many optimizer steps (0 = no limit).
  int64_t max_steps = 0;

  LossConfig loss() const { return {lambda, inverse_weight, detach_target}; }
  void Validate() const;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;  // mean minibatch loss during the epoch
  double heldout_loss = 0.0;
  double heldout_loc_acc = 0.0;
  double heldout_angle_acc = 0.0;
  double heldout_len_acc = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
  int64_t steps = 0;
};

// Records whose index hashes into the held-out tenth.
bool IsHeldOut(uint64_t index);

struct HeldOutMetrics {
  double loss = 0.0;
  double loc_acc = 0.0;
  double angle_acc = 0.0;
  double len_acc = 0.0;
};

// Loss (teacher-forced) and argmax-chain top-1 accuracies.
HeldOutMetrics Evaluate(const std::vector<InteractionRecord>& records,
                        const ArenaParams& arena, const ModelParams& params,
                        const LossConfig& loss_config, int batch_size = 64);

// Mean L2 norm of encoder outputs over the images of `records` (before
// images only).
double MeanLatentNorm(const std::vector<InteractionRecord>& records,
                      const ArenaParams& arena, const ModelParams& params);

// Deterministic trainer state: one optimizer step at a time. Used directly
// by tests that need step-level control.
class Trainer {
 public:
  Trainer(ModelParams params, const TrainConfig& config);
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  // One Adam step on the given records; returns the batch loss breakdown.
  LossBreakdown Step(std::span<const InteractionRecord> records,
                     const ArenaParams& arena);

  const ModelParams& params() const { return params_; }
  ModelParams& params() { return params_; }
  int64_t steps() const;

 private:
  ModelParams params_;
  TrainConfig config_;
  std::vector<ModelParams> replicas_;
  std::unique_ptr<Adam> adam_;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Seeded shuffling, minibatch Adam over the training split, held-out
// evaluation after each epoch. Throws NumericError naming the epoch on
// divergence.
TrainResult Train(const DatasetReader& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

void WriteTrainingLog(std::ostream& out, const std::vector<EpochLog>& log);

}  // namespace poke

#endif  // POKE_TRAINER_H_
