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

#include "poke/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <fmt/format.h>

#include "poke/rng.h"

namespace poke {
namespace {

// Picks `count` distinct indices from [0, n) with a partial Fisher-Yates.
std::vector<size_t> SampleIndices(size_t n, size_t count, Rng& rng) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  count = std::min(count, n);
  for (size_t i = 0; i < count; ++i) {
    const size_t j = i + rng.UniformInt(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace

double RelativeError(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckResult GradCheck(std::span<LayerParams* const> layers,
                          const std::function<double()>& loss,
                          const std::function<void()>& backward,
                          const GradCheckOptions& options) {
  return GradCheck(
      layers, [&] { return LossSample{loss(), 0}; }, backward, options);
}

GradCheckResult GradCheck(std::span<LayerParams* const> layers,
                          const std::function<LossSample()>& loss,
                          const std::function<void()>& backward,
                          const GradCheckOptions& options) {
  for (LayerParams* layer : layers) layer->ZeroGrad();
  backward();

  Rng rng(options.seed);
  GradCheckResult result;
  auto probe = [&](NdArray& values, const NdArray& grads,
                   const std::string& name) {
    const size_t count = std::max<size_t>(
        1, static_cast<size_t>(std::llround(options.fraction *
                                            static_cast<double>(values.size()))));
    for (size_t i : SampleIndices(values.size(), count, rng)) {
      const double saved = values[i];
      values[i] = saved + options.step;
      const LossSample up = loss();
      values[i] = saved - options.step;
      const LossSample down = loss();
      values[i] = saved;
      if (up.region != down.region) {
        ++result.entries_skipped;
        continue;
      }
      const double numeric = (up.value - down.value) / (2.0 * options.step);
      const double err = RelativeError(grads[i], numeric, options.floor);
      ++result.entries_checked;
      if (std::max(std::abs(grads[i]), std::abs(numeric)) < options.floor) {
        ++result.entries_below_floor;
      }
      if (result.worst.empty() || err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = fmt::format("{}[{}] analytic={:.6e} numeric={:.6e}",
                                   name, i, grads[i], numeric);
      }
    }
  };
  for (size_t l = 0; l < layers.size(); ++l) {
    probe(layers[l]->weights, layers[l]->weight_grad,
          fmt::format("layer {} weights", l));
    probe(layers[l]->biases, layers[l]->bias_grad,
          fmt::format("layer {} biases", l));
  }
  return result;
}

}  // namespace poke
