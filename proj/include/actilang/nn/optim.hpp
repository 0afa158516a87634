// Copyright 2026 The actilang Authors.
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

#pragma once

#include <cstdint>
#include <vector>

#include "actilang/nn/tape.hpp"

namespace actilang::nn {

struct AdamConfig {
  Real lr = 1e-3;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;
};

struct OptimizerState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::int64_t step = 0;
  AdamConfig config;
};

// Adaptive-moment optimizer with bias correction. Frozen parameters are
// skipped entirely; trainable ones must have a gradient at every step.
class Adam {
 public:
  Adam(ParameterList params, AdamConfig config = {});

  // One update at learning rate lr, then clears all gradients.
  void step(Real lr);
  void step() { step(state_.config.lr); }

  const OptimizerState& state() const { return state_; }
  void set_state(OptimizerState state);
  const ParameterList& params() const { return params_; }

 private:
  ParameterList params_;
  OptimizerState state_;
};

// Linear warmup from start_factor * base_lr at step 0 to base_lr at
// warmup_steps, constant afterwards.
struct WarmupSchedule {
  Real base_lr = 1e-3;
  std::int64_t warmup_steps = 100;
  Real start_factor = 0.1;
};

Real lr_at(const WarmupSchedule& schedule, std::int64_t step);

}  // namespace actilang::nn
