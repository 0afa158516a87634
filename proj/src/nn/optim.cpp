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

#include "actilang/nn/optim.hpp"

#include <algorithm>
#include <cmath>

#include "actilang/errors.hpp"

namespace actilang::nn {

Adam::Adam(ParameterList params, AdamConfig config) : params_(std::move(params)) {
  state_.config = config;
  for (const Parameter* p : params_) {
    state_.first_moment.push_back(Tensor::zeros_like(p->value));
    state_.second_moment.push_back(Tensor::zeros_like(p->value));
  }
}

void Adam::set_state(OptimizerState state) {
  if (state.first_moment.size() != params_.size() || state.second_moment.size() != params_.size()) {
    throw ValidationError("optimizer state has " + std::to_string(state.first_moment.size()) +
                          " moments for " + std::to_string(params_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    require_shape(state.first_moment[i], params_[i]->value.shape(), "optimizer first moment");
    require_shape(state.second_moment[i], params_[i]->value.shape(), "optimizer second moment");
  }
  if (state.step < 0) throw ValidationError("optimizer step counter must be non-negative");
  state_ = std::move(state);
}

void Adam::step(Real lr) {
  for (const Parameter* p : params_) {
    if (!p->frozen && !p->has_grad) {
      throw ValidationError("missing gradient for trainable parameter '" + p->name + "'");
    }
  }
  ++state_.step;
  const AdamConfig& c = state_.config;
  const Real bc1 = 1.0 - std::pow(c.beta1, static_cast<Real>(state_.step));
  const Real bc2 = 1.0 - std::pow(c.beta2, static_cast<Real>(state_.step));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    if (p.frozen) {
      p.zero_grad();
      continue;
    }
    Tensor& m = state_.first_moment[i];
    Tensor& v = state_.second_moment[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const Real g = p.grad[j];
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g;
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g * g;
      const Real mhat = m[j] / bc1;
      const Real vhat = v[j] / bc2;
      p.value[j] -= lr * mhat / (std::sqrt(vhat) + c.eps);
    }
    p.zero_grad();
  }
}

Real lr_at(const WarmupSchedule& schedule, std::int64_t step) {
  if (schedule.warmup_steps <= 0) return schedule.base_lr;
  const Real frac =
      static_cast<Real>(std::clamp<std::int64_t>(step, 0, schedule.warmup_steps)) /
      static_cast<Real>(schedule.warmup_steps);
  return schedule.base_lr * (schedule.start_factor + (1.0 - schedule.start_factor) * frac);
}

}  // namespace actilang::nn
