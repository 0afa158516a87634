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

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "actilang/nn/tensor.hpp"

namespace actilang::nn {

// A named trainable or frozen array. Frozen parameters take part in forward
// passes and pass gradients through to their operands, but never accumulate a
// gradient of their own and are skipped by the optimizer.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool frozen = false;
  bool has_grad = false;

  Parameter() = default;
  Parameter(std::string n, Tensor v, bool is_frozen = false)
      : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros_like(value)), frozen(is_frozen) {}

  void zero_grad() {
    grad.fill(0.0);
    has_grad = false;
  }
};

using ParameterList = std::vector<Parameter*>;

void set_frozen(const ParameterList& params, bool frozen);

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
// tape is alive.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode op tape. Single writer: build one per forward pass, call
// backward() once on a scalar, then discard.
class Tape {
 public:
  // Receives the gradient flowing into the node's output.
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var leaf(Tensor value, bool requires_grad);
  Var param(Parameter& p);

  // Records an op output. The node requires grad iff any input does; the
  // backward function is dropped otherwise. Throws NumericError when the
  // value contains NaN or Inf.
  Var record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  // Gradient buffer of an input node, allocated on first use. Callers must
  // check requires_grad() first.
  Tensor& grad_buffer(std::size_t id);
  const Tensor& grad(std::size_t id) const;

  // Seeds d(loss)/d(loss) = 1 and runs every recorded backward function in
  // reverse. Parameter leaves then add their gradient into Parameter::grad.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn fn;
    Parameter* param = nullptr;
  };
  std::vector<Node> nodes_;
  Tensor empty_grad_;
};

}  // namespace actilang::nn
