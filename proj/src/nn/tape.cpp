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

#include "actilang/nn/tape.hpp"

#include "actilang/errors.hpp"
#include "actilang/simd/kernels.hpp"

namespace actilang::nn {

void set_frozen(const ParameterList& params, bool frozen) {
  for (Parameter* p : params) {
    p->frozen = frozen;
    p->zero_grad();
  }
}

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) { return leaf(std::move(value), false); }

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Parameter& p) {
  Var v = leaf(p.value, !p.frozen);
  nodes_.back().param = &p;
  return v;
}

Var Tape::record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
  bool rg = false;
  for (const Var& in : inputs) {
    if (in.tape_ != this) throw std::logic_error(std::string(op) + ": operand from another tape");
    rg = rg || nodes_[in.id_].requires_grad;
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = rg;
  if (rg) n.fn = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor::zeros_like(n.value);
    n.has_grad = true;
  }
  return n.grad;
}

const Tensor& Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.has_grad ? n.grad : empty_grad_;
}

void Tape::backward(Var loss) {
  if (loss.tape_ != this) throw std::logic_error("backward: loss from another tape");
  if (loss.value().size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got " + shape_str(loss.shape()));
  }
  if (!nodes_[loss.id_].requires_grad) return;
  grad_buffer(loss.id_)[0] = 1.0;
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.has_grad) continue;
    if (!n.grad.all_finite()) throw NumericError("non-finite gradient during backward");
    if (n.fn) {
      // The callee may grow no nodes; references stay valid.
      n.fn(*this, n.grad);
    } else if (n.param != nullptr && !n.param->frozen) {
      if (n.param->grad.shape() != n.grad.shape()) n.param->grad = Tensor::zeros_like(n.grad);
      const auto& k = simd::kernels();
      k.axpy(1.0, n.grad.ptr(), n.param->grad.ptr(), n.grad.size());
      n.param->has_grad = true;
    }
  }
}

}  // namespace actilang::nn
