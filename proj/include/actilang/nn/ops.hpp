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

#include <span>
#include <vector>

#include "actilang/nn/tape.hpp"

namespace actilang::nn {

// Target id marking a position excluded from the loss.
inline constexpr int kIgnoreIndex = -100;

// All ops take rank-2 [rows, cols] operands unless noted; vectors are rank 1.
// Each returns a Var recorded on the operands' tape and accumulates exact
// analytic gradients into operands that require them.

Var matmul(Var a, Var b);                 // [m,k] x [k,n]
Var linear(Var x, Var w, Var b);          // x[T,in] w[in,out] + b[out]
Var linear(Var x, Var w);                 // no bias
Var add(Var a, Var b);                    // same shape
Var add_row(Var x, Var v);                // x[T,D] + v[D] on every row
Var scale(Var x, Real s);
Var layer_norm(Var x, Var gamma, Var beta, Real eps = 1e-5);
Var softmax_rows(Var x);
Var gelu(Var x);                          // exact erf form
Var embedding(Var table, std::span<const int> ids);  // table[V,D] -> [T,D]
Var concat_rows(Var a, Var b);
Var slice_rows(Var x, std::size_t begin, std::size_t end);

// Replaces row t of x[T,E] by token[E] wherever mask[t] is set.
Var replace_rows(Var x, Var token, const std::vector<bool>& mask);

// Multi-head scaled dot-product attention over rank-2 Q, K, V of shape [T,D].
// Key j is visible to query i iff key_valid[j] (when given) and, for causal
// attention, j <= i. Every query needs at least one visible key.
Var attention(Var q, Var k, Var v, std::size_t n_heads, bool causal,
              const std::vector<bool>* key_valid = nullptr);

// Mean negative log-softmax over rows whose target is not kIgnoreIndex.
// Throws ValidationError("no supervised tokens") when every row is ignored.
Var masked_cross_entropy(Var logits, std::span<const int> targets);

// Mean squared error over the rows selected by row_mask, averaged over both
// rows and columns. target is a constant.
Var masked_mse(Var pred, const Tensor& target, const std::vector<bool>& row_mask);

// Plain row softmax on a tensor (no tape); used by inference paths.
void softmax_inplace(std::span<Real> row);

}  // namespace actilang::nn
