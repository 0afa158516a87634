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

#include <string>
#include <vector>

#include "actilang/nn/ops.hpp"
#include "actilang/nn/tape.hpp"
#include "actilang/rng.hpp"

namespace actilang::nn {

struct BlockConfig {
  std::size_t dim = 32;
  std::size_t n_heads = 4;
  std::size_t mlp_hidden = 128;
};

// Keys and values of one block for every position processed so far.
struct KvCache {
  std::vector<Real> keys;    // [len, dim]
  std::vector<Real> values;  // [len, dim]
  std::size_t len = 0;
};

// Pre-norm transformer block:
//   h = x + Wo * attn(LN1(x)),  y = h + W2 * gelu(W1 * LN2(h)).
class TransformerBlock {
 public:
  TransformerBlock(const std::string& prefix, const BlockConfig& config, Rng& rng);

  Var forward(Tape& tape, Var x, bool causal, const std::vector<bool>* key_valid = nullptr);

  // Tape-free forward for rows that follow the cached positions. Queries see
  // every cached key plus (causally, if requested) the new rows. Appends the
  // new keys/values to the cache.
  Tensor infer(const Tensor& x, KvCache& cache, bool causal) const;

  ParameterList parameters();
  const BlockConfig& config() const { return config_; }

 private:
  BlockConfig config_;
  Parameter ln1_g_, ln1_b_, wq_, bq_, wk_, bk_, wv_, bv_, wo_, bo_;
  Parameter ln2_g_, ln2_b_, w1_, b1_, w2_, b2_;
};

// Parameter initialisers.
Tensor normal_tensor(Shape shape, Real stddev, Rng& rng);

// Tape-free helpers shared by the inference paths.
Tensor layer_norm_eval(const Tensor& x, const Tensor& gamma, const Tensor& beta, Real eps = 1e-5);
Tensor linear_eval(const Tensor& x, const Tensor& w, const Tensor& b);
void gelu_inplace(Tensor& x);

}  // namespace actilang::nn
