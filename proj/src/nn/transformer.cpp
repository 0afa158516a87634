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

#include "actilang/nn/transformer.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "actilang/errors.hpp"
#include "actilang/simd/kernels.hpp"

namespace actilang::nn {

Tensor normal_tensor(Shape shape, Real stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (Real& v : t.data()) v = rng.normal(0.0, stddev);
  return t;
}

TransformerBlock::TransformerBlock(const std::string& prefix, const BlockConfig& c, Rng& rng) : config_(c) {
  if (c.dim % c.n_heads != 0) {
    throw ValidationError("block width " + std::to_string(c.dim) + " not divisible by " +
                          std::to_string(c.n_heads) + " heads");
  }
  const Real s_in = 1.0 / std::sqrt(static_cast<Real>(c.dim));
  const Real s_hidden = 1.0 / std::sqrt(static_cast<Real>(c.mlp_hidden));
  auto p = [&](const char* n) { return prefix + "." + n; };
  ln1_g_ = Parameter(p("ln1.gamma"), Tensor({c.dim}, 1.0));
  ln1_b_ = Parameter(p("ln1.beta"), Tensor({c.dim}));
  wq_ = Parameter(p("attn.wq"), normal_tensor({c.dim, c.dim}, s_in, rng));
  bq_ = Parameter(p("attn.bq"), Tensor({c.dim}));
  wk_ = Parameter(p("attn.wk"), normal_tensor({c.dim, c.dim}, s_in, rng));
  bk_ = Parameter(p("attn.bk"), Tensor({c.dim}));
  wv_ = Parameter(p("attn.wv"), normal_tensor({c.dim, c.dim}, s_in, rng));
  bv_ = Parameter(p("attn.bv"), Tensor({c.dim}));
  wo_ = Parameter(p("attn.wo"), normal_tensor({c.dim, c.dim}, s_in * 0.5, rng));
  bo_ = Parameter(p("attn.bo"), Tensor({c.dim}));
  ln2_g_ = Parameter(p("ln2.gamma"), Tensor({c.dim}, 1.0));
  ln2_b_ = Parameter(p("ln2.beta"), Tensor({c.dim}));
  w1_ = Parameter(p("mlp.w1"), normal_tensor({c.dim, c.mlp_hidden}, s_in, rng));
  b1_ = Parameter(p("mlp.b1"), Tensor({c.mlp_hidden}));
  w2_ = Parameter(p("mlp.w2"), normal_tensor({c.mlp_hidden, c.dim}, s_hidden * 0.5, rng));
  b2_ = Parameter(p("mlp.b2"), Tensor({c.dim}));
}

ParameterList TransformerBlock::parameters() {
  return {&ln1_g_, &ln1_b_, &wq_, &bq_, &wk_, &bk_, &wv_, &bv_, &wo_, &bo_,
          &ln2_g_, &ln2_b_, &w1_, &b1_, &w2_, &b2_};
}

Var TransformerBlock::forward(Tape& t, Var x, bool causal, const std::vector<bool>* key_valid) {
  Var a = layer_norm(x, t.param(ln1_g_), t.param(ln1_b_));
  Var q = linear(a, t.param(wq_), t.param(bq_));
  Var k = linear(a, t.param(wk_), t.param(bk_));
  Var v = linear(a, t.param(wv_), t.param(bv_));
  Var att = attention(q, k, v, config_.n_heads, causal, key_valid);
  Var h = add(x, linear(att, t.param(wo_), t.param(bo_)));
  Var m = layer_norm(h, t.param(ln2_g_), t.param(ln2_b_));
  Var f = linear(gelu(linear(m, t.param(w1_), t.param(b1_))), t.param(w2_), t.param(b2_));
  return add(h, f);
}

Tensor layer_norm_eval(const Tensor& x, const Tensor& gamma, const Tensor& beta, Real eps) {
  const auto& K = simd::kernels();
  const std::size_t rows = x.rows(), cols = x.cols();
  Tensor out({rows, cols});
  for (std::size_t r = 0; r < rows; ++r) {
    auto xr = x.row(r);
    const Real mean = K.sum(xr.data(), cols) / static_cast<Real>(cols);
    Real var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= static_cast<Real>(cols);
    const Real inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) out.at(r, c) = gamma[c] * ((xr[c] - mean) * inv) + beta[c];
  }
  return out;
}

Tensor linear_eval(const Tensor& x, const Tensor& w, const Tensor& b) {
  const std::size_t rows = x.rows(), in = x.cols(), out_dim = w.cols();
  if (w.rows() != in) throw ShapeError("linear_eval: incompatible shapes " + shape_str(x.shape()) + " and " + shape_str(w.shape()));
  Tensor out({rows, out_dim});
  for (std::size_t r = 0; r < rows; ++r) std::copy(b.data().begin(), b.data().end(), out.row(r).begin());
  simd::kernels().gemm_nn(x.ptr(), w.ptr(), out.ptr(), rows, in, out_dim);
  return out;
}

void gelu_inplace(Tensor& x) {
  for (Real& v : x.data()) v = 0.5 * v * (1.0 + std::erf(v * (1.0 / std::numbers::sqrt2)));
}

Tensor TransformerBlock::infer(const Tensor& x, KvCache& cache, bool causal) const {
  const auto& K = simd::kernels();
  const std::size_t n = x.rows(), D = config_.dim, H = config_.n_heads, dh = D / H;
  const Real inv_sqrt = 1.0 / std::sqrt(static_cast<Real>(dh));
  Tensor a = layer_norm_eval(x, ln1_g_.value, ln1_b_.value);
  Tensor q = linear_eval(a, wq_.value, bq_.value);
  Tensor k = linear_eval(a, wk_.value, bk_.value);
  Tensor v = linear_eval(a, wv_.value, bv_.value);
  const std::size_t base = cache.len;
  cache.keys.insert(cache.keys.end(), k.data().begin(), k.data().end());
  cache.values.insert(cache.values.end(), v.data().begin(), v.data().end());
  cache.len += n;
  const std::size_t total = cache.len;

  Tensor att({n, D});
  std::vector<Real> scores(total), kh(total * dh), vh(total * dh);
  for (std::size_t h = 0; h < H; ++h) {
    for (std::size_t j = 0; j < total; ++j) {
      std::copy_n(cache.keys.data() + j * D + h * dh, dh, kh.data() + j * dh);
      std::copy_n(cache.values.data() + j * D + h * dh, dh, vh.data() + j * dh);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t visible = causal ? base + i + 1 : total;
      const Real* qi = q.ptr() + i * D + h * dh;
      for (std::size_t j = 0; j < visible; ++j) scores[j] = K.dot(qi, kh.data() + j * dh, dh) * inv_sqrt;
      softmax_inplace(std::span<Real>(scores.data(), visible));
      Real* oi = att.ptr() + i * D + h * dh;
      for (std::size_t j = 0; j < visible; ++j) K.axpy(scores[j], vh.data() + j * dh, oi, dh);
    }
  }
  Tensor out = linear_eval(att, wo_.value, bo_.value);
  K.axpy(1.0, x.ptr(), out.ptr(), out.size());  // h = x + attn
  Tensor m = layer_norm_eval(out, ln2_g_.value, ln2_b_.value);
  Tensor f = linear_eval(m, w1_.value, b1_.value);
  gelu_inplace(f);
  Tensor f2 = linear_eval(f, w2_.value, b2_.value);
  K.axpy(1.0, f2.ptr(), out.ptr(), out.size());
  return out;
}

}  // namespace actilang::nn
