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

#include "actilang/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "actilang/errors.hpp"
#include "actilang/simd/kernels.hpp"

namespace actilang::nn {
namespace {

const simd::KernelTable& K() { return simd::kernels(); }

void require_rank2(const Var& v, const char* op) {
  if (v.value().rank() != 2) {
    throw ShapeError(std::string(op) + ": expected rank-2 operand, got " + shape_str(v.shape()));
  }
}

[[noreturn]] void mismatch(const char* op, const Var& a, const Var& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) + " and " +
                   shape_str(b.shape()));
}

}  // namespace

Var matmul(Var a, Var b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.value().rows(), k = a.value().cols(), n = b.value().cols();
  if (b.value().rows() != k) mismatch("matmul", a, b);
  Tensor out({m, n});
  K().gemm_nn(a.value().ptr(), b.value().ptr(), out.ptr(), m, k, n);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record("matmul", std::move(out), {a, b},
                         [ia, ib, m, k, n](Tape& t, const Tensor& g) {
                           if (t.requires_grad(ia)) {
                             K().gemm_nt(g.ptr(), t.value(ib).ptr(), t.grad_buffer(ia).ptr(), m, n, k);
                           }
                           if (t.requires_grad(ib)) {
                             K().gemm_tn(t.value(ia).ptr(), g.ptr(), t.grad_buffer(ib).ptr(), m, k, n);
                           }
                         });
}

Var linear(Var x, Var w, Var b) {
  require_rank2(x, "linear");
  require_rank2(w, "linear");
  const std::size_t rows = x.value().rows(), in = x.value().cols(), out_dim = w.value().cols();
  if (w.value().rows() != in) mismatch("linear", x, w);
  if (b.value().rank() != 1 || b.value().dim(0) != out_dim) mismatch("linear", w, b);
  Tensor out({rows, out_dim});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(b.value().data().begin(), b.value().data().end(), out.row(r).begin());
  }
  K().gemm_nn(x.value().ptr(), w.value().ptr(), out.ptr(), rows, in, out_dim);
  const std::size_t ix = x.id(), iw = w.id(), ib = b.id();
  return x.tape().record("linear", std::move(out), {x, w, b},
                         [ix, iw, ib, rows, in, out_dim](Tape& t, const Tensor& g) {
                           if (t.requires_grad(ix)) {
                             K().gemm_nt(g.ptr(), t.value(iw).ptr(), t.grad_buffer(ix).ptr(), rows,
                                         out_dim, in);
                           }
                           if (t.requires_grad(iw)) {
                             K().gemm_tn(t.value(ix).ptr(), g.ptr(), t.grad_buffer(iw).ptr(), rows,
                                         in, out_dim);
                           }
                           if (t.requires_grad(ib)) {
                             Tensor& gb = t.grad_buffer(ib);
                             for (std::size_t r = 0; r < rows; ++r) {
                               K().axpy(1.0, g.ptr() + r * out_dim, gb.ptr(), out_dim);
                             }
                           }
                         });
}

Var linear(Var x, Var w) {
  require_rank2(x, "linear");
  require_rank2(w, "linear");
  return matmul(x, w);
}

Var add(Var a, Var b) {
  if (a.shape() != b.shape()) mismatch("add", a, b);
  Tensor out = a.value();
  K().axpy(1.0, b.value().ptr(), out.ptr(), out.size());
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record("add", std::move(out), {a, b}, [ia, ib](Tape& t, const Tensor& g) {
    if (t.requires_grad(ia)) K().axpy(1.0, g.ptr(), t.grad_buffer(ia).ptr(), g.size());
    if (t.requires_grad(ib)) K().axpy(1.0, g.ptr(), t.grad_buffer(ib).ptr(), g.size());
  });
}

Var add_row(Var x, Var v) {
  require_rank2(x, "add_row");
  const std::size_t rows = x.value().rows(), cols = x.value().cols();
  if (v.value().rank() != 1 || v.value().dim(0) != cols) mismatch("add_row", x, v);
  Tensor out = x.value();
  for (std::size_t r = 0; r < rows; ++r) K().axpy(1.0, v.value().ptr(), out.ptr() + r * cols, cols);
  const std::size_t ix = x.id(), iv = v.id();
  return x.tape().record("add_row", std::move(out), {x, v},
                         [ix, iv, rows, cols](Tape& t, const Tensor& g) {
                           if (t.requires_grad(ix)) K().axpy(1.0, g.ptr(), t.grad_buffer(ix).ptr(), g.size());
                           if (t.requires_grad(iv)) {
                             Tensor& gv = t.grad_buffer(iv);
                             for (std::size_t r = 0; r < rows; ++r) K().axpy(1.0, g.ptr() + r * cols, gv.ptr(), cols);
                           }
                         });
}

Var scale(Var x, Real s) {
  Tensor out = x.value();
  K().scale(s, out.ptr(), out.size());
  const std::size_t ix = x.id();
  return x.tape().record("scale", std::move(out), {x}, [ix, s](Tape& t, const Tensor& g) {
    K().axpy(s, g.ptr(), t.grad_buffer(ix).ptr(), g.size());
  });
}

Var layer_norm(Var x, Var gamma, Var beta, Real eps) {
  require_rank2(x, "layer_norm");
  const std::size_t rows = x.value().rows(), cols = x.value().cols();
  if (gamma.value().rank() != 1 || gamma.value().dim(0) != cols) mismatch("layer_norm", x, gamma);
  if (beta.value().rank() != 1 || beta.value().dim(0) != cols) mismatch("layer_norm", x, beta);
  Tensor xhat({rows, cols});
  std::vector<Real> inv_std(rows);
  Tensor out({rows, cols});
  const Real* g = gamma.value().ptr();
  const Real* b = beta.value().ptr();
  for (std::size_t r = 0; r < rows; ++r) {
    auto xr = x.value().row(r);
    const Real mean = K().sum(xr.data(), cols) / static_cast<Real>(cols);
    Real var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= static_cast<Real>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < cols; ++c) {
      const Real h = (xr[c] - mean) * inv_std[r];
      xhat.at(r, c) = h;
      out.at(r, c) = g[c] * h + b[c];
    }
  }
  const std::size_t ix = x.id(), ig = gamma.id(), ib = beta.id();
  return x.tape().record(
      "layer_norm", std::move(out), {x, gamma, beta},
      [ix, ig, ib, rows, cols, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t,
                                                                                   const Tensor& gy) {
        if (t.requires_grad(ig)) {
          Tensor& gg = t.grad_buffer(ig);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) gg[c] += gy.at(r, c) * xhat.at(r, c);
        }
        if (t.requires_grad(ib)) {
          Tensor& gb = t.grad_buffer(ib);
          for (std::size_t r = 0; r < rows; ++r) K().axpy(1.0, gy.ptr() + r * cols, gb.ptr(), cols);
        }
        if (t.requires_grad(ix)) {
          Tensor& gx = t.grad_buffer(ix);
          const Real* gam = t.value(ig).ptr();
          std::vector<Real> dxhat(cols);
          for (std::size_t r = 0; r < rows; ++r) {
            Real mean_d = 0.0, mean_dx = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
              dxhat[c] = gy.at(r, c) * gam[c];
              mean_d += dxhat[c];
              mean_dx += dxhat[c] * xhat.at(r, c);
            }
            mean_d /= static_cast<Real>(cols);
            mean_dx /= static_cast<Real>(cols);
            for (std::size_t c = 0; c < cols; ++c) {
              gx.at(r, c) += inv_std[r] * (dxhat[c] - mean_d - xhat.at(r, c) * mean_dx);
            }
          }
        }
      });
}

void softmax_inplace(std::span<Real> row) {
  const Real m = K().max(row.data(), row.size());
  Real s = 0.0;
  for (Real& v : row) {
    v = std::exp(v - m);
    s += v;
  }
  K().scale(1.0 / s, row.data(), row.size());
}

Var softmax_rows(Var x) {
  require_rank2(x, "softmax_rows");
  Tensor out = x.value();
  const std::size_t rows = out.rows(), cols = out.cols();
  for (std::size_t r = 0; r < rows; ++r) softmax_inplace(out.row(r));
  const std::size_t ix = x.id();
  const std::size_t self = x.tape().size();
  return x.tape().record("softmax_rows", std::move(out), {x},
                         [ix, self, rows, cols](Tape& t, const Tensor& g) {
                           const Tensor& y = t.value(self);
                           Tensor& gx = t.grad_buffer(ix);
                           for (std::size_t r = 0; r < rows; ++r) {
                             const Real d = K().dot(g.ptr() + r * cols, y.ptr() + r * cols, cols);
                             for (std::size_t c = 0; c < cols; ++c) {
                               gx.at(r, c) += y.at(r, c) * (g.at(r, c) - d);
                             }
                           }
                         });
}

Var gelu(Var x) {
  Tensor out = x.value();
  for (Real& v : out.data()) v = 0.5 * v * (1.0 + std::erf(v * (1.0 / std::numbers::sqrt2)));
  const std::size_t ix = x.id();
  return x.tape().record("gelu", std::move(out), {x}, [ix](Tape& t, const Tensor& g) {
    const Tensor& xv = t.value(ix);
    Tensor& gx = t.grad_buffer(ix);
    const Real inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const Real v = xv[i];
      const Real cdf = 0.5 * (1.0 + std::erf(v * (1.0 / std::numbers::sqrt2)));
      const Real pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      gx[i] += g[i] * (cdf + v * pdf);
    }
  });
}

Var embedding(Var table, std::span<const int> ids) {
  require_rank2(table, "embedding");
  const std::size_t vocab = table.value().rows(), dim = table.value().cols();
  if (ids.empty()) throw ShapeError("embedding: empty id list");
  Tensor out({ids.size(), dim});
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] < 0 || static_cast<std::size_t>(ids[t]) >= vocab) {
      throw ShapeError("embedding: id " + std::to_string(ids[t]) + " outside vocabulary of " +
                       std::to_string(vocab));
    }
    auto src = table.value().row(static_cast<std::size_t>(ids[t]));
    std::copy(src.begin(), src.end(), out.row(t).begin());
  }
  const std::size_t itab = table.id();
  std::vector<int> id_copy(ids.begin(), ids.end());
  return table.tape().record("embedding", std::move(out), {table},
                             [itab, dim, id_copy = std::move(id_copy)](Tape& t, const Tensor& g) {
                               Tensor& gt = t.grad_buffer(itab);
                               for (std::size_t r = 0; r < id_copy.size(); ++r) {
                                 K().axpy(1.0, g.ptr() + r * dim,
                                          gt.ptr() + static_cast<std::size_t>(id_copy[r]) * dim, dim);
                               }
                             });
}

Var concat_rows(Var a, Var b) {
  require_rank2(a, "concat_rows");
  require_rank2(b, "concat_rows");
  if (a.value().cols() != b.value().cols()) mismatch("concat_rows", a, b);
  const std::size_t ra = a.value().rows(), rb = b.value().rows(), cols = a.value().cols();
  Tensor out({ra + rb, cols});
  std::copy(a.value().data().begin(), a.value().data().end(), out.data().begin());
  std::copy(b.value().data().begin(), b.value().data().end(), out.data().begin() + ra * cols);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record("concat_rows", std::move(out), {a, b},
                         [ia, ib, ra, rb, cols](Tape& t, const Tensor& g) {
                           if (t.requires_grad(ia)) K().axpy(1.0, g.ptr(), t.grad_buffer(ia).ptr(), ra * cols);
                           if (t.requires_grad(ib)) {
                             K().axpy(1.0, g.ptr() + ra * cols, t.grad_buffer(ib).ptr(), rb * cols);
                           }
                         });
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  require_rank2(x, "slice_rows");
  const std::size_t rows = x.value().rows(), cols = x.value().cols();
  if (begin >= end || end > rows) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") invalid for " + shape_str(x.shape()));
  }
  Tensor out({end - begin, cols});
  std::copy(x.value().data().begin() + begin * cols, x.value().data().begin() + end * cols,
            out.data().begin());
  const std::size_t ix = x.id();
  return x.tape().record("slice_rows", std::move(out), {x},
                         [ix, begin, cols](Tape& t, const Tensor& g) {
                           K().axpy(1.0, g.ptr(), t.grad_buffer(ix).ptr() + begin * cols, g.size());
                         });
}

Var replace_rows(Var x, Var token, const std::vector<bool>& mask) {
  require_rank2(x, "replace_rows");
  const std::size_t rows = x.value().rows(), cols = x.value().cols();
  if (token.value().rank() != 1 || token.value().dim(0) != cols) mismatch("replace_rows", x, token);
  if (mask.size() != rows) throw ShapeError("replace_rows: mask length does not match rows");
  Tensor out = x.value();
  for (std::size_t r = 0; r < rows; ++r) {
    if (mask[r]) std::copy(token.value().data().begin(), token.value().data().end(), out.row(r).begin());
  }
  const std::size_t ix = x.id(), it = token.id();
  return x.tape().record("replace_rows", std::move(out), {x, token},
                         [ix, it, cols, mask](Tape& t, const Tensor& g) {
                           for (std::size_t r = 0; r < mask.size(); ++r) {
                             if (mask[r]) {
                               if (t.requires_grad(it)) K().axpy(1.0, g.ptr() + r * cols, t.grad_buffer(it).ptr(), cols);
                             } else if (t.requires_grad(ix)) {
                               K().axpy(1.0, g.ptr() + r * cols, t.grad_buffer(ix).ptr() + r * cols, cols);
                             }
                           }
                         });
}

Var attention(Var q, Var k, Var v, std::size_t n_heads, bool causal, const std::vector<bool>* key_valid) {
  require_rank2(q, "attention");
  if (q.shape() != k.shape()) mismatch("attention", q, k);
  if (q.shape() != v.shape()) mismatch("attention", q, v);
  const std::size_t T = q.value().rows(), D = q.value().cols();
  if (n_heads == 0 || D % n_heads != 0) {
    throw ShapeError("attention: width " + std::to_string(D) + " not divisible by " +
                     std::to_string(n_heads) + " heads");
  }
  if (key_valid != nullptr && key_valid->size() != T) throw ShapeError("attention: key mask length mismatch");
  const std::size_t dh = D / n_heads;
  const Real inv_sqrt = 1.0 / std::sqrt(static_cast<Real>(dh));

  // Per-head contiguous copies, [H][T*dh].
  auto split = [&](const Tensor& x) {
    std::vector<Tensor> heads;
    heads.reserve(n_heads);
    for (std::size_t h = 0; h < n_heads; ++h) {
      Tensor part({T, dh});
      for (std::size_t t = 0; t < T; ++t) {
        std::copy_n(x.ptr() + t * D + h * dh, dh, part.ptr() + t * dh);
      }
      heads.push_back(std::move(part));
    }
    return heads;
  };
  std::vector<Tensor> qh = split(q.value()), kh = split(k.value()), vh = split(v.value());

  auto visible = [&](std::size_t i, std::size_t j) {
    if (causal && j > i) return false;
    if (key_valid != nullptr && !(*key_valid)[j]) return false;
    return true;
  };
  for (std::size_t i = 0; i < T; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < T && !any; ++j) any = visible(i, j);
    if (!any) throw ShapeError("attention: query " + std::to_string(i) + " has no visible key");
  }

  std::vector<Tensor> probs;
  probs.reserve(n_heads);
  Tensor out({T, D});
  const Real neg_inf = -std::numeric_limits<Real>::infinity();
  for (std::size_t h = 0; h < n_heads; ++h) {
    Tensor s({T, T});
    K().gemm_nt(qh[h].ptr(), kh[h].ptr(), s.ptr(), T, dh, T);
    for (std::size_t i = 0; i < T; ++i) {
      auto row = s.row(i);
      for (std::size_t j = 0; j < T; ++j) row[j] = visible(i, j) ? row[j] * inv_sqrt : neg_inf;
      softmax_inplace(row);
    }
    Tensor o({T, dh});
    K().gemm_nn(s.ptr(), vh[h].ptr(), o.ptr(), T, T, dh);
    for (std::size_t t = 0; t < T; ++t) std::copy_n(o.ptr() + t * dh, dh, out.ptr() + t * D + h * dh);
    probs.push_back(std::move(s));
  }

  const std::size_t iq = q.id(), ik = k.id(), iv = v.id();
  return q.tape().record(
      "attention", std::move(out), {q, k, v},
      [iq, ik, iv, T, D, dh, n_heads, inv_sqrt, probs = std::move(probs), qh = std::move(qh),
       kh = std::move(kh), vh = std::move(vh)](Tape& t, const Tensor& g) {
        const bool gq = t.requires_grad(iq), gk = t.requires_grad(ik), gv = t.requires_grad(iv);
        Tensor go({T, dh}), dp({T, T}), dh_buf({T, dh});
        for (std::size_t h = 0; h < n_heads; ++h) {
          for (std::size_t r = 0; r < T; ++r) std::copy_n(g.ptr() + r * D + h * dh, dh, go.ptr() + r * dh);
          const Tensor& p = probs[h];
          if (gv) {
            dh_buf.fill(0.0);
            K().gemm_tn(p.ptr(), go.ptr(), dh_buf.ptr(), T, T, dh);
            Tensor& gvv = t.grad_buffer(iv);
            for (std::size_t r = 0; r < T; ++r)
              K().axpy(1.0, dh_buf.ptr() + r * dh, gvv.ptr() + r * D + h * dh, dh);
          }
          if (!gq && !gk) continue;
          dp.fill(0.0);
          K().gemm_nt(go.ptr(), vh[h].ptr(), dp.ptr(), T, dh, T);
          // dS = P * (dP - rowsum(dP * P)), then fold in the 1/sqrt(dh) scale.
          for (std::size_t i = 0; i < T; ++i) {
            const Real d = K().dot(dp.ptr() + i * T, p.ptr() + i * T, T);
            for (std::size_t j = 0; j < T; ++j) dp.at(i, j) = p.at(i, j) * (dp.at(i, j) - d) * inv_sqrt;
          }
          if (gq) {
            dh_buf.fill(0.0);
            K().gemm_nn(dp.ptr(), kh[h].ptr(), dh_buf.ptr(), T, T, dh);
            Tensor& gqq = t.grad_buffer(iq);
            for (std::size_t r = 0; r < T; ++r)
              K().axpy(1.0, dh_buf.ptr() + r * dh, gqq.ptr() + r * D + h * dh, dh);
          }
          if (gk) {
            dh_buf.fill(0.0);
            K().gemm_tn(dp.ptr(), qh[h].ptr(), dh_buf.ptr(), T, T, dh);
            Tensor& gkk = t.grad_buffer(ik);
            for (std::size_t r = 0; r < T; ++r)
              K().axpy(1.0, dh_buf.ptr() + r * dh, gkk.ptr() + r * D + h * dh, dh);
          }
        }
      });
}

Var masked_cross_entropy(Var logits, std::span<const int> targets) {
  require_rank2(logits, "masked_cross_entropy");
  const std::size_t T = logits.value().rows(), V = logits.value().cols();
  if (targets.size() != T) {
    throw ShapeError("masked_cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                     std::to_string(T) + " rows");
  }
  std::size_t n = 0;
  for (int y : targets) {
    if (y == kIgnoreIndex) continue;
    if (y < 0 || static_cast<std::size_t>(y) >= V) {
      throw ShapeError("masked_cross_entropy: target " + std::to_string(y) + " outside vocabulary");
    }
    ++n;
  }
  if (n == 0) throw ValidationError("no supervised tokens");
  Tensor probs({T, V});
  Real total = 0.0;
  for (std::size_t r = 0; r < T; ++r) {
    if (targets[r] == kIgnoreIndex) continue;
    auto src = logits.value().row(r);
    auto dst = probs.row(r);
    std::copy(src.begin(), src.end(), dst.begin());
    const Real m = K().max(dst.data(), V);
    Real s = 0.0;
    for (Real& z : dst) {
      z = std::exp(z - m);
      s += z;
    }
    total += (m + std::log(s)) - src[static_cast<std::size_t>(targets[r])];
    K().scale(1.0 / s, dst.data(), V);
  }
  Tensor out({1}, total / static_cast<Real>(n));
  const std::size_t il = logits.id();
  std::vector<int> tcopy(targets.begin(), targets.end());
  return logits.tape().record(
      "masked_cross_entropy", std::move(out), {logits},
      [il, V, n, probs = std::move(probs), tcopy = std::move(tcopy)](Tape& t, const Tensor& g) {
        Tensor& gl = t.grad_buffer(il);
        const Real w = g[0] / static_cast<Real>(n);
        for (std::size_t r = 0; r < tcopy.size(); ++r) {
          if (tcopy[r] == kIgnoreIndex) continue;
          K().axpy(w, probs.ptr() + r * V, gl.ptr() + r * V, V);
          gl.at(r, static_cast<std::size_t>(tcopy[r])) -= w;
        }
      });
}

Var masked_mse(Var pred, const Tensor& target, const std::vector<bool>& row_mask) {
  require_rank2(pred, "masked_mse");
  if (pred.shape() != target.shape()) {
    throw ShapeError("masked_mse: incompatible shapes " + shape_str(pred.shape()) + " and " +
                     shape_str(target.shape()));
  }
  const std::size_t rows = pred.value().rows(), cols = pred.value().cols();
  if (row_mask.size() != rows) throw ShapeError("masked_mse: mask length does not match rows");
  const auto n_rows = static_cast<std::size_t>(std::count(row_mask.begin(), row_mask.end(), true));
  if (n_rows == 0) throw ValidationError("masked_mse: no masked rows");
  const Real denom = static_cast<Real>(n_rows * cols);
  Real total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!row_mask[r]) continue;
    for (std::size_t c = 0; c < cols; ++c) {
      const Real d = pred.value().at(r, c) - target.at(r, c);
      total += d * d;
    }
  }
  Tensor out({1}, total / denom);
  const std::size_t ip = pred.id();
  return pred.tape().record("masked_mse", std::move(out), {pred},
                            [ip, cols, denom, target, row_mask](Tape& t, const Tensor& g) {
                              Tensor& gp = t.grad_buffer(ip);
                              const Tensor& pv = t.value(ip);
                              for (std::size_t r = 0; r < row_mask.size(); ++r) {
                                if (!row_mask[r]) continue;
                                for (std::size_t c = 0; c < cols; ++c) {
                                  gp.at(r, c) += g[0] * 2.0 * (pv.at(r, c) - target.at(r, c)) / denom;
                                }
                              }
                            });
}

}  // namespace actilang::nn
