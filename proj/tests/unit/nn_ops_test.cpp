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

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "actilang/errors.hpp"
#include "actilang/nn/ops.hpp"
#include "actilang/nn/transformer.hpp"
#include "actilang/rng.hpp"
#include "gradcheck.hpp"

namespace actilang::nn {
namespace {

using actilang::testing::max_grad_rel_error;

Tensor randn(Shape s, Rng& rng, double sd = 1.0) { return normal_tensor(std::move(s), sd, rng); }

TEST(Ops, SoftmaxOfEqualLogitsIsUniform) {
  Tape t;
  const std::size_t V = 11;
  Var y = softmax_rows(t.constant(Tensor({2, V}, 3.25)));
  for (double p : y.value().data()) EXPECT_DOUBLE_EQ(p, 1.0 / V);
}

TEST(Ops, SoftmaxRowsSumToOne) {
  Rng rng(5);
  Tape t;
  Var y = softmax_rows(t.constant(randn({7, 19}, rng, 4.0)));
  for (std::size_t r = 0; r < 7; ++r) {
    auto row = y.value().row(r);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(Ops, MatmulWithIdentityIsNoop) {
  Rng rng(6);
  Tensor a = randn({4, 5}, rng);
  Tensor eye({5, 5});
  for (std::size_t i = 0; i < 5; ++i) eye.at(i, i) = 1.0;
  Tape t;
  EXPECT_EQ(matmul(t.constant(a), t.constant(eye)).value(), a);
}

TEST(Ops, ShapeMismatchNamesBothShapes) {
  Tape t;
  try {
    matmul(t.constant(Tensor({2, 3})), t.constant(Tensor({4, 5})));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("[2, 3]"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[4, 5]"), std::string::npos);
  }
}

TEST(Ops, NonFiniteResultRaises) {
  Tape t;
  Tensor big({1, 1}, 1e308);
  EXPECT_THROW(scale(t.constant(big), 10.0), NumericError);
}

TEST(Ops, LayerNormStatistics) {
  Rng rng(7);
  Tape t;
  const std::size_t D = 24;
  Var y = layer_norm(t.constant(randn({5, D}, rng, 3.0)), t.constant(Tensor({D}, 1.0)), t.constant(Tensor({D})),
                     0.0);
  for (std::size_t r = 0; r < 5; ++r) {
    auto row = y.value().row(r);
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / D;
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_NEAR(var / D, 1.0, 1e-6);
  }
}

TEST(Ops, GeluKnownValues) {
  Tape t;
  Var y = gelu(t.constant(Tensor({1, 3}, {0.0, 1.0, -1.0})));
  EXPECT_DOUBLE_EQ(y.value()[0], 0.0);
  EXPECT_NEAR(y.value()[1], 0.8413447460685429, 1e-15);
  EXPECT_NEAR(y.value()[2], -0.15865525393145707, 1e-15);
}

// One finite-difference check per primitive, a few seeds each.
class GradCheck : public ::testing::TestWithParam<int> {};

TEST_P(GradCheck, Primitives) {
  Rng rng(100 + GetParam());
  const double tol = 1e-4;
  // Reduce any [T,D] output to a scalar with a fixed random projection.
  auto reduce = [](Tape& t, Var y, std::uint64_t seed) {
    Rng r(seed);
    Tensor w = normal_tensor({y.value().cols(), 1}, 1.0, r);
    Var s = matmul(y, t.constant(w));
    Tensor ones({1, s.value().rows()}, 1.0);
    return matmul(t.constant(ones), s);
  };
  EXPECT_LT(max_grad_rel_error({randn({3, 4}, rng), randn({4, 5}, rng)},
                               [&](Tape& t, auto& v) { return reduce(t, matmul(v[0], v[1]), 1); }),
            tol);
  EXPECT_LT(max_grad_rel_error({randn({3, 4}, rng), randn({4, 5}, rng), randn({5}, rng)},
                               [&](Tape& t, auto& v) { return reduce(t, linear(v[0], v[1], v[2]), 2); }),
            tol);
  EXPECT_LT(max_grad_rel_error({randn({3, 4}, rng), randn({3, 4}, rng)},
                               [&](Tape& t, auto& v) { return reduce(t, add(v[0], v[1]), 3); }),
            tol);
  EXPECT_LT(max_grad_rel_error({randn({3, 4}, rng), randn({4}, rng)},
                               [&](Tape& t, auto& v) { return reduce(t, add_row(v[0], v[1]), 4); }),
            tol);
  EXPECT_LT(max_grad_rel_error({randn({3, 6}, rng, 2.0), randn({6}, rng), randn({6}, rng)},
                               [&](Tape& t, auto& v) { return reduce(t, layer_norm(v[0], v[1], v[2]), 5); }),
            tol);
  EXPECT_LT(max_grad_rel_error({randn({3, 6}, rng, 2.0)},
                               [&](Tape& t, auto& v) { return reduce(t, softmax_rows(v[0]), 6); }),
            tol);
  EXPECT_LT(max_grad_rel_error({randn({3, 6}, rng, 2.0)},
                               [&](Tape& t, auto& v) { return reduce(t, gelu(v[0]), 7); }),
            tol);
  const std::vector<int> ids = {2, 0, 2, 4};
  EXPECT_LT(max_grad_rel_error({randn({5, 3}, rng)},
                               [&](Tape& t, auto& v) { return reduce(t, embedding(v[0], ids), 8); }),
            tol);
  EXPECT_LT(max_grad_rel_error({randn({2, 3}, rng), randn({3, 3}, rng)},
                               [&](Tape& t, auto& v) {
                                 return reduce(t, slice_rows(concat_rows(v[0], v[1]), 1, 4), 9);
                               }),
            tol);
  const std::vector<bool> mask = {false, true, false, true};
  EXPECT_LT(max_grad_rel_error({randn({4, 3}, rng), randn({3}, rng)},
                               [&](Tape& t, auto& v) { return reduce(t, replace_rows(v[0], v[1], mask), 10); }),
            tol);
  for (bool causal : {false, true}) {
    EXPECT_LT(max_grad_rel_error({randn({5, 8}, rng), randn({5, 8}, rng), randn({5, 8}, rng)},
                                 [&](Tape& t, auto& v) {
                                   return reduce(t, attention(v[0], v[1], v[2], 2, causal), 11);
                                 }),
              tol);
  }
  const std::vector<bool> keys = {true, true, true, false, false};
  EXPECT_LT(max_grad_rel_error({randn({5, 8}, rng), randn({5, 8}, rng), randn({5, 8}, rng)},
                               [&](Tape& t, auto& v) {
                                 return reduce(t, attention(v[0], v[1], v[2], 4, true, &keys), 12);
                               }),
            tol);
  const std::vector<int> targets = {3, kIgnoreIndex, 0, 6};
  EXPECT_LT(max_grad_rel_error({randn({4, 7}, rng, 2.0)},
                               [&](Tape&, auto& v) { return masked_cross_entropy(v[0], targets); }),
            tol);
  const Tensor target = randn({4, 3}, rng);
  EXPECT_LT(max_grad_rel_error({randn({4, 3}, rng)},
                               [&](Tape&, auto& v) { return masked_mse(v[0], target, mask); }),
            tol);
}

INSTANTIATE_TEST_SUITE_P(Seeds, GradCheck, ::testing::Range(0, 5));

TEST(Ops, CausalAttentionIgnoresFuturePositions) {
  Rng rng(8);
  const std::size_t T = 6, D = 8;
  Tensor q = randn({T, D}, rng), k = randn({T, D}, rng), v = randn({T, D}, rng);
  Tape t0;
  Tensor base = attention(t0.constant(q), t0.constant(k), t0.constant(v), 2, true).value();
  for (std::size_t probe = 1; probe < T; ++probe) {
    Tensor q2 = q, k2 = k, v2 = v;
    for (std::size_t c = 0; c < D; ++c) {
      q2.at(probe, c) += 3.0;
      k2.at(probe, c) -= 2.0;
      v2.at(probe, c) *= -4.0;
    }
    Tape t;
    Tensor out = attention(t.constant(q2), t.constant(k2), t.constant(v2), 2, true).value();
    for (std::size_t r = 0; r < probe; ++r) {
      for (std::size_t c = 0; c < D; ++c) EXPECT_EQ(out.at(r, c), base.at(r, c));
    }
  }
}

TEST(Ops, QueryWithoutVisibleKeyIsRejected) {
  Tape t;
  Tensor x({3, 4}, 0.1);
  const std::vector<bool> keys = {false, true, true};
  EXPECT_THROW(attention(t.constant(x), t.constant(x), t.constant(x), 1, true, &keys), ShapeError);
}

TEST(CrossEntropy, UniformLogitsGiveLogV) {
  Tape t;
  const std::vector<int> targets = {kIgnoreIndex, 5, kIgnoreIndex};
  Var loss = masked_cross_entropy(t.constant(Tensor({3, 8}, 0.0)), targets);
  EXPECT_NEAR(loss.value()[0], std::log(8.0), 1e-15);
}

TEST(CrossEntropy, IgnoredRowsDoNotMatter) {
  Rng rng(9);
  Tensor logits = randn({5, 6}, rng);
  const std::vector<int> targets = {kIgnoreIndex, 2, kIgnoreIndex, 4, 1};
  Tape t0;
  Var x0 = t0.leaf(logits, true);
  Var l0 = masked_cross_entropy(x0, targets);
  t0.backward(l0);
  for (std::size_t c = 0; c < 6; ++c) {
    logits.at(0, c) += 100.0 * rng.normal();
    logits.at(2, c) -= 50.0;
  }
  Tape t1;
  Var l1 = masked_cross_entropy(t1.constant(logits), targets);
  EXPECT_EQ(l0.value()[0], l1.value()[0]);
  for (std::size_t c = 0; c < 6; ++c) {
    EXPECT_EQ(x0.grad().at(0, c), 0.0);
    EXPECT_EQ(x0.grad().at(2, c), 0.0);
  }
}

TEST(CrossEntropy, MatchesPerPositionLogSumExp) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t T = 1 + rng.below(9), V = 2 + rng.below(30);
    Tensor logits = randn({T, V}, rng, 3.0);
    std::vector<int> targets(T);
    for (auto& y : targets) y = rng.uniform() < 0.3 ? kIgnoreIndex : static_cast<int>(rng.below(V));
    targets[rng.below(T)] = static_cast<int>(rng.below(V));
    // Oracle: naive log-sum-exp per supervised row, then average.
    double sum = 0.0;
    int n = 0;
    for (std::size_t r = 0; r < T; ++r) {
      if (targets[r] == kIgnoreIndex) continue;
      double mx = -1e300;
      for (std::size_t c = 0; c < V; ++c) mx = std::max(mx, logits.at(r, c));
      double z = 0.0;
      for (std::size_t c = 0; c < V; ++c) z += std::exp(logits.at(r, c) - mx);
      sum += mx + std::log(z) - logits.at(r, targets[r]);
      ++n;
    }
    Tape t;
    EXPECT_NEAR(masked_cross_entropy(t.constant(logits), targets).value()[0], sum / n, 1e-12);
  }
}

TEST(CrossEntropy, AllIgnoredIsAnError) {
  Tape t;
  const std::vector<int> targets = {kIgnoreIndex, kIgnoreIndex};
  try {
    masked_cross_entropy(t.constant(Tensor({2, 3})), targets);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "no supervised tokens");
  }
}

TEST(Tape, FrozenParameterPassesGradientButKeepsNone) {
  Rng rng(11);
  Parameter w("w", randn({3, 2}, rng), /*frozen=*/true);
  Parameter x("x", randn({4, 3}, rng));
  Tape t;
  Var y = matmul(t.param(x), t.param(w));
  Var loss = masked_cross_entropy(y, std::vector<int>{0, 1, 1, 0});
  t.backward(loss);
  EXPECT_TRUE(x.has_grad);
  EXPECT_FALSE(w.has_grad);
  for (double g : w.grad.data()) EXPECT_EQ(g, 0.0);
  double norm = 0.0;
  for (double g : x.grad.data()) norm += g * g;
  EXPECT_GT(norm, 0.0);
}

TEST(Transformer, CachedInferenceMatchesTape) {
  Rng rng(12);
  BlockConfig cfg{16, 4, 32};
  TransformerBlock block("b", cfg, rng);
  Tensor x = randn({9, 16}, rng);
  for (bool causal : {true, false}) {
    Tape t;
    Tensor ref = block.forward(t, t.constant(x), causal).value();
    KvCache cache;
    Tensor full = block.infer(x, cache, causal);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(full[i], ref[i], 1e-12);
    if (!causal) continue;
    // Prefill five rows, then feed the remaining ones one at a time.
    KvCache inc;
    Tensor head({5, 16}, std::vector<double>(x.data().begin(), x.data().begin() + 5 * 16));
    Tensor out5 = block.infer(head, inc, true);
    for (std::size_t r = 5; r < 9; ++r) {
      Tensor one({1, 16}, std::vector<double>(x.row(r).begin(), x.row(r).end()));
      Tensor o = block.infer(one, inc, true);
      for (std::size_t c = 0; c < 16; ++c) EXPECT_NEAR(o[c], ref.at(r, c), 1e-12);
    }
    EXPECT_EQ(inc.len, 9u);
  }
}

TEST(Transformer, BlockGradientCheck) {
  Rng rng(13);
  BlockConfig cfg{8, 2, 12};
  TransformerBlock block("b", cfg, rng);
  Tensor x = randn({5, 8}, rng);
  const std::vector<int> targets = {1, kIgnoreIndex, 3, 0, 7};
  EXPECT_LT(max_grad_rel_error({x},
                               [&](Tape& t, auto& v) {
                                 return masked_cross_entropy(block.forward(t, v[0], true), targets);
                               }),
            1e-4);
}

}  // namespace
}  // namespace actilang::nn
