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

#include <gtest/gtest.h>

#include "actilang/aligner/aligner.hpp"
#include "actilang/errors.hpp"
#include "actilang/labeler/labeler.hpp"
#include "actilang/nn/ops.hpp"
#include "actilang/rng.hpp"

namespace actilang::aligner {
namespace {

using nn::Tensor;

const Tokenizer& tok() {
  static const Tokenizer t = Tokenizer::from_templates();
  return t;
}

DecoderConfig tiny_config() {
  DecoderConfig c = DecoderConfig::desk(tok().size());
  c.dim = 16;
  c.n_layers = 1;
  c.n_heads = 2;
  c.mlp_hidden = 32;
  c.max_seq_len = 224;
  return c;
}

Tensor random_prefix(std::uint64_t seed, std::size_t dim = 8) {
  Rng rng(seed);
  return nn::normal_tensor({kPrefixLen, dim}, 1.0, rng);
}

nn::Parameter& param(nn::ParameterList list, const std::string& name) {
  for (nn::Parameter* p : list) {
    if (p->name == name) return *p;
  }
  throw std::runtime_error("no parameter " + name);
}

std::string random_label(std::uint64_t seed) {
  Rng rng(seed);
  signal::HourlyProfile p;
  p.participant_id = "P" + std::to_string(seed);
  for (int& v : p.levels) v = static_cast<int>(rng.below(1001));
  return labeler::generate_label(p, seed, {}).text;
}

// ---- Tokenizer ----

TEST(Tokenizer, SpecialsFirstAndNoCollision) {
  EXPECT_EQ(tok().token(Tokenizer::kPad), "<pad>");
  EXPECT_EQ(tok().token(Tokenizer::kBos), "<bos>");
  EXPECT_EQ(tok().token(Tokenizer::kEos), "<eos>");
  EXPECT_EQ(tok().token(Tokenizer::kUnk), "<unk>");
  EXPECT_EQ(tok().token(tok().level_token(0)), "<lv00>");
  EXPECT_EQ(tok().token(tok().level_token(15)), "<lv15>");
  EXPECT_EQ(tok().encode("<pad> <bos> <lv03>"), (std::vector<int>{3, 3, 3}));
  EXPECT_LT(tok().size(), 500u);
}

TEST(Tokenizer, RoundTripsTemplatesAndLabels) {
  for (const auto& s : labeler::template_corpus()) {
    const auto ids = tok().encode(s);
    EXPECT_EQ(std::count(ids.begin(), ids.end(), Tokenizer::kUnk), 0) << s;
    EXPECT_EQ(tok().decode(ids), s);
  }
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const std::string label = random_label(seed);
    const auto ids = tok().encode(label);
    EXPECT_EQ(std::count(ids.begin(), ids.end(), Tokenizer::kUnk), 0);
    EXPECT_EQ(tok().decode(ids), label);
  }
}

TEST(Tokenizer, SplitAndCanonicalWhitespace) {
  EXPECT_EQ(Tokenizer::split("Hi,  there.\n"), (std::vector<std::string>{"Hi", ",", "there", "."}));
  EXPECT_EQ(tok().decode(tok().encode("  Overall ,  the  day .")), "Overall, the day.");
  EXPECT_EQ(tok().encode("zebra")[0], Tokenizer::kUnk);
}

TEST(Tokenizer, JsonRoundTrip) {
  const Tokenizer back = Tokenizer::from_json(tok().to_json());
  EXPECT_EQ(back.vocabulary(), tok().vocabulary());
  auto bad = tok().to_json();
  bad["vocabulary"][0] = "<bos>";
  EXPECT_THROW(Tokenizer::from_json(bad), ValidationError);
}

TEST(Levels, BinEdgesAndContext) {
  EXPECT_EQ(level_bin(0.0), 0);
  EXPECT_EQ(level_bin(0.49), 0);
  EXPECT_EQ(level_bin(0.5), 1);
  EXPECT_EQ(level_bin(849.9), 14);
  EXPECT_EQ(level_bin(850.0), 15);
  EXPECT_EQ(level_bin(1000.0), 15);
  signal::DaySequence d{"P1", 0, std::vector<double>(1440, 0.0)};
  for (std::size_t i = 18; i < 36; ++i) d.minutes[i] = 100.0;
  signal::NormalizationStats stats;
  stats.global_min = 0.0;
  stats.global_max = 100.0;
  const auto ctx = context_level_ids(d, stats, tok());
  ASSERT_EQ(ctx.size(), kPrefixLen);
  EXPECT_EQ(ctx[0], tok().level_token(0));
  EXPECT_EQ(ctx[1], tok().level_token(15));
}

// ---- Projection ----

TEST(Projection, ZeroWeightsGiveZero) {
  Projection p({8, 16, ProjectionKind::kLinear}, 1);
  p.weight().value.fill(0.0);
  const Tensor y = p.apply(random_prefix(1));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Projection, PaperScaleShape) {
  Projection p({96, 2048, ProjectionKind::kLinear}, 1);
  EXPECT_EQ(p.apply(random_prefix(2, 96)).shape(), (nn::Shape{80, 2048}));
  EXPECT_THROW(p.apply(random_prefix(2, 32)), ShapeError);
}

TEST(Projection, MatchesPerTokenLoop) {
  for (auto kind : {ProjectionKind::kLinear, ProjectionKind::kMlp}) {
    Projection p({8, 16, kind}, 3);
    const Tensor x = random_prefix(4);
    const Tensor y = p.apply(x);
    nn::Tape t;
    const Tensor yt = p.forward(t, x).value();
    const auto params = p.parameters();
    for (std::size_t r = 0; r < kPrefixLen; ++r) {
      std::vector<double> h(16, 0.0);
      for (std::size_t j = 0; j < 16; ++j) {
        h[j] = params[1]->value[j];
        for (std::size_t i = 0; i < 8; ++i) h[j] += x.at(r, i) * params[0]->value.at(i, j);
      }
      if (kind == ProjectionKind::kMlp) {
        std::vector<double> o(16, 0.0);
        for (std::size_t j = 0; j < 16; ++j) {
          o[j] = params[3]->value[j];
          for (std::size_t i = 0; i < 16; ++i) {
            const double g = 0.5 * h[i] * (1.0 + std::erf(h[i] / std::sqrt(2.0)));
            o[j] += g * params[2]->value.at(i, j);
          }
        }
        h = o;
      }
      for (std::size_t j = 0; j < 16; ++j) {
        EXPECT_NEAR(y.at(r, j), h[j], 1e-12);
        EXPECT_NEAR(yt.at(r, j), h[j], 1e-12);
      }
    }
  }
}

TEST(Projection, ArchiveRoundTrip) {
  Projection p({8, 16, ProjectionKind::kMlp}, 5);
  const auto back = Projection::from_archive(nn::deserialize_archive(nn::serialize_archive(p.to_archive())));
  EXPECT_EQ(back->config().kind, ProjectionKind::kMlp);
  const Tensor x = random_prefix(6);
  EXPECT_EQ(back->apply(x), p.apply(x));
}

// ---- Batches ----

TEST(Batch, EmptyLabelHasNoSupervisedTokens) {
  try {
    assemble_prefix_batch({{"P7", random_prefix(1), " "}}, tok(), 224);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("no supervised tokens"), std::string::npos);
  }
}

TEST(Batch, OneTokenLabelHasTwoSupervisedPositions) {
  const auto b = assemble_prefix_batch({{"P1", random_prefix(1), "Overall"}}, tok(), 224);
  EXPECT_EQ(b.supervised(), 2u);
  EXPECT_EQ(b.seq_len, kPrefixLen + 3);
  EXPECT_EQ(b.input_ids[0], (std::vector<int>{Tokenizer::kBos, tok().id_of("Overall"), Tokenizer::kEos}));
  EXPECT_EQ(b.targets[0][kPrefixLen], tok().id_of("Overall"));
  EXPECT_EQ(b.targets[0][kPrefixLen + 1], Tokenizer::kEos);
  EXPECT_EQ(b.targets[0][kPrefixLen + 2], nn::kIgnoreIndex);
}

TEST(Batch, PrefixTargetsIgnoredAndPadMasked) {
  const auto b = assemble_prefix_batch(
      {{"P1", random_prefix(1), random_label(1)}, {"P2", random_prefix(2), "In summary, the day is calm."}}, tok(), 224);
  for (std::size_t e = 0; e < b.size(); ++e) {
    for (std::size_t i = 0; i < kPrefixLen; ++i) EXPECT_EQ(b.targets[e][i], nn::kIgnoreIndex);
    EXPECT_EQ(b.input_ids[e][0], Tokenizer::kBos);
    for (std::size_t i = b.lengths[e]; i < b.seq_len; ++i) {
      EXPECT_EQ(b.input_ids[e][i - kPrefixLen], Tokenizer::kPad);
      EXPECT_EQ(b.targets[e][i], nn::kIgnoreIndex);
      EXPECT_FALSE(b.key_valid[e][i]);
    }
  }
  EXPECT_LT(b.lengths[1], b.seq_len);
}

TEST(Batch, TooLongOrUnknownNamesParticipant) {
  try {
    assemble_prefix_batch({{"P42", random_prefix(1), random_label(3)}}, tok(), 100);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("P42"), std::string::npos);
  }
  EXPECT_THROW(assemble_prefix_batch({{"P5", random_prefix(1), "Overall zebra"}}, tok(), 224), ValidationError);
}

// ---- Loss ----

struct Fixture {
  Decoder decoder{tiny_config(), 11};
  Projection projection{{8, 16, ProjectionKind::kLinear}, 12};
  PrefixBatch batch = assemble_prefix_batch(
      {{"P1", random_prefix(21), random_label(21)}, {"P2", random_prefix(22), "In summary, the day is calm."}}, tok(),
      224);
  Fixture() { decoder.freeze(); }
};

double loss_of(Fixture& f, bool padded) {
  nn::Tape t;
  auto l = padded ? forward_loss_padded(t, f.batch, f.decoder, f.projection)
                  : forward_loss(t, f.batch, f.decoder, f.projection);
  return l.value()[0];
}

TEST(Loss, UniformLogitsGiveLogV) {
  Fixture f;
  param(f.decoder.parameters(), "decoder.out.w").value.fill(0.0);
  param(f.decoder.parameters(), "decoder.out.b").value.fill(0.0);
  f.batch = assemble_prefix_batch({{"P1", random_prefix(1), "Overall"}}, tok(), 224);
  EXPECT_NEAR(loss_of(f, false), std::log(static_cast<double>(tok().size())), 1e-12);
}

TEST(Loss, TrimmedEqualsPaddedIncludingGradients) {
  Fixture f;
  nn::Tape t1, t2;
  auto a = forward_loss(t1, f.batch, f.decoder, f.projection);
  t1.backward(a);
  const Tensor ga = f.projection.weight().grad;
  f.projection.weight().zero_grad();
  auto b = forward_loss_padded(t2, f.batch, f.decoder, f.projection);
  t2.backward(b);
  EXPECT_NEAR(a.value()[0], b.value()[0], 1e-12);
  for (std::size_t i = 0; i < ga.size(); ++i) EXPECT_NEAR(ga[i], f.projection.weight().grad[i], 1e-12);
}

TEST(Loss, InvariantToPrefixAndPadTargets) {
  for (bool padded : {false, true}) {
    Fixture f;
    nn::Tape t0;
    auto l0 = padded ? forward_loss_padded(t0, f.batch, f.decoder, f.projection)
                     : forward_loss(t0, f.batch, f.decoder, f.projection);
    t0.backward(l0);
    const Tensor g0 = f.projection.weight().grad;
    f.projection.weight().zero_grad();
    Rng rng(4);
    for (std::size_t e = 0; e < f.batch.size(); ++e) {
      for (std::size_t i = 0; i < f.batch.seq_len; ++i) {
        if (i < kPrefixLen || i >= f.batch.lengths[e]) f.batch.targets[e][i] = static_cast<int>(rng.below(tok().size()));
      }
    }
    nn::Tape t1;
    auto l1 = padded ? forward_loss_padded(t1, f.batch, f.decoder, f.projection)
                     : forward_loss(t1, f.batch, f.decoder, f.projection);
    t1.backward(l1);
    EXPECT_EQ(l1.value()[0], l0.value()[0]);
    EXPECT_EQ(f.projection.weight().grad, g0);
  }
}

TEST(Loss, MatchesSliceAndAverageOracle) {
  Fixture f;
  nn::Tape t;
  const double loss = forward_loss(t, f.batch, f.decoder, f.projection).value()[0];
  double nll = 0.0;
  std::size_t count = 0;
  for (std::size_t e = 0; e < f.batch.size(); ++e) {
    nn::Tape te;
    nn::Var x = nn::concat_rows(f.projection.forward(te, f.batch.prefixes[e]),
                                f.decoder.embed_tokens(te, f.batch.input_ids[e]));
    const Tensor logits = f.decoder.logits(te, f.decoder.hidden(te, x, 0, &f.batch.key_valid[e])).value();
    for (std::size_t i = 0; i < f.batch.seq_len; ++i) {
      const int target = f.batch.targets[e][i];
      if (target == nn::kIgnoreIndex) continue;
      const auto row = logits.row(i);
      const double m = *std::max_element(row.begin(), row.end());
      double z = 0.0;
      for (double v : row) z += std::exp(v - m);
      nll += -(row[static_cast<std::size_t>(target)] - m - std::log(z));
      ++count;
    }
  }
  EXPECT_NEAR(loss, nll / static_cast<double>(count), 1e-12);
}

TEST(Loss, FiniteDifferenceOnProjectionWeights) {
  Fixture f;
  nn::Tape t;
  t.backward(forward_loss(t, f.batch, f.decoder, f.projection));
  const Tensor grad = f.projection.weight().grad;
  f.projection.weight().zero_grad();
  Rng rng(9);
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t i = rng.below(grad.size());
    double& w = f.projection.weight().value[i];
    const double saved = w;
    w = saved + h;
    const double up = loss_of(f, false);
    w = saved - h;
    const double down = loss_of(f, false);
    w = saved;
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - grad[i]) / std::max(1e-8, std::abs(fd) + std::abs(grad[i])));
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Loss, OnlyProjectionReceivesGradients) {
  Fixture f;
  nn::Tape t;
  t.backward(forward_loss(t, f.batch, f.decoder, f.projection));
  for (nn::Parameter* p : f.decoder.parameters()) EXPECT_FALSE(p->has_grad) << p->name;
  for (nn::Parameter* p : f.projection.parameters()) EXPECT_TRUE(p->has_grad) << p->name;
}

TEST(Decoder, CausalityAndPrefixVisibility) {
  Fixture f;
  const auto& b = f.batch;
  auto logits_for = [&](const Tensor& prefix, const std::vector<int>& inputs) {
    nn::Tape t;
    nn::Var x = nn::concat_rows(f.projection.forward(t, prefix), f.decoder.embed_tokens(t, inputs));
    return f.decoder.logits(t, f.decoder.hidden(t, x)).value();
  };
  const std::size_t len = b.lengths[0] - kPrefixLen;
  const std::vector<int> inputs(b.input_ids[0].begin(), b.input_ids[0].begin() + static_cast<std::ptrdiff_t>(len));
  const Tensor base = logits_for(b.prefixes[0], inputs);
  // Changing label token j leaves rows < 80 + j untouched.
  for (std::size_t j : {std::size_t{5}, len / 2, len - 1}) {
    auto changed = inputs;
    changed[j] = changed[j] == tok().id_of("the") ? tok().id_of("day") : tok().id_of("the");
    const Tensor other = logits_for(b.prefixes[0], changed);
    for (std::size_t r = 0; r < kPrefixLen + j; ++r) {
      for (std::size_t c = 0; c < base.cols(); ++c) ASSERT_EQ(other.at(r, c), base.at(r, c));
    }
    bool moved = false;
    for (std::size_t c = 0; c < base.cols(); ++c) moved = moved || other.at(kPrefixLen + j, c) != base.at(kPrefixLen + j, c);
    EXPECT_TRUE(moved);
  }
  // Every prefix row reaches the first supervised position.
  for (std::size_t p = 0; p < kPrefixLen; ++p) {
    Tensor prefix = b.prefixes[0];
    prefix.at(p, 0) += 0.5;
    const Tensor other = logits_for(prefix, inputs);
    double diff = 0.0;
    for (std::size_t c = 0; c < base.cols(); ++c) diff += std::abs(other.at(kPrefixLen, c) - base.at(kPrefixLen, c));
    EXPECT_GT(diff, 0.0) << "prefix row " << p;
  }
}

TEST(Decoder, IncrementalStepMatchesTape) {
  Fixture f;
  const auto& b = f.batch;
  nn::Tape t;
  nn::Var x = nn::concat_rows(f.projection.forward(t, b.prefixes[0]), f.decoder.embed_tokens(t, b.input_ids[0]));
  const Tensor full = f.decoder.hidden(t, x, 0, &b.key_valid[0]).value();
  auto state = f.decoder.start(0);
  f.decoder.step(f.projection.apply(b.prefixes[0]), state);
  for (std::size_t j = 0; j < 10; ++j) {
    const Tensor h = f.decoder.step(f.decoder.token_rows(std::span<const int>(&b.input_ids[0][j], 1)), state);
    for (std::size_t c = 0; c < h.cols(); ++c) EXPECT_NEAR(h.at(0, c), full.at(kPrefixLen + j, c), 1e-10);
  }
}

TEST(Decoder, ArchiveRoundTripAndLimits) {
  Decoder d(tiny_config(), 3);
  d.freeze();
  const auto bytes = nn::serialize_archive(d.to_archive());
  const auto back = Decoder::from_archive(nn::deserialize_archive(bytes));
  EXPECT_TRUE(back->frozen());
  EXPECT_EQ(nn::serialize_archive(back->to_archive()), bytes);
  auto state = d.start(tiny_config().max_seq_len);
  const int bos = Tokenizer::kBos;
  EXPECT_THROW(d.step(d.token_rows(std::span<const int>(&bos, 1)), state), ValidationError);
  DecoderConfig bad = tiny_config();
  bad.n_heads = 3;
  EXPECT_THROW(bad.validate(), ValidationError);
}

// ---- Generation ----

TEST(Generate, GreedyDeterministicAndTruncation) {
  Fixture f;
  const Tensor prefix = random_prefix(31);
  const auto a = generate(prefix, f.decoder, f.projection, tok());
  const auto b = generate(prefix, f.decoder, f.projection, tok());
  EXPECT_EQ(a.ids, b.ids);
  EXPECT_EQ(a.text, b.text);
  GenerateOptions one;
  one.max_tokens = 1;
  // An untrained decoder may pick EOS first; bias it away so one word is emitted.
  param(f.decoder.parameters(), "decoder.out.b").value[Tokenizer::kEos] = -1e3;
  const auto c = generate(prefix, f.decoder, f.projection, tok(), one);
  EXPECT_EQ(c.ids.size(), 1u);
  EXPECT_TRUE(c.truncated);
  for (int id : a.ids) EXPECT_GE(id, tok().level_token(15) + 1);
}

TEST(Generate, TopKSeeded) {
  Fixture f;
  const Tensor prefix = random_prefix(32);
  GenerateOptions opt;
  opt.mode = DecodeMode::kTopK;
  opt.top_k = 5;
  opt.max_tokens = 30;
  opt.seed = 1;
  const auto a = generate(prefix, f.decoder, f.projection, tok(), opt);
  EXPECT_EQ(generate(prefix, f.decoder, f.projection, tok(), opt).ids, a.ids);
  bool differs = false;
  for (std::uint64_t s = 2; s < 6 && !differs; ++s) {
    opt.seed = s;
    differs = generate(prefix, f.decoder, f.projection, tok(), opt).ids != a.ids;
  }
  EXPECT_TRUE(differs);
}

// ---- LM pretraining and conditioning ----

TEST(Lm, PretrainingLowersLossAndFreezes) {
  Decoder d(tiny_config(), 4);
  std::vector<LmExample> corpus;
  for (std::uint64_t s = 0; s < 16; ++s) corpus.push_back({{}, random_label(s)});
  LmOptions opt;
  opt.context = LmContext::kNone;
  opt.epochs = 3;
  opt.batch_size = 4;
  opt.warmup_steps = 2;
  opt.adam.lr = 1e-2;
  const double before = lm_loss(d, tok(), corpus[0]);
  const auto report = pretrain_decoder_lm(d, tok(), corpus, opt);
  EXPECT_TRUE(d.frozen());
  for (nn::Parameter* p : d.parameters()) EXPECT_TRUE(p->frozen);
  EXPECT_LT(report.epoch_loss.back(), report.epoch_loss.front());
  EXPECT_LT(lm_loss(d, tok(), corpus[0]), before);
  EXPECT_THROW(pretrain_decoder_lm(d, tok(), corpus, opt), ValidationError);
}

// Two labels distinguished only by their prefixes: a projection overfit on both
// pairs has to route each prefix to its own label.
TEST(Overfit, ProjectionRecoversEachPairVerbatim) {
  const std::string la = "Overall, the day is calm. In summary, the night provides the main rest.";
  const std::string lb = "Overall, activity is concentrated in the morning. The highest peak of the day falls in this period.";
  Decoder d(tiny_config(), 5);
  std::vector<LmExample> corpus;
  for (int r = 0; r < 8; ++r) {
    corpus.push_back({std::vector<int>(kPrefixLen, tok().level_token(0)), la});
    corpus.push_back({std::vector<int>(kPrefixLen, tok().level_token(15)), lb});
  }
  LmOptions lo;
  lo.epochs = 30;
  lo.batch_size = 4;
  lo.warmup_steps = 5;
  lo.adam.lr = 1e-2;
  lo.jitter = 0.0;
  pretrain_decoder_lm(d, tok(), corpus, lo);
  ASSERT_EQ(generate_from_context(corpus[0].context, d, tok(), 60).text, la);
  ASSERT_EQ(generate_from_context(corpus[1].context, d, tok(), 60).text, lb);

  Projection p({8, 16, ProjectionKind::kLinear}, 6);
  const std::vector<PrefixExample> pairs = {{"A", random_prefix(40), la}, {"B", random_prefix(41), lb}};
  const auto batch = assemble_prefix_batch(pairs, tok(), 224);
  nn::Adam adam(p.parameters(), {1e-2, 0.9, 0.999, 1e-8});
  double loss = 0.0;
  for (int step = 0; step < 300; ++step) {
    nn::Tape t;
    auto l = forward_loss(t, batch, d, p);
    loss = l.value()[0];
    t.backward(l);
    adam.step();
    if (loss < 1e-3) break;
  }
  EXPECT_LT(loss, 0.05);
  EXPECT_EQ(generate(pairs[0].prefix, d, p, tok()).text, la);
  EXPECT_EQ(generate(pairs[1].prefix, d, p, tok()).text, lb);
}

TEST(Provider, UnitNormDeterministicSelfMatch) {
  Decoder d(tiny_config(), 8);
  d.freeze();
  DecoderEmbeddingProvider provider(d, tok());
  const auto tokens = metrics::tokenize(random_label(2));
  const auto v = provider.embed(tokens);
  ASSERT_EQ(v.size(), tokens.size());
  for (const auto& x : v) {
    double n = 0.0;
    for (double e : x) n += e * e;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-9);
  }
  EXPECT_EQ(provider.embed(tokens), v);
  EXPECT_DOUBLE_EQ(metrics::semantic_score(tokens, tokens, provider).prf.f1, 1.0);
  // Inputs longer than the position table are windowed.
  metrics::Tokens many;
  for (int i = 0; i < 5; ++i) many.insert(many.end(), tokens.begin(), tokens.end());
  EXPECT_EQ(provider.embed(many).size(), many.size());
}

}  // namespace
}  // namespace actilang::aligner
