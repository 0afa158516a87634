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
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "actilang/errors.hpp"
#include "actilang/labeler/labeler.hpp"
#include "actilang/nn/archive.hpp"
#include "actilang/rng.hpp"
#include "actilang/train/train.hpp"

namespace actilang::train {
namespace {

namespace fs = std::filesystem;
using aligner::PrefixExample;

const aligner::Tokenizer& tok() {
  static const aligner::Tokenizer t = aligner::Tokenizer::from_templates();
  return t;
}

std::unique_ptr<aligner::Decoder> tiny_decoder(bool frozen = true) {
  auto c = aligner::DecoderConfig::desk(tok().size());
  c.dim = 16;
  c.n_layers = 1;
  c.n_heads = 2;
  c.mlp_hidden = 32;
  auto d = std::make_unique<aligner::Decoder>(c, 3);
  if (frozen) d->freeze();
  return d;
}

encoder::PatchConfig enc_config() {
  encoder::PatchConfig c;
  c.embed_dim = 8;
  return c;
}

std::vector<PrefixExample> examples(std::size_t n, std::uint64_t seed) {
  static const char* kLabels[] = {"Overall, the day is calm.", "In summary, the evening carries the most movement.",
                                  "This is the main rest period of the day.",
                                  "The highest peak of the day falls in this period."};
  std::vector<PrefixExample> out;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"P" + std::to_string(seed * 100 + i), nn::normal_tensor({aligner::kPrefixLen, 8}, 1.0, rng),
                   kLabels[i % 4]});
  }
  return out;
}

TrainConfig small_config() {
  TrainConfig c;
  c.epochs = 3;
  c.batch_size = 2;
  c.warmup_steps = 2;
  c.lr = 5e-3;
  c.seed = 4;
  c.log_every = 2;
  c.val_max_tokens = 12;
  return c;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("actilang_train_test_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Config, Validation) {
  TrainConfig c;
  EXPECT_EQ(c.epochs, 15);
  EXPECT_EQ(c.batch_size, 2u);
  EXPECT_EQ(c.warmup_steps, 100);
  EXPECT_NO_THROW(c.validate());
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_EQ(parse_selection_metric("semantic-F1"), SelectionMetric::kSemanticF1);
  EXPECT_EQ(parse_selection_metric("rouge1"), SelectionMetric::kRouge1);
  EXPECT_THROW(parse_selection_metric("bleu"), ValidationError);
}

TEST(Derangement, NoFixedPointsAndPermutation) {
  for (std::size_t n = 2; n < 40; ++n) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto p = derangement(n, s);
      std::vector<bool> seen(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NE(p[i], i);
        seen[p[i]] = true;
      }
      EXPECT_EQ(std::count(seen.begin(), seen.end(), true), static_cast<long>(n));
    }
  }
  EXPECT_EQ(derangement(10, 3), derangement(10, 3));
  EXPECT_THROW(derangement(1, 0), ValidationError);
}

TEST(Eval, ReferencesAgainstThemselvesScoreOne) {
  const std::vector<std::string> ids = {"P1", "P2", "P3"};
  const std::vector<std::string> refs = {"Overall, the day is calm.", "In summary, the night is quiet.",
                                         "This is the main rest period of the day."};
  auto dec = tiny_decoder();
  aligner::DecoderEmbeddingProvider contextual(*dec, tok());
  metrics::HashedEmbeddingProvider hashed;
  for (const metrics::EmbeddingProvider* p : {static_cast<const metrics::EmbeddingProvider*>(&contextual),
                                              static_cast<const metrics::EmbeddingProvider*>(&hashed)}) {
    const auto t = score_texts(ids, refs, refs, *p);
    for (double v : {t.mean.rouge1, t.mean.rougeL, t.mean.sem_P, t.mean.sem_R, t.mean.sem_F1}) {
      EXPECT_DOUBLE_EQ(v, 1.0);
    }
    EXPECT_DOUBLE_EQ(t.stddev.rouge1, 0.0);
  }
}

TEST(Eval, MacroMeanAndStdMatchBruteForce) {
  const std::vector<std::string> ids = {"P1", "P2", "P3", "P4"};
  const std::vector<std::string> cands = {"the day is calm", "quiet night", "rest", "the evening is busy"};
  const std::vector<std::string> refs = {"the day is calm", "a quiet night here", "the main rest", "calm evening"};
  metrics::HashedEmbeddingProvider hashed;
  const auto t = score_texts(ids, cands, refs, hashed);
  double mean = 0.0;
  for (const auto& r : t.rows) mean += r.report.rouge1;
  mean /= 4;
  double var = 0.0;
  for (const auto& r : t.rows) var += (r.report.rouge1 - mean) * (r.report.rouge1 - mean);
  EXPECT_NEAR(t.mean.rouge1, mean, 1e-15);
  EXPECT_NEAR(t.stddev.rouge1, std::sqrt(var / 4), 1e-15);
  std::ostringstream csv;
  write_eval_csv(csv, t);
  EXPECT_EQ(csv.str().rfind("id,rouge1,rougeL,sem_P,sem_R,sem_F1,truncated\n", 0), 0u);
  const auto j = eval_summary_json(t);
  EXPECT_EQ(j.at("n"), 4);
  for (const char* k : {"rouge1", "rougeL", "sem_P", "sem_R", "sem_F1"}) EXPECT_TRUE(j.at("metrics").contains(k));
  EXPECT_THROW(score_texts({}, {}, {}, hashed), ValidationError);
}

TEST(Eval, SplitAndBaselinePreconditions) {
  auto dec = tiny_decoder();
  aligner::Projection proj({8, 16, aligner::ProjectionKind::kLinear}, 1);
  metrics::HashedEmbeddingProvider hashed;
  EXPECT_THROW(evaluate_split({}, *dec, proj, tok(), hashed), ValidationError);
  EXPECT_THROW(shuffled_input_baseline(examples(1, 1), *dec, proj, tok(), hashed, 0), ValidationError);
  aligner::GenerateOptions opt;
  opt.max_tokens = 5;
  const auto ex = examples(3, 2);
  const auto t = shuffled_input_baseline(ex, *dec, proj, tok(), hashed, 0, opt);
  ASSERT_EQ(t.rows.size(), 3u);
  // Generated from another prefix but scored against each participant's own reference.
  const auto perm = derangement(3, 0);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(t.rows[i].reference, ex[i].label);
    EXPECT_EQ(t.rows[i].candidate, aligner::generate(ex[perm[i]].prefix, *dec, proj, tok(), opt).text);
  }
}

TEST(Train, RequiresFrozenDecoder) {
  auto dec = tiny_decoder(false);
  EXPECT_THROW(train_alignment(examples(4, 1), examples(2, 2), *dec, tok(), small_config(), enc_config()),
               ValidationError);
}

TEST(Train, DeterministicLogAndSelectionInvariant) {
  auto dec = tiny_decoder();
  const std::string before = nn::serialize_archive(dec->to_archive());
  const auto tr = examples(6, 1), va = examples(2, 2);
  const auto a = train_alignment(tr, va, *dec, tok(), small_config(), enc_config());
  const auto b = train_alignment(tr, va, *dec, tok(), small_config(), enc_config());
  EXPECT_EQ(a.log, b.log);
  EXPECT_EQ(nn::serialize_archive(a.last->to_archive()), nn::serialize_archive(b.last->to_archive()));
  EXPECT_EQ(nn::serialize_archive(dec->to_archive()), before);

  ASSERT_EQ(a.log.epochs.size(), 3u);
  for (std::size_t i = 1; i < a.log.steps.size(); ++i) EXPECT_GT(a.log.steps[i].step, a.log.steps[i - 1].step);
  EXPECT_EQ(a.log.steps.size(), 4u);  // 9 steps, logged every 2
  for (const auto& e : a.log.epochs) {
    ASSERT_TRUE(e.val.has_value());
    EXPECT_GE(a.best_metric, e.val->sem_F1);
  }
  EXPECT_GE(a.best_epoch, 1);
  EXPECT_LT(a.log.epochs.back().mean_loss, a.log.epochs.front().mean_loss);
}

TEST(Train, ResumeMatchesUninterruptedRun) {
  auto dec = tiny_decoder();
  const auto tr = examples(6, 1), va = examples(2, 2);
  TrainConfig cfg = small_config();
  cfg.checkpoint_dir = temp_dir("full");
  const auto full = train_alignment(tr, va, *dec, tok(), cfg, enc_config());
  ASSERT_TRUE(fs::exists(cfg.checkpoint_dir / "epoch_002.ckpt"));
  ASSERT_TRUE(fs::exists(cfg.checkpoint_dir / "best.ckpt"));

  TrainConfig again = cfg;
  again.checkpoint_dir = temp_dir("resumed");
  const auto resumed = train_alignment(tr, va, *dec, tok(), again, enc_config(), cfg.checkpoint_dir / "epoch_002.ckpt");
  EXPECT_EQ(resumed.log, full.log);
  EXPECT_EQ(nn::serialize_archive(resumed.last->to_archive()), nn::serialize_archive(full.last->to_archive()));
  EXPECT_EQ(nn::serialize_archive(resumed.best->to_archive()), nn::serialize_archive(full.best->to_archive()));
  EXPECT_EQ(resumed.best_epoch, full.best_epoch);

  const auto best = aligner::Projection::from_archive(nn::load_archive(cfg.checkpoint_dir / "best.ckpt"));
  EXPECT_EQ(nn::serialize_archive(best->to_archive()).size(), nn::serialize_archive(full.best->to_archive()).size());

  TrainConfig other = cfg;
  other.lr = 1e-2;
  EXPECT_THROW(train_alignment(tr, va, *dec, tok(), other, enc_config(), cfg.checkpoint_dir / "epoch_002.ckpt"),
               ValidationError);
  fs::remove_all(cfg.checkpoint_dir);
  fs::remove_all(again.checkpoint_dir);
}

TEST(RunLogTest, JsonAndCsv) {
  RunLog log;
  log.steps = {{10, 1e-4, 2.5}, {20, 2e-4, 2.0}};
  log.epochs = {{1, 2.2, std::nullopt}, {2, 1.1, metrics::MetricReport{0.5, 0.4, 0.9, 0.8, 0.85, true}}};
  EXPECT_EQ(RunLog::from_json(log.to_json()), log);
  std::ostringstream steps, epochs;
  log.write_steps_csv(steps);
  log.write_epochs_csv(epochs);
  EXPECT_EQ(steps.str(), "step,lr,loss\n10,1e-04,2.5\n20,2e-04,2\n");
  EXPECT_NE(epochs.str().find("\n1,2.2,,,,,\n"), std::string::npos);
}

TEST(LmCorpus, TrainPlusAuxiliary) {
  const auto cohort = signal::synthesize_cohort(10, 1, {1, 1, 1, 1, 1});
  dataset::BuildOptions bo;
  const auto ds = dataset::build_dataset(cohort.sequences, bo);
  const auto train = dataset::select_split(ds.pairs, signal::Split::kTrain);
  LmCorpusOptions opt;
  opt.aux_days = 7;
  const auto corpus = build_lm_corpus(train, ds.stats, tok(), opt);
  ASSERT_EQ(corpus.size(), train.size() + 7);
  EXPECT_EQ(corpus[0].label, train[0].label.text);
  for (const auto& ex : corpus) {
    EXPECT_EQ(ex.context.size(), aligner::kPrefixLen);
    const auto ids = tok().encode(ex.label);
    EXPECT_EQ(std::count(ids.begin(), ids.end(), aligner::Tokenizer::kUnk), 0);
  }
}

}  // namespace
}  // namespace actilang::train
