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

// Alignment training loop, split evaluation and the shuffled-prefix baseline.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "actilang/aligner/aligner.hpp"
#include "actilang/encoder/pat_encoder.hpp"
#include "actilang/metrics/metrics.hpp"
#include "actilang/signal/dataset.hpp"

namespace actilang::train {

enum class SelectionMetric { kSemanticF1, kRouge1 };
std::string selection_metric_name(SelectionMetric m);
SelectionMetric parse_selection_metric(const std::string& s);

struct TrainConfig {
  int epochs = 15;
  std::size_t batch_size = 2;
  std::int64_t warmup_steps = 100;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  int eval_every = 1;  // epochs between validation passes; the last epoch is always evaluated
  int log_every = 10;  // steps between RunLog step rows
  std::filesystem::path checkpoint_dir;  // empty: keep checkpoints in memory only
  SelectionMetric metric = SelectionMetric::kSemanticF1;
  aligner::ProjectionKind projection = aligner::ProjectionKind::kLinear;
  std::size_t max_seq_len = 256;
  std::size_t val_max_tokens = 160;

  void validate() const;
  nlohmann::json to_json() const;
};

struct StepRow {
  std::int64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  friend bool operator==(const StepRow&, const StepRow&) = default;
};

struct EpochRow {
  int epoch = 0;
  double mean_loss = 0.0;
  std::optional<metrics::MetricReport> val;
  friend bool operator==(const EpochRow& a, const EpochRow& b);
};

struct RunLog {
  std::vector<StepRow> steps;
  std::vector<EpochRow> epochs;

  friend bool operator==(const RunLog&, const RunLog&) = default;
  nlohmann::json to_json() const;
  static RunLog from_json(const nlohmann::json& j);
  void write_steps_csv(std::ostream& out) const;
  void write_epochs_csv(std::ostream& out) const;
};

struct TrainResult {
  std::unique_ptr<aligner::Projection> best;
  std::unique_ptr<aligner::Projection> last;
  RunLog log;
  int best_epoch = 0;
  double best_metric = 0.0;
};

// Frozen encoder outputs for a split, paired with labels.
std::vector<aligner::PrefixExample> encode_examples(std::span<const dataset::PairRecord> pairs,
                                                    const encoder::PatchEncoder& enc,
                                                    const signal::NormalizationStats& stats);

// Projection seed for the untrained starting point of a run.
std::uint64_t projection_seed(std::uint64_t seed);

// Trains a fresh projection (or resumes from an epoch checkpoint) against the frozen decoder.
// Epoch checkpoints go to checkpoint_dir/epoch_NNN.ckpt and the best one to best.ckpt.
TrainResult train_alignment(const std::vector<aligner::PrefixExample>& train,
                            const std::vector<aligner::PrefixExample>& val, aligner::Decoder& decoder,
                            const aligner::Tokenizer& tok, const TrainConfig& config,
                            const encoder::PatchConfig& encoder_config,
                            const std::optional<std::filesystem::path>& resume_from = std::nullopt);

// Projection weights from either best.ckpt or an epoch_NNN.ckpt.
std::unique_ptr<aligner::Projection> load_projection(const std::filesystem::path& path);

// ---- Evaluation ----------------------------------------------------------------

struct EvalRow {
  std::string id;
  std::string candidate;
  std::string reference;
  bool truncated = false;
  metrics::MetricReport report;
};

struct EvalTable {
  std::vector<EvalRow> rows;
  metrics::MetricReport mean;
  metrics::MetricReport stddev;  // population std across participants
  std::string provider;
};

// Scores candidate/reference pairs; ids must be non-empty and sizes equal.
EvalTable score_texts(const std::vector<std::string>& ids, const std::vector<std::string>& candidates,
                      const std::vector<std::string>& references, const metrics::EmbeddingProvider& provider);

EvalTable evaluate_split(const std::vector<aligner::PrefixExample>& examples, const aligner::Decoder& decoder,
                         const aligner::Projection& projection, const aligner::Tokenizer& tok,
                         const metrics::EmbeddingProvider& provider, const aligner::GenerateOptions& opt = {});

// Random cyclic permutation: perm[i] != i for every i. Requires n >= 2.
std::vector<std::size_t> derangement(std::size_t n, std::uint64_t seed);

// Generates from another participant's prefix and scores against the original reference.
EvalTable shuffled_input_baseline(const std::vector<aligner::PrefixExample>& examples, const aligner::Decoder& decoder,
                                  const aligner::Projection& projection, const aligner::Tokenizer& tok,
                                  const metrics::EmbeddingProvider& provider, std::uint64_t seed,
                                  const aligner::GenerateOptions& opt = {});

// Columns id,rouge1,rougeL,sem_P,sem_R,sem_F1,truncated.
void write_eval_csv(std::ostream& out, const EvalTable& table);
nlohmann::json eval_summary_json(const EvalTable& table);

// ---- Decoder LM corpus -----------------------------------------------------------

struct LmCorpusOptions {
  std::size_t aux_days = 600;
  std::uint64_t aux_seed = 0;
  std::uint64_t label_seed = 0;
};

// Level-context LM examples: the train split plus an auxiliary synthetic cohort
// labelled by the oracle under the same normalisation.
std::vector<aligner::LmExample> build_lm_corpus(std::span<const dataset::PairRecord> train_pairs,
                                                const signal::NormalizationStats& stats,
                                                const aligner::Tokenizer& tok, const LmCorpusOptions& opt);

}  // namespace actilang::train
