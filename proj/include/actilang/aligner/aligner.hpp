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

// Projection from encoder tokens into a frozen decoder-only language model,
// prefix assembly with loss masking, teacher-forced loss and generation.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "actilang/metrics/metrics.hpp"
#include "actilang/nn/archive.hpp"
#include "actilang/nn/optim.hpp"
#include "actilang/nn/transformer.hpp"
#include "actilang/signal/signal_data.hpp"

namespace actilang::aligner {

inline constexpr std::size_t kPrefixLen = 80;
inline constexpr std::size_t kLevelBins = 16;

// ---- Tokenizer ----------------------------------------------------------------

// Word-level, case preserving; each of . , ; : ! ? is its own token.
class Tokenizer {
 public:
  static constexpr int kPad = 0, kBos = 1, kEos = 2, kUnk = 3;

  // Specials, then the level tokens <lv00>.., then the sorted vocabulary of `corpus`.
  explicit Tokenizer(const std::vector<std::string>& corpus);
  // Vocabulary harvested from the labeler's template bank.
  static Tokenizer from_templates();

  static std::vector<std::string> split(std::string_view text);
  std::vector<int> encode(std::string_view text) const;
  // Specials other than UNK are dropped; no space before punctuation.
  std::string decode(const std::vector<int>& ids) const;

  int id_of(const std::string& token) const;  // kUnk when absent
  const std::string& token(int id) const;
  int level_token(int bin) const;
  std::size_t size() const { return vocab_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocab_; }

  nlohmann::json to_json() const;
  static Tokenizer from_json(const nlohmann::json& j);

 private:
  Tokenizer() = default;
  void index();
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> ids_;
};

// Bin of an 18-minute patch mean after min/max scaling to [0, 1000].
int level_bin(double scaled);
// kPrefixLen level-token ids describing a day, one per patch.
std::vector<int> context_level_ids(const signal::DaySequence& day, const signal::NormalizationStats& stats,
                                   const Tokenizer& tok);

// ---- Decoder ------------------------------------------------------------------

struct DecoderConfig {
  std::size_t dim = 128;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t mlp_hidden = 512;
  std::size_t vocab_size = 0;
  std::size_t max_seq_len = 256;

  static DecoderConfig desk(std::size_t vocab_size);
  static DecoderConfig paper(std::size_t vocab_size);
  void validate() const;
  nlohmann::json to_json() const;
  static DecoderConfig from_json(const nlohmann::json& j);
};

// Pre-LN causal transformer with learned positions and an untied output layer.
class Decoder {
 public:
  Decoder(const DecoderConfig& config, std::uint64_t seed);
  Decoder(const Decoder&) = delete;
  Decoder& operator=(const Decoder&) = delete;

  const DecoderConfig& config() const { return config_; }

  nn::Var embed_tokens(nn::Tape& t, std::span<const int> ids);
  // x: [T, dim] input embeddings placed at positions offset..offset+T-1.
  // Returns final-layer-normed hidden states.
  nn::Var hidden(nn::Tape& t, nn::Var x, std::size_t offset = 0, const std::vector<bool>* key_valid = nullptr);
  nn::Var logits(nn::Tape& t, nn::Var hidden);

  // Tape-free incremental inference.
  struct State {
    std::vector<nn::KvCache> caches;
    std::size_t position = 0;
  };
  State start(std::size_t offset = 0) const;
  nn::Tensor token_rows(std::span<const int> ids) const;
  // Feeds rows [n, dim] at the next positions; returns their final hidden states.
  nn::Tensor step(const nn::Tensor& x, State& state) const;
  nn::Tensor logits_eval(const nn::Tensor& hidden) const;

  nn::ParameterList parameters();
  void freeze();
  bool frozen() const { return frozen_; }
  nn::Archive to_archive() const;
  static std::unique_ptr<Decoder> from_archive(const nn::Archive& a);

 private:
  DecoderConfig config_;
  nn::Parameter tok_emb_, pos_emb_;
  std::vector<std::unique_ptr<nn::TransformerBlock>> blocks_;
  nn::Parameter ln_g_, ln_b_, out_w_, out_b_;
  bool frozen_ = false;
};

using nn::Var;

// ---- Projection ---------------------------------------------------------------

enum class ProjectionKind { kLinear, kMlp };

struct ProjectionConfig {
  std::size_t encoder_dim = 32;
  std::size_t decoder_dim = 128;
  ProjectionKind kind = ProjectionKind::kLinear;

  nlohmann::json to_json() const;
  static ProjectionConfig from_json(const nlohmann::json& j);
};

// Per-token affine map (or two-layer MLP) from encoder to decoder width.
class Projection {
 public:
  Projection(const ProjectionConfig& config, std::uint64_t seed);
  const ProjectionConfig& config() const { return config_; }
  nn::Var forward(nn::Tape& t, const nn::Tensor& enc);
  nn::Tensor apply(const nn::Tensor& enc) const;
  nn::ParameterList parameters();
  nn::Parameter& weight() { return w1_; }
  nn::Archive to_archive() const;
  static std::unique_ptr<Projection> from_archive(const nn::Archive& a);

 private:
  void check(const nn::Tensor& enc) const;
  ProjectionConfig config_;
  nn::Parameter w1_, b1_, w2_, b2_;
};

// ---- Prefix batches -----------------------------------------------------------

struct PrefixExample {
  std::string participant_id;
  nn::Tensor prefix;  // [kPrefixLen, encoder_dim] frozen encoder output
  std::string label;
};

// Element b occupies positions 0..seq_len-1: prefix rows, BOS, label ids, EOS, PAD.
struct PrefixBatch {
  std::vector<std::string> participant_ids;
  std::vector<nn::Tensor> prefixes;
  std::vector<std::vector<int>> input_ids;   // [B][1 + L]: BOS, label, EOS, PAD
  std::vector<std::vector<int>> targets;     // [B][kPrefixLen + 1 + L]
  std::vector<std::vector<bool>> key_valid;  // [B][kPrefixLen + 1 + L]
  std::vector<std::size_t> lengths;          // real (unpadded) lengths
  std::size_t seq_len = 0;

  std::size_t size() const { return prefixes.size(); }
  // Targets with prefix and PAD positions forced to kIgnoreIndex, whatever is stored there.
  std::vector<int> effective_targets(std::size_t b) const;
  std::size_t supervised() const;
};

PrefixBatch assemble_prefix_batch(const std::vector<PrefixExample>& examples, const Tokenizer& tok,
                                  std::size_t max_seq_len);

// Mean token NLL over every supervised position in the batch. Each element runs
// at its real length, which matches the padded computation under causal masking.
nn::Var forward_loss(nn::Tape& t, const PrefixBatch& batch, Decoder& decoder, Projection& projection);

// Same loss from the padded [seq_len] layout with key masking; used to check the above.
nn::Var forward_loss_padded(nn::Tape& t, const PrefixBatch& batch, Decoder& decoder, Projection& projection);

// ---- Generation ---------------------------------------------------------------

enum class DecodeMode { kGreedy, kTopK };

struct GenerateOptions {
  std::size_t max_tokens = 160;
  DecodeMode mode = DecodeMode::kGreedy;
  std::size_t top_k = 5;
  std::uint64_t seed = 0;
};

struct Generation {
  std::vector<int> ids;  // without BOS/EOS
  std::string text;
  bool truncated = false;
};

Generation generate(const nn::Tensor& prefix, const Decoder& decoder, const Projection& projection,
                    const Tokenizer& tok, const GenerateOptions& opt = {});

// ---- Decoder language-model pretraining ------------------------------------------

enum class LmContext { kLevels, kNone };

struct LmExample {
  std::vector<int> context;  // kPrefixLen level ids, or empty
  std::string label;
};

struct LmOptions {
  LmContext context = LmContext::kLevels;
  int epochs = 6;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  nn::AdamConfig adam{3e-3, 0.9, 0.999, 1e-8};
  std::int64_t warmup_steps = 100;
  double jitter = 0.15;  // per-token chance of a +-1 bin shift
};

struct LmReport {
  std::vector<double> epoch_loss;
};

// Loss of one example; context rows are inputs only.
double lm_loss(Decoder& decoder, const Tokenizer& tok, const LmExample& ex);
// Trains every decoder parameter, then freezes them.
LmReport pretrain_decoder_lm(Decoder& decoder, const Tokenizer& tok, const std::vector<LmExample>& corpus,
                             const LmOptions& opt);

// Greedy continuation after a level-token context (LM sanity checks).
Generation generate_from_context(const std::vector<int>& context, const Decoder& decoder, const Tokenizer& tok,
                                 std::size_t max_tokens);

// ---- Embedding provider ---------------------------------------------------------

// Final-layer hidden states of the frozen decoder run over BOS + text, unit normalised.
class DecoderEmbeddingProvider final : public metrics::EmbeddingProvider {
 public:
  DecoderEmbeddingProvider(const Decoder& decoder, const Tokenizer& tok) : decoder_(decoder), tok_(tok) {}
  std::string name() const override { return "decoder-hidden"; }
  std::vector<std::vector<double>> embed(const metrics::Tokens& tokens) const override;
  bool signed_cosines() const override { return true; }

 private:
  const Decoder& decoder_;
  const Tokenizer& tok_;
};

}  // namespace actilang::aligner
