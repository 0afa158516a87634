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

#include "actilang/aligner/aligner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>

#include "actilang/errors.hpp"
#include "actilang/labeler/labeler.hpp"
#include "actilang/nn/ops.hpp"
#include "actilang/rng.hpp"

namespace actilang::aligner {

using nn::Tensor;

namespace {

constexpr std::string_view kPunct = ".,;:!?";
constexpr const char* kSpecials[] = {"<pad>", "<bos>", "<eos>", "<unk>"};
constexpr double kLevelEdges[kLevelBins - 1] = {0.5, 10, 20, 35, 50, 75, 100, 150, 200, 275, 350, 450, 550, 700, 850};

bool is_punct_token(const std::string& t) { return t.size() == 1 && kPunct.find(t[0]) != std::string_view::npos; }

std::string level_name(int bin) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "<lv%02d>", bin);
  return buf;
}

constexpr int kFirstLevel = 4;
constexpr int kFirstWord = kFirstLevel + static_cast<int>(kLevelBins);

}  // namespace

// ---- Tokenizer ----------------------------------------------------------------

std::vector<std::string> Tokenizer::split(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      flush();
    } else if (kPunct.find(c) != std::string_view::npos) {
      flush();
      out.emplace_back(1, c);
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

Tokenizer::Tokenizer(const std::vector<std::string>& corpus) {
  for (const char* s : kSpecials) vocab_.emplace_back(s);
  for (int b = 0; b < static_cast<int>(kLevelBins); ++b) vocab_.push_back(level_name(b));
  std::set<std::string> words;
  for (const auto& text : corpus) {
    for (auto& w : split(text)) words.insert(std::move(w));
  }
  for (const auto& w : words) {
    if (w.front() == '<' && w.back() == '>') throw ValidationError("vocabulary word '" + w + "' looks like a special");
    vocab_.push_back(w);
  }
  index();
}

Tokenizer Tokenizer::from_templates() { return Tokenizer(labeler::template_corpus()); }

void Tokenizer::index() {
  ids_.clear();
  for (std::size_t i = 0; i < vocab_.size(); ++i) ids_.emplace(vocab_[i], static_cast<int>(i));
}

int Tokenizer::id_of(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Tokenizer::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size()) {
    throw ValidationError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return vocab_[static_cast<std::size_t>(id)];
}

int Tokenizer::level_token(int bin) const {
  if (bin < 0 || bin >= static_cast<int>(kLevelBins)) throw ValidationError("level bin out of range");
  return kFirstLevel + bin;
}

std::vector<int> Tokenizer::encode(std::string_view text) const {
  std::vector<int> out;
  for (const auto& w : split(text)) {
    const int id = id_of(w);
    out.push_back(id >= kFirstWord ? id : kUnk);
  }
  return out;
}

std::string Tokenizer::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id == kPad || id == kBos || id == kEos) continue;
    const std::string& t = token(id);
    if (!out.empty() && !is_punct_token(t)) out.push_back(' ');
    out += t;
  }
  return out;
}

nlohmann::json Tokenizer::to_json() const { return {{"kind", "word-tokenizer"}, {"vocabulary", vocab_}}; }

Tokenizer Tokenizer::from_json(const nlohmann::json& j) {
  Tokenizer t;
  try {
    t.vocab_ = j.at("vocabulary").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("tokenizer: ") + e.what());
  }
  if (t.vocab_.size() < static_cast<std::size_t>(kFirstWord)) throw ValidationError("tokenizer: vocabulary too small");
  for (int i = 0; i < 4; ++i) {
    if (t.vocab_[i] != kSpecials[i]) throw ValidationError("tokenizer: special tokens out of order");
  }
  t.index();
  if (t.ids_.size() != t.vocab_.size()) throw ValidationError("tokenizer: duplicate vocabulary entries");
  return t;
}

int level_bin(double scaled) {
  return static_cast<int>(std::upper_bound(std::begin(kLevelEdges), std::end(kLevelEdges), scaled) -
                          std::begin(kLevelEdges));
}

std::vector<int> context_level_ids(const signal::DaySequence& day, const signal::NormalizationStats& stats,
                                   const Tokenizer& tok) {
  if (day.minutes.size() % kPrefixLen != 0) throw ValidationError("day length is not a multiple of the prefix length");
  const std::size_t patch = day.minutes.size() / kPrefixLen;
  std::vector<int> out;
  out.reserve(kPrefixLen);
  const double range = stats.global_max - stats.global_min;
  for (std::size_t p = 0; p < kPrefixLen; ++p) {
    double sum = 0.0;
    for (std::size_t i = 0; i < patch; ++i) sum += day.minutes[p * patch + i];
    const double mean = sum / static_cast<double>(patch);
    const double scaled = stats.degenerate() ? 0.0 : std::clamp((mean - stats.global_min) / range * 1000.0, 0.0, 1000.0);
    out.push_back(tok.level_token(level_bin(scaled)));
  }
  return out;
}

// ---- Decoder ------------------------------------------------------------------

DecoderConfig DecoderConfig::desk(std::size_t vocab_size) {
  DecoderConfig c;
  c.vocab_size = vocab_size;
  return c;
}

DecoderConfig DecoderConfig::paper(std::size_t vocab_size) {
  DecoderConfig c;
  c.dim = 2048;
  c.n_layers = 18;
  c.n_heads = 8;
  c.mlp_hidden = 16384;
  c.vocab_size = vocab_size;
  return c;
}

void DecoderConfig::validate() const {
  if (dim == 0 || n_layers == 0 || n_heads == 0 || mlp_hidden == 0 || vocab_size == 0) {
    throw ValidationError("decoder config: all sizes must be positive");
  }
  if (dim % n_heads != 0) throw ValidationError("decoder config: dim not divisible by heads");
  if (max_seq_len < kPrefixLen + 3) throw ValidationError("decoder config: max_seq_len must exceed the prefix + 2");
}

nlohmann::json DecoderConfig::to_json() const {
  return {{"dim", dim},        {"n_layers", n_layers},     {"n_heads", n_heads},
          {"mlp_hidden", mlp_hidden}, {"vocab_size", vocab_size}, {"max_seq_len", max_seq_len}};
}

DecoderConfig DecoderConfig::from_json(const nlohmann::json& j) {
  DecoderConfig c;
  try {
    c.dim = j.at("dim").get<std::size_t>();
    c.n_layers = j.at("n_layers").get<std::size_t>();
    c.n_heads = j.at("n_heads").get<std::size_t>();
    c.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.max_seq_len = j.at("max_seq_len").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("decoder config: ") + e.what());
  }
  c.validate();
  return c;
}

Decoder::Decoder(const DecoderConfig& c, std::uint64_t seed) : config_(c) {
  c.validate();
  Rng rng(mix_seed(seed, 0xDEC0));
  tok_emb_ = nn::Parameter("decoder.tok_emb", nn::normal_tensor({c.vocab_size, c.dim}, 0.1, rng));
  pos_emb_ = nn::Parameter("decoder.pos_emb", nn::normal_tensor({c.max_seq_len, c.dim}, 0.1, rng));
  const nn::BlockConfig bc{c.dim, c.n_heads, c.mlp_hidden};
  for (std::size_t l = 0; l < c.n_layers; ++l) {
    blocks_.push_back(std::make_unique<nn::TransformerBlock>("decoder.block" + std::to_string(l), bc, rng));
  }
  ln_g_ = nn::Parameter("decoder.ln_f.gamma", Tensor({c.dim}, 1.0));
  ln_b_ = nn::Parameter("decoder.ln_f.beta", Tensor({c.dim}));
  out_w_ = nn::Parameter("decoder.out.w",
                         nn::normal_tensor({c.dim, c.vocab_size}, 1.0 / std::sqrt(static_cast<double>(c.dim)), rng));
  out_b_ = nn::Parameter("decoder.out.b", Tensor({c.vocab_size}));
}

nn::ParameterList Decoder::parameters() {
  nn::ParameterList out = {&tok_emb_, &pos_emb_};
  for (auto& b : blocks_) {
    for (nn::Parameter* p : b->parameters()) out.push_back(p);
  }
  out.insert(out.end(), {&ln_g_, &ln_b_, &out_w_, &out_b_});
  return out;
}

void Decoder::freeze() {
  nn::set_frozen(parameters(), true);
  frozen_ = true;
}

nn::Var Decoder::embed_tokens(nn::Tape& t, std::span<const int> ids) { return nn::embedding(t.param(tok_emb_), ids); }

namespace {

std::vector<int> position_ids(std::size_t offset, std::size_t n, std::size_t max_len) {
  if (offset + n > max_len) {
    throw ValidationError("sequence of " + std::to_string(offset + n) + " positions exceeds decoder max_seq_len " +
                          std::to_string(max_len));
  }
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), static_cast<int>(offset));
  return ids;
}

}  // namespace

nn::Var Decoder::hidden(nn::Tape& t, nn::Var x, std::size_t offset, const std::vector<bool>* key_valid) {
  nn::require_shape(x.value(), {x.value().rows(), config_.dim}, "decoder input");
  const auto pos = position_ids(offset, x.value().rows(), config_.max_seq_len);
  x = nn::add(x, nn::embedding(t.param(pos_emb_), pos));
  for (auto& b : blocks_) x = b->forward(t, x, /*causal=*/true, key_valid);
  return nn::layer_norm(x, t.param(ln_g_), t.param(ln_b_));
}

nn::Var Decoder::logits(nn::Tape& t, nn::Var h) { return nn::linear(h, t.param(out_w_), t.param(out_b_)); }

Decoder::State Decoder::start(std::size_t offset) const {
  State s;
  s.caches.resize(blocks_.size());
  s.position = offset;
  return s;
}

Tensor Decoder::token_rows(std::span<const int> ids) const {
  Tensor out({ids.size(), config_.dim});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= config_.vocab_size) {
      throw ValidationError("token id " + std::to_string(ids[i]) + " outside decoder vocabulary");
    }
    const auto src = tok_emb_.value.row(static_cast<std::size_t>(ids[i]));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Tensor Decoder::step(const Tensor& x, State& state) const {
  nn::require_shape(x, {x.rows(), config_.dim}, "decoder step input");
  position_ids(state.position, x.rows(), config_.max_seq_len);
  Tensor h = x;
  for (std::size_t r = 0; r < h.rows(); ++r) {
    const auto pe = pos_emb_.value.row(state.position + r);
    auto row = h.row(r);
    for (std::size_t c = 0; c < config_.dim; ++c) row[c] += pe[c];
  }
  for (std::size_t l = 0; l < blocks_.size(); ++l) h = blocks_[l]->infer(h, state.caches[l], /*causal=*/true);
  state.position += x.rows();
  return nn::layer_norm_eval(h, ln_g_.value, ln_b_.value);
}

Tensor Decoder::logits_eval(const Tensor& h) const { return nn::linear_eval(h, out_w_.value, out_b_.value); }

nn::Archive Decoder::to_archive() const {
  auto* self = const_cast<Decoder*>(this);
  return nn::make_archive(self->parameters(),
                          {{"kind", "decoder-lm"}, {"config", config_.to_json()}, {"frozen", frozen_}});
}

std::unique_ptr<Decoder> Decoder::from_archive(const nn::Archive& a) {
  if (a.header.value("kind", "") != "decoder-lm") throw ValidationError("archive is not a decoder-lm checkpoint");
  auto d = std::make_unique<Decoder>(DecoderConfig::from_json(a.header.at("config")), 0);
  nn::restore_parameters(a, d->parameters());
  d->frozen_ = a.header.value("frozen", false);
  return d;
}

// ---- Projection ---------------------------------------------------------------

nlohmann::json ProjectionConfig::to_json() const {
  return {{"encoder_dim", encoder_dim},
          {"decoder_dim", decoder_dim},
          {"kind", kind == ProjectionKind::kLinear ? "linear" : "mlp"}};
}

ProjectionConfig ProjectionConfig::from_json(const nlohmann::json& j) {
  ProjectionConfig c;
  try {
    c.encoder_dim = j.at("encoder_dim").get<std::size_t>();
    c.decoder_dim = j.at("decoder_dim").get<std::size_t>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "linear") {
      c.kind = ProjectionKind::kLinear;
    } else if (kind == "mlp") {
      c.kind = ProjectionKind::kMlp;
    } else {
      throw ValidationError("projection kind must be linear or mlp, got '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("projection config: ") + e.what());
  }
  return c;
}

Projection::Projection(const ProjectionConfig& c, std::uint64_t seed) : config_(c) {
  if (c.encoder_dim == 0 || c.decoder_dim == 0) throw ValidationError("projection dims must be positive");
  Rng rng(mix_seed(seed, 0x9801));
  w1_ = nn::Parameter("projection.w",
                      nn::normal_tensor({c.encoder_dim, c.decoder_dim}, 1.0 / std::sqrt(double(c.encoder_dim)), rng));
  b1_ = nn::Parameter("projection.b", Tensor({c.decoder_dim}));
  if (c.kind == ProjectionKind::kMlp) {
    w2_ = nn::Parameter("projection.w2",
                        nn::normal_tensor({c.decoder_dim, c.decoder_dim}, 1.0 / std::sqrt(double(c.decoder_dim)), rng));
    b2_ = nn::Parameter("projection.b2", Tensor({c.decoder_dim}));
  }
}

void Projection::check(const Tensor& enc) const {
  if (enc.rank() != 2 || enc.cols() != config_.encoder_dim) {
    throw ShapeError("projection expects [T, " + std::to_string(config_.encoder_dim) + "], got " +
                     nn::shape_str(enc.shape()));
  }
}

nn::Var Projection::forward(nn::Tape& t, const Tensor& enc) {
  check(enc);
  nn::Var y = nn::linear(t.constant(enc), t.param(w1_), t.param(b1_));
  if (config_.kind == ProjectionKind::kMlp) y = nn::linear(nn::gelu(y), t.param(w2_), t.param(b2_));
  return y;
}

Tensor Projection::apply(const Tensor& enc) const {
  check(enc);
  Tensor y = nn::linear_eval(enc, w1_.value, b1_.value);
  if (config_.kind == ProjectionKind::kMlp) {
    nn::gelu_inplace(y);
    y = nn::linear_eval(y, w2_.value, b2_.value);
  }
  return y;
}

nn::ParameterList Projection::parameters() {
  if (config_.kind == ProjectionKind::kMlp) return {&w1_, &b1_, &w2_, &b2_};
  return {&w1_, &b1_};
}

nn::Archive Projection::to_archive() const {
  auto* self = const_cast<Projection*>(this);
  return nn::make_archive(self->parameters(), {{"kind", "projection"}, {"config", config_.to_json()}});
}

std::unique_ptr<Projection> Projection::from_archive(const nn::Archive& a) {
  if (a.header.value("kind", "") != "projection") throw ValidationError("archive is not a projection checkpoint");
  auto p = std::make_unique<Projection>(ProjectionConfig::from_json(a.header.at("config")), 0);
  nn::restore_parameters(a, p->parameters());
  return p;
}

// ---- Prefix batches -----------------------------------------------------------

std::vector<int> PrefixBatch::effective_targets(std::size_t b) const {
  std::vector<int> out = targets.at(b);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i < kPrefixLen || i >= lengths[b]) out[i] = nn::kIgnoreIndex;
  }
  return out;
}

std::size_t PrefixBatch::supervised() const {
  std::size_t n = 0;
  for (std::size_t b = 0; b < size(); ++b) {
    const auto t = effective_targets(b);
    n += static_cast<std::size_t>(std::count_if(t.begin(), t.end(), [](int v) { return v != nn::kIgnoreIndex; }));
  }
  return n;
}

namespace {

std::vector<int> label_ids(const Tokenizer& tok, const std::string& label, const std::string& who) {
  const auto ids = tok.encode(label);
  if (ids.empty()) throw ValidationError("participant '" + who + "': no supervised tokens");
  const auto unk = std::find(ids.begin(), ids.end(), Tokenizer::kUnk);
  if (unk != ids.end()) {
    const auto words = Tokenizer::split(label);
    throw ValidationError("participant '" + who + "': word '" + words[static_cast<std::size_t>(unk - ids.begin())] +
                          "' is not in the vocabulary");
  }
  return ids;
}

}  // namespace

PrefixBatch assemble_prefix_batch(const std::vector<PrefixExample>& examples, const Tokenizer& tok,
                                  std::size_t max_seq_len) {
  if (examples.empty()) throw ValidationError("empty batch");
  PrefixBatch batch;
  std::vector<std::vector<int>> labels;
  for (const auto& ex : examples) {
    if (ex.prefix.rank() != 2 || ex.prefix.rows() != kPrefixLen) {
      throw ShapeError("participant '" + ex.participant_id + "': prefix must have " + std::to_string(kPrefixLen) +
                       " rows, got " + nn::shape_str(ex.prefix.shape()));
    }
    auto ids = label_ids(tok, ex.label, ex.participant_id);
    const std::size_t len = kPrefixLen + 1 + ids.size() + 1;
    if (len > max_seq_len) {
      throw ValidationError("participant '" + ex.participant_id + "': label needs " + std::to_string(len) +
                            " positions, budget is " + std::to_string(max_seq_len));
    }
    batch.lengths.push_back(len);
    batch.seq_len = std::max(batch.seq_len, len);
    labels.push_back(std::move(ids));
  }
  for (std::size_t b = 0; b < examples.size(); ++b) {
    const auto& ids = labels[b];
    std::vector<int> input(batch.seq_len - kPrefixLen, Tokenizer::kPad);
    input[0] = Tokenizer::kBos;
    std::copy(ids.begin(), ids.end(), input.begin() + 1);
    input[1 + ids.size()] = Tokenizer::kEos;
    std::vector<int> target(batch.seq_len, nn::kIgnoreIndex);
    // Position 80 + j predicts input j + 1, for BOS and every label token.
    for (std::size_t j = 0; j <= ids.size(); ++j) target[kPrefixLen + j] = input[j + 1];
    std::vector<bool> valid(batch.seq_len, false);
    std::fill_n(valid.begin(), batch.lengths[b], true);
    batch.participant_ids.push_back(examples[b].participant_id);
    batch.prefixes.push_back(examples[b].prefix);
    batch.input_ids.push_back(std::move(input));
    batch.targets.push_back(std::move(target));
    batch.key_valid.push_back(std::move(valid));
  }
  return batch;
}

namespace {

std::size_t count_supervised(std::span<const int> targets) {
  return static_cast<std::size_t>(
      std::count_if(targets.begin(), targets.end(), [](int v) { return v != nn::kIgnoreIndex; }));
}

nn::Var weighted_sum(nn::Var acc, nn::Var term, double w) {
  term = nn::scale(term, w);
  return acc.valid() ? nn::add(acc, term) : term;
}

}  // namespace

nn::Var forward_loss(nn::Tape& t, const PrefixBatch& batch, Decoder& decoder, Projection& projection) {
  const double total = static_cast<double>(batch.supervised());
  if (total == 0) throw ValidationError("no supervised tokens");
  nn::Var loss;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const std::size_t len = batch.lengths[b];
    const auto targets = batch.effective_targets(b);
    const std::span<const int> tail(targets.data() + kPrefixLen, len - kPrefixLen);
    const std::size_t n = count_supervised(tail);
    const std::span<const int> inputs(batch.input_ids[b].data(), len - kPrefixLen);
    nn::Var x = nn::concat_rows(projection.forward(t, batch.prefixes[b]), decoder.embed_tokens(t, inputs));
    nn::Var h = nn::slice_rows(decoder.hidden(t, x), kPrefixLen, len);
    loss = weighted_sum(loss, nn::masked_cross_entropy(decoder.logits(t, h), tail), static_cast<double>(n) / total);
  }
  return loss;
}

nn::Var forward_loss_padded(nn::Tape& t, const PrefixBatch& batch, Decoder& decoder, Projection& projection) {
  const double total = static_cast<double>(batch.supervised());
  if (total == 0) throw ValidationError("no supervised tokens");
  nn::Var loss;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto targets = batch.effective_targets(b);
    nn::Var x = nn::concat_rows(projection.forward(t, batch.prefixes[b]), decoder.embed_tokens(t, batch.input_ids[b]));
    nn::Var logits = decoder.logits(t, decoder.hidden(t, x, 0, &batch.key_valid[b]));
    const double w = static_cast<double>(count_supervised(targets)) / total;
    loss = weighted_sum(loss, nn::masked_cross_entropy(logits, targets), w);
  }
  return loss;
}

// ---- Generation ---------------------------------------------------------------

namespace {

// Only words and EOS may be emitted.
int pick_token(std::span<const double> logits, const GenerateOptions& opt, Rng& rng) {
  std::vector<int> allowed;
  for (int id = kFirstWord; id < static_cast<int>(logits.size()); ++id) allowed.push_back(id);
  allowed.push_back(Tokenizer::kEos);
  auto better = [&](int a, int b) { return logits[a] > logits[b] || (logits[a] == logits[b] && a < b); };
  if (opt.mode == DecodeMode::kGreedy || opt.top_k <= 1) return *std::min_element(allowed.begin(), allowed.end(), better);
  const std::size_t k = std::min(opt.top_k, allowed.size());
  std::partial_sort(allowed.begin(), allowed.begin() + static_cast<std::ptrdiff_t>(k), allowed.end(), better);
  std::vector<double> p(k);
  for (std::size_t i = 0; i < k; ++i) p[i] = logits[allowed[i]];
  nn::softmax_inplace(p);
  double u = rng.uniform(), acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    acc += p[i];
    if (u < acc) return allowed[i];
  }
  return allowed[k - 1];
}

Generation continue_generation(Decoder::State& state, const Decoder& decoder, const Tokenizer& tok,
                               const GenerateOptions& opt) {
  Generation g;
  Rng rng(mix_seed(opt.seed, 0x6E4));
  int cur = Tokenizer::kBos;
  while (true) {
    if (g.ids.size() >= opt.max_tokens || state.position >= decoder.config().max_seq_len) {
      g.truncated = true;
      break;
    }
    const Tensor h = decoder.step(decoder.token_rows(std::span<const int>(&cur, 1)), state);
    const Tensor logits = decoder.logits_eval(h);
    cur = pick_token(logits.row(0), opt, rng);
    if (cur == Tokenizer::kEos) break;
    g.ids.push_back(cur);
  }
  g.text = tok.decode(g.ids);
  return g;
}

}  // namespace

Generation generate(const Tensor& prefix, const Decoder& decoder, const Projection& projection, const Tokenizer& tok,
                    const GenerateOptions& opt) {
  if (prefix.rank() != 2 || prefix.rows() != kPrefixLen) {
    throw ShapeError("generate: prefix must have " + std::to_string(kPrefixLen) + " rows");
  }
  auto state = decoder.start(0);
  decoder.step(projection.apply(prefix), state);
  return continue_generation(state, decoder, tok, opt);
}

Generation generate_from_context(const std::vector<int>& context, const Decoder& decoder, const Tokenizer& tok,
                                 std::size_t max_tokens) {
  auto state = decoder.start(context.empty() ? kPrefixLen : 0);
  if (!context.empty()) decoder.step(decoder.token_rows(context), state);
  GenerateOptions opt;
  opt.max_tokens = max_tokens;
  return continue_generation(state, decoder, tok, opt);
}

// ---- LM pretraining -------------------------------------------------------------

namespace {

struct LmSequence {
  std::vector<int> context;
  std::vector<int> inputs;   // BOS, label, EOS
  std::vector<int> targets;  // next token per input row, -100 on EOS
};

LmSequence lm_sequence(const Tokenizer& tok, const LmExample& ex) {
  if (!ex.context.empty() && ex.context.size() != kPrefixLen) {
    throw ValidationError("LM context must have " + std::to_string(kPrefixLen) + " tokens");
  }
  LmSequence s;
  s.context = ex.context;
  const auto ids = label_ids(tok, ex.label, "lm-corpus");
  s.inputs.push_back(Tokenizer::kBos);
  s.inputs.insert(s.inputs.end(), ids.begin(), ids.end());
  s.inputs.push_back(Tokenizer::kEos);
  s.targets.assign(s.inputs.begin() + 1, s.inputs.end());
  s.targets.push_back(nn::kIgnoreIndex);
  return s;
}

nn::Var lm_forward(nn::Tape& t, Decoder& decoder, const LmSequence& s) {
  nn::Var x = decoder.embed_tokens(t, s.inputs);
  std::size_t offset = kPrefixLen;
  if (!s.context.empty()) {
    x = nn::concat_rows(decoder.embed_tokens(t, s.context), x);
    offset = 0;
  }
  nn::Var h = decoder.hidden(t, x, offset);
  if (!s.context.empty()) h = nn::slice_rows(h, kPrefixLen, kPrefixLen + s.inputs.size());
  return nn::masked_cross_entropy(decoder.logits(t, h), s.targets);
}

}  // namespace

double lm_loss(Decoder& decoder, const Tokenizer& tok, const LmExample& ex) {
  nn::Tape t;
  return lm_forward(t, decoder, lm_sequence(tok, ex)).value()[0];
}

LmReport pretrain_decoder_lm(Decoder& decoder, const Tokenizer& tok, const std::vector<LmExample>& corpus,
                             const LmOptions& opt) {
  if (corpus.empty()) throw ValidationError("LM corpus is empty");
  if (opt.epochs < 1 || opt.batch_size < 1) throw ValidationError("LM pretraining needs positive epochs and batch size");
  if (decoder.frozen()) throw ValidationError("decoder is already frozen");
  if (decoder.config().vocab_size != tok.size()) throw ValidationError("decoder vocabulary does not match tokenizer");
  std::vector<LmSequence> seqs;
  seqs.reserve(corpus.size());
  for (const auto& ex : corpus) {
    LmExample e = ex;
    if (opt.context == LmContext::kNone) e.context.clear();
    seqs.push_back(lm_sequence(tok, e));
  }

  nn::Adam adam(decoder.parameters(), opt.adam);
  const nn::WarmupSchedule sched{opt.adam.lr, opt.warmup_steps, 0.1};
  LmReport report;
  std::int64_t step = 0;
  std::vector<std::size_t> order(seqs.size());
  const int lo = tok.level_token(0), hi = tok.level_token(static_cast<int>(kLevelBins) - 1);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    Rng rng(mix_seed(opt.seed, 0x1A0000 + static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    double loss_sum = 0.0, token_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t end = std::min(order.size(), start + opt.batch_size);
      double tokens = 0.0;
      for (std::size_t i = start; i < end; ++i) tokens += static_cast<double>(seqs[order[i]].inputs.size() - 1);
      for (std::size_t i = start; i < end; ++i) {
        LmSequence s = seqs[order[i]];
        for (int& c : s.context) {
          if (rng.uniform() < opt.jitter) c = std::clamp(c + (rng.below(2) == 0 ? -1 : 1), lo, hi);
        }
        nn::Tape t;
        nn::Var loss = lm_forward(t, decoder, s);
        const double n = static_cast<double>(s.inputs.size() - 1);
        loss_sum += loss.value()[0] * n;
        token_sum += n;
        t.backward(nn::scale(loss, n / tokens));
      }
      adam.step(nn::lr_at(sched, step++));
    }
    report.epoch_loss.push_back(loss_sum / token_sum);
  }
  decoder.freeze();
  return report;
}

// ---- Embedding provider ---------------------------------------------------------

std::vector<std::vector<double>> DecoderEmbeddingProvider::embed(const metrics::Tokens& tokens) const {
  if (tokens.empty()) return {};
  std::vector<int> ids{Tokenizer::kBos};
  for (const auto& w : tokens) {
    int id = tok_.id_of(w);
    if (id < kFirstWord && !w.empty()) {
      std::string cap = w;
      cap[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(cap[0])));
      id = tok_.id_of(cap);
    }
    ids.push_back(id < kFirstWord ? Tokenizer::kUnk : id);
  }
  // Long inputs are embedded in windows that fit the position table.
  const std::size_t window = decoder_.config().max_seq_len - kPrefixLen - 1;
  std::vector<std::vector<double>> out;
  out.reserve(tokens.size());
  for (std::size_t start = 1; start < ids.size(); start += window) {
    const std::size_t end = std::min(ids.size(), start + window);
    std::vector<int> chunk{Tokenizer::kBos};
    chunk.insert(chunk.end(), ids.begin() + static_cast<std::ptrdiff_t>(start),
                 ids.begin() + static_cast<std::ptrdiff_t>(end));
    auto state = decoder_.start(kPrefixLen);
    const Tensor h = decoder_.step(decoder_.token_rows(chunk), state);
    for (std::size_t r = 1; r < h.rows(); ++r) {
      const auto row = h.row(r);
      std::vector<double> v(row.begin(), row.end());
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (!(norm > 0.0)) throw NumericError("decoder embedding has zero norm");
      for (double& x : v) x /= norm;
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace actilang::aligner
