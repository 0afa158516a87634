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

#include "actilang/encoder/pat_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "actilang/errors.hpp"
#include "actilang/nn/ops.hpp"

namespace actilang::encoder {

using nn::Tensor;
using nn::Var;

PatchConfig PatchConfig::desk() { return PatchConfig{}; }

PatchConfig PatchConfig::paper() {
  PatchConfig c;
  c.embed_dim = 96;
  c.n_layers = 4;
  c.n_heads = 12;
  c.mlp_hidden = 384;
  return c;
}

void PatchConfig::validate() const {
  if (patch_len == 0 || n_patches == 0 || embed_dim == 0 || n_layers == 0 || n_heads == 0 || mlp_hidden == 0) {
    throw ValidationError("encoder config: all sizes must be positive");
  }
  if (sequence_len != patch_len * n_patches) {
    throw ValidationError("encoder config: sequence_len " + std::to_string(sequence_len) + " != patch_len " +
                          std::to_string(patch_len) + " x n_patches " + std::to_string(n_patches));
  }
  if (embed_dim % n_heads != 0) {
    throw ValidationError("encoder config: embed_dim " + std::to_string(embed_dim) + " not divisible by " +
                          std::to_string(n_heads) + " heads");
  }
  if (embed_dim % 2 != 0) throw ValidationError("encoder config: embed_dim must be even for sinusoidal positions");
}

nlohmann::json PatchConfig::to_json() const {
  return {{"sequence_len", sequence_len}, {"patch_len", patch_len},   {"n_patches", n_patches},
          {"embed_dim", embed_dim},       {"n_layers", n_layers},     {"n_heads", n_heads},
          {"mlp_hidden", mlp_hidden},     {"final_layer_norm", final_layer_norm}};
}

PatchConfig PatchConfig::from_json(const nlohmann::json& j) {
  PatchConfig c;
  try {
    c.sequence_len = j.at("sequence_len").get<std::size_t>();
    c.patch_len = j.at("patch_len").get<std::size_t>();
    c.n_patches = j.at("n_patches").get<std::size_t>();
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.n_layers = j.at("n_layers").get<std::size_t>();
    c.n_heads = j.at("n_heads").get<std::size_t>();
    c.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
    c.final_layer_norm = j.at("final_layer_norm").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("encoder config: ") + e.what());
  }
  c.validate();
  return c;
}

Tensor patchify(std::span<const double> x, std::size_t patch_len) {
  if (patch_len == 0 || x.empty() || x.size() % patch_len != 0) {
    throw ValidationError("patchify: length " + std::to_string(x.size()) + " is not a positive multiple of " +
                          std::to_string(patch_len));
  }
  return Tensor({x.size() / patch_len, patch_len}, std::vector<double>(x.begin(), x.end()));
}

std::vector<double> unpatchify(const Tensor& patches) {
  if (patches.rank() != 2) throw ShapeError("unpatchify: expected rank 2, got " + nn::shape_str(patches.shape()));
  return patches.vec();
}

Tensor sinusoidal_pe(std::size_t n_positions, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) throw ValidationError("sinusoidal_pe: dim must be even, got " + std::to_string(dim));
  Tensor pe({n_positions, dim});
  for (std::size_t p = 0; p < n_positions; ++p) {
    for (std::size_t i = 0; i < dim / 2; ++i) {
      const double angle = static_cast<double>(p) / std::pow(10000.0, 2.0 * i / static_cast<double>(dim));
      pe.at(p, 2 * i) = std::sin(angle);
      pe.at(p, 2 * i + 1) = std::cos(angle);
    }
  }
  return pe;
}

std::vector<bool> sample_patch_mask(std::size_t n, double ratio, Rng& rng) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("mask_ratio must lie strictly between 0 and 1");
  if (n < 2) throw ValidationError("need at least two patches to mask");
  const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(ratio * n + 0.5)), 1, n - 1);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<bool> mask(n, false);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(order[i], order[i + rng.below(n - i)]);
    mask[order[i]] = true;
  }
  return mask;
}

// ---- PatchEncoder -------------------------------------------------------------

PatchEncoder::PatchEncoder(const PatchConfig& c, std::uint64_t seed) : config_(c) {
  c.validate();
  Rng rng(mix_seed(seed, 0xE1C0));
  const double s_patch = 1.0 / std::sqrt(static_cast<double>(c.patch_len));
  const double s_embed = 1.0 / std::sqrt(static_cast<double>(c.embed_dim));
  pe_ = sinusoidal_pe(c.n_patches, c.embed_dim);
  patch_w_ = nn::Parameter("encoder.patch.w", nn::normal_tensor({c.patch_len, c.embed_dim}, s_patch, rng));
  patch_b_ = nn::Parameter("encoder.patch.b", Tensor({c.embed_dim}));
  mask_token_ = nn::Parameter("encoder.mask_token", nn::normal_tensor({c.embed_dim}, 0.02, rng));
  const nn::BlockConfig bc{c.embed_dim, c.n_heads, c.mlp_hidden};
  for (std::size_t l = 0; l < c.n_layers; ++l) {
    blocks_.push_back(std::make_unique<nn::TransformerBlock>("encoder.block" + std::to_string(l), bc, rng));
  }
  ln_g_ = nn::Parameter("encoder.ln_f.gamma", Tensor({c.embed_dim}, 1.0));
  ln_b_ = nn::Parameter("encoder.ln_f.beta", Tensor({c.embed_dim}));
  head_w_ = nn::Parameter("encoder.head.w", nn::normal_tensor({c.embed_dim, c.patch_len}, s_embed, rng));
  head_b_ = nn::Parameter("encoder.head.b", Tensor({c.patch_len}));
}

nn::ParameterList PatchEncoder::parameters() {
  nn::ParameterList out = {&patch_w_, &patch_b_, &mask_token_};
  for (auto& b : blocks_) {
    for (nn::Parameter* p : b->parameters()) out.push_back(p);
  }
  if (config_.final_layer_norm) {
    out.push_back(&ln_g_);
    out.push_back(&ln_b_);
  }
  out.push_back(&head_w_);
  out.push_back(&head_b_);
  return out;
}

void PatchEncoder::freeze() {
  nn::set_frozen(parameters(), true);
  frozen_ = true;
}

Tensor PatchEncoder::embed_patches(const Tensor& patches) const {
  nn::require_shape(patches, {patches.rows(), config_.patch_len}, "encoder patches");
  return nn::linear_eval(patches, patch_w_.value, patch_b_.value);
}

Tensor PatchEncoder::encode(std::span<const double> minutes) const {
  if (!frozen_) throw ValidationError("encoder weights are not loaded and frozen; run pretrain-encoder first");
  if (minutes.size() != config_.sequence_len) {
    throw ValidationError("encode: expected " + std::to_string(config_.sequence_len) + " minutes, got " +
                          std::to_string(minutes.size()));
  }
  Tensor x = embed_patches(patchify(minutes, config_.patch_len));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += pe_[i];
  for (const auto& b : blocks_) {
    nn::KvCache cache;
    x = b->infer(x, cache, /*causal=*/false);
  }
  if (config_.final_layer_norm) x = nn::layer_norm_eval(x, ln_g_.value, ln_b_.value);
  if (!x.all_finite()) throw NumericError("encoder produced non-finite output");
  return x;
}

Var PatchEncoder::forward(nn::Tape& t, const Tensor& patches, const std::vector<bool>* mask) {
  nn::require_shape(patches, {config_.n_patches, config_.patch_len}, "encoder patches");
  Var x = nn::linear(t.constant(patches), t.param(patch_w_), t.param(patch_b_));
  if (mask != nullptr) x = nn::replace_rows(x, t.param(mask_token_), *mask);
  x = nn::add(x, t.constant(pe_));
  for (auto& b : blocks_) x = b->forward(t, x, /*causal=*/false);
  if (config_.final_layer_norm) x = nn::layer_norm(x, t.param(ln_g_), t.param(ln_b_));
  return x;
}

Var PatchEncoder::reconstruct(nn::Tape& t, Var hidden) { return nn::linear(hidden, t.param(head_w_), t.param(head_b_)); }

nn::Archive PatchEncoder::to_archive() const {
  auto* self = const_cast<PatchEncoder*>(this);
  return nn::make_archive(self->parameters(), {{"kind", "pat-encoder"}, {"config", config_.to_json()}, {"frozen", frozen_}});
}

std::unique_ptr<PatchEncoder> PatchEncoder::from_archive(const nn::Archive& a) {
  if (a.header.value("kind", "") != "pat-encoder") throw ValidationError("archive is not a pat-encoder checkpoint");
  auto enc = std::make_unique<PatchEncoder>(PatchConfig::from_json(a.header.at("config")), 0);
  nn::restore_parameters(a, enc->parameters());
  enc->frozen_ = a.header.value("frozen", false);
  return enc;
}

// ---- MAE ----------------------------------------------------------------------

double mae_loss(PatchEncoder& enc, std::span<const double> minutes, const std::vector<bool>& mask) {
  nn::Tape t;
  const Tensor patches = patchify(minutes, enc.config().patch_len);
  Var loss = nn::masked_mse(enc.reconstruct(t, enc.forward(t, patches, &mask)), patches, mask);
  return loss.value()[0];
}

MaeReport pretrain_mae(PatchEncoder& enc, std::span<const std::vector<double>> cohort, const MaeOptions& opt) {
  if (!(opt.mask_ratio > 0.0 && opt.mask_ratio < 1.0)) {
    throw ValidationError("mask_ratio must lie strictly between 0 and 1, got " + std::to_string(opt.mask_ratio));
  }
  if (cohort.size() < 32) throw ValidationError("MAE pretraining needs at least 32 sequences");
  if (opt.epochs < 1 || opt.batch_size < 1) throw ValidationError("MAE pretraining needs positive epochs and batch size");
  if (enc.frozen()) throw ValidationError("encoder is already frozen");

  const nn::ParameterList params = enc.parameters();
  nn::Adam adam(params, opt.adam);
  const nn::WarmupSchedule sched{opt.adam.lr, opt.warmup_steps, 0.1};
  std::vector<Tensor> patches;
  patches.reserve(cohort.size());
  for (const auto& seq : cohort) patches.push_back(patchify(seq, enc.config().patch_len));

  MaeReport report;
  std::int64_t step = 0;
  std::vector<std::size_t> order(cohort.size());
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    Rng rng(mix_seed(opt.seed, static_cast<std::uint64_t>(epoch) + 1));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t end = std::min(order.size(), start + opt.batch_size);
      for (std::size_t i = start; i < end; ++i) {
        const auto mask = sample_patch_mask(enc.config().n_patches, opt.mask_ratio, rng);
        nn::Tape t;
        Var loss = nn::masked_mse(enc.reconstruct(t, enc.forward(t, patches[order[i]], &mask)), patches[order[i]], mask);
        total += loss.value()[0];
        t.backward(nn::scale(loss, 1.0 / static_cast<double>(end - start)));
      }
      adam.step(nn::lr_at(sched, step++));
    }
    report.epoch_loss.push_back(total / static_cast<double>(order.size()));
  }
  enc.freeze();
  return report;
}

}  // namespace actilang::encoder
