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

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "actilang/nn/archive.hpp"
#include "actilang/nn/optim.hpp"
#include "actilang/nn/tape.hpp"
#include "actilang/nn/transformer.hpp"

namespace actilang::encoder {

struct PatchConfig {
  std::size_t sequence_len = 1440;
  std::size_t patch_len = 18;
  std::size_t n_patches = 80;
  std::size_t embed_dim = 32;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t mlp_hidden = 128;
  bool final_layer_norm = true;

  static PatchConfig desk();   // 32 wide, 2 layers, 4 heads
  static PatchConfig paper();  // 96 wide, 4 layers, 12 heads

  // Throws ValidationError on inconsistent sizes.
  void validate() const;
  nlohmann::json to_json() const;
  static PatchConfig from_json(const nlohmann::json& j);
};

// Non-overlapping windows: [len / patch_len, patch_len].
nn::Tensor patchify(std::span<const double> x, std::size_t patch_len);
std::vector<double> unpatchify(const nn::Tensor& patches);

// pe[p, 2i] = sin(p / 10000^(2i/dim)), pe[p, 2i+1] = cos(same angle).
nn::Tensor sinusoidal_pe(std::size_t n_positions, std::size_t dim);

// Exactly max(1, min(n-1, round(ratio * n))) positions set, chosen uniformly.
std::vector<bool> sample_patch_mask(std::size_t n_patches, double mask_ratio, Rng& rng);

class PatchEncoder {
 public:
  PatchEncoder(const PatchConfig& config, std::uint64_t seed);
  PatchEncoder(const PatchEncoder&) = delete;
  PatchEncoder& operator=(const PatchEncoder&) = delete;

  const PatchConfig& config() const { return config_; }

  // Patch projection alone, before positions are added.
  nn::Tensor embed_patches(const nn::Tensor& patches) const;

  // Frozen inference on standardised minutes. Output [n_patches, embed_dim].
  // Throws ValidationError unless the encoder has been frozen.
  nn::Tensor encode(std::span<const double> standardized_minutes) const;

  // Differentiable path. Rows set in mask are replaced by the mask token
  // before positions are added.
  nn::Var forward(nn::Tape& tape, const nn::Tensor& patches, const std::vector<bool>* mask);
  // Linear reconstruction head, [n, embed_dim] -> [n, patch_len].
  nn::Var reconstruct(nn::Tape& tape, nn::Var hidden);

  nn::ParameterList parameters();
  void freeze();
  bool frozen() const { return frozen_; }

  nn::Archive to_archive() const;
  static std::unique_ptr<PatchEncoder> from_archive(const nn::Archive& archive);

 private:
  PatchConfig config_;
  nn::Tensor pe_;
  nn::Parameter patch_w_, patch_b_, mask_token_, ln_g_, ln_b_, head_w_, head_b_;
  std::vector<std::unique_ptr<nn::TransformerBlock>> blocks_;
  bool frozen_ = false;
};

struct MaeOptions {
  double mask_ratio = 0.5;
  int epochs = 30;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  nn::AdamConfig adam;
  std::int64_t warmup_steps = 100;
};

struct MaeReport {
  std::vector<double> epoch_loss;
};

// Masked-patch reconstruction loss on one sequence (no update).
double mae_loss(PatchEncoder& encoder, std::span<const double> standardized_minutes, const std::vector<bool>& mask);

// Trains every encoder parameter, then freezes them. Needs at least 32
// sequences and 0 < mask_ratio < 1.
MaeReport pretrain_mae(PatchEncoder& encoder, std::span<const std::vector<double>> cohort, const MaeOptions& options);

}  // namespace actilang::encoder
