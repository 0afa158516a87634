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

// Shared plumbing for the subcommands: workspace layout, stage manifests and
// loaders for upstream artifacts.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "actilang/aligner/aligner.hpp"
#include "actilang/cli/config.hpp"
#include "actilang/cli/manifest.hpp"
#include "actilang/encoder/pat_encoder.hpp"
#include "actilang/signal/dataset.hpp"

namespace actilang::cli {

namespace fs = std::filesystem;

struct Options {
  std::optional<fs::path> input;
  std::optional<fs::path> resume;
  bool references_only = false;
};

class Context {
 public:
  Context(fs::path workspace, Config config, Options options, std::ostream& out)
      : workspace_(std::move(workspace)), config_(std::move(config)), options_(std::move(options)), out_(out) {}

  const Config& config() const { return config_; }
  const Options& options() const { return options_; }
  std::ostream& out() { return out_; }
  fs::path stage_dir(const std::string& stage) const { return workspace_ / stage; }
  bool has_stage(const std::string& stage) const;

  // Loads and verifies a predecessor's manifest. Throws StageOrderError naming
  // the missing stage, or ValidationError if it was built from a different
  // upstream run than another loaded stage.
  fs::path require(const std::string& stage, const std::string& needed_by);
  const std::map<std::string, std::string>& inputs() const { return inputs_; }

  // Seed for one purpose, derived from the master seed.
  std::uint64_t seed(std::uint64_t stream) const;

 private:
  fs::path workspace_;
  Config config_;
  Options options_;
  std::ostream& out_;
  std::map<std::string, RunManifest> loaded_;
  std::map<std::string, std::string> inputs_;
};

// Output directory of one stage. Files go to a scratch directory that replaces
// the stage directory only after commit(); a failed run is left in
// <stage>.failed for inspection.
class StageRun {
 public:
  StageRun(Context& ctx, std::string stage);
  ~StageRun();
  StageRun(const StageRun&) = delete;
  StageRun& operator=(const StageRun&) = delete;

  const fs::path& dir() const { return tmp_; }
  void seed(const std::string& name, std::uint64_t value) { manifest_.seeds[name] = value; }
  void input(const std::string& name, const std::string& hash) { extra_inputs_[name] = hash; }
  nlohmann::json& provenance() { return manifest_.provenance; }
  RunManifest commit();

 private:
  Context& ctx_;
  std::string stage_;
  fs::path tmp_;
  RunManifest manifest_;
  std::map<std::string, std::string> extra_inputs_;
  bool committed_ = false;
};

// ---- Loaders --------------------------------------------------------------------

struct DatasetArtifacts {
  std::vector<dataset::PairRecord> pairs;
  signal::NormalizationStats stats;
  std::vector<dataset::PairRecord> split(signal::Split s) const { return dataset::select_split(pairs, s); }
};

struct DecoderArtifacts {
  std::unique_ptr<aligner::Decoder> decoder;
  std::unique_ptr<aligner::Tokenizer> tok;
};

DatasetArtifacts load_dataset(Context& ctx, const std::string& by);
std::unique_ptr<encoder::PatchEncoder> load_encoder(Context& ctx, const std::string& by);
DecoderArtifacts load_decoder(Context& ctx, const std::string& by);
// `checkpoint` selects last.ckpt or best.ckpt; epoch > 0 selects epoch_NNN.ckpt.
std::unique_ptr<aligner::Projection> load_trained_projection(Context& ctx, const std::string& by, int epoch = 0);

struct SubsetEntry {
  std::string participant_id;
  int day_index = 0;
  int cluster = 0;
};
std::vector<SubsetEntry> load_subset(Context& ctx, const std::string& by);
std::vector<dataset::PairRecord> subset_pairs(const DatasetArtifacts& ds, const std::vector<SubsetEntry>& subset);

// ---- Small file helpers ------------------------------------------------------------

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
nlohmann::json read_json(const fs::path& path);
void write_json(const fs::path& path, const nlohmann::json& j);
std::vector<nlohmann::json> read_jsonl(const fs::path& path);

// Shortest round-trip decimal.
std::string num(double v);
std::string epoch_file(int epoch);

// ---- Stages ----------------------------------------------------------------------

void cmd_synth(Context& ctx);
void cmd_ingest(Context& ctx);
void cmd_build_dataset(Context& ctx);
void cmd_pretrain_encoder(Context& ctx);
void cmd_pretrain_decoder(Context& ctx);
void cmd_train(Context& ctx);
void cmd_generate(Context& ctx);
void cmd_eval(Context& ctx);
void cmd_baseline(Context& ctx);
void cmd_cluster(Context& ctx);
void cmd_pca(Context& ctx);
void cmd_report(Context& ctx);

// Seed streams.
namespace streams {
inline constexpr std::uint64_t kLabel = 0x1A, kSplit = 0x5B, kExemplar = 0xC1, kEncoderInit = 0xE1, kMae = 0xE2,
                               kDecoderInit = 0xD1, kLm = 0xD2, kLmAux = 0xD3, kLmLabel = 0xD4, kTrain = 0x7A,
                               kGenerate = 0x6E, kBaseline = 0xBA, kKMeans = 0xC2, kSubset = 0x5C;
}

}  // namespace actilang::cli
