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

#include "context.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "actilang/errors.hpp"
#include "actilang/nn/archive.hpp"
#include "actilang/rng.hpp"
#include "actilang/train/train.hpp"

namespace actilang::cli {

bool Context::has_stage(const std::string& stage) const { return fs::exists(stage_dir(stage) / kManifestName); }

fs::path Context::require(const std::string& stage, const std::string& needed_by) {
  const fs::path dir = stage_dir(stage);
  if (loaded_.count(stage) != 0) return dir;
  if (!has_stage(stage)) {
    throw StageOrderError("'" + needed_by + "' needs the output of '" + stage + "'; run `actilang " + stage +
                          "` first (workspace " + workspace_.string() + ")");
  }
  RunManifest m = read_manifest(dir);
  verify_manifest(dir, m);
  const std::string hash = m.content_hash();
  for (const auto& [up, h] : m.inputs) {
    if (inputs_.count(up) != 0 && inputs_.at(up) != h) {
      throw ValidationError("'" + stage + "' was built from a different '" + up + "' run; rerun " + stage);
    }
  }
  for (const auto& [other, om] : loaded_) {
    auto it = om.inputs.find(stage);
    if (it != om.inputs.end() && it->second != hash) {
      throw ValidationError("'" + other + "' was built from a different '" + stage + "' run; rerun " + other);
    }
  }
  loaded_.emplace(stage, std::move(m));
  inputs_[stage] = hash;
  return dir;
}

std::uint64_t Context::seed(std::uint64_t stream) const { return mix_seed(config_.u64("seed"), stream); }

// ---- StageRun ------------------------------------------------------------------------

StageRun::StageRun(Context& ctx, std::string stage)
    : ctx_(ctx), stage_(std::move(stage)), tmp_(ctx.stage_dir(stage_ + ".tmp")) {
  fs::remove_all(tmp_);
  fs::create_directories(tmp_);
  manifest_.stage = stage_;
  manifest_.version = tool_version();
  manifest_.started_at = utc_timestamp();
  manifest_.config = ctx.config().to_json();
  manifest_.seeds["seed"] = ctx.config().u64("seed");
}

StageRun::~StageRun() {
  if (committed_) return;
  std::error_code ec;
  const fs::path failed = ctx_.stage_dir(stage_ + ".failed");
  fs::remove_all(failed, ec);
  fs::rename(tmp_, failed, ec);
}

RunManifest StageRun::commit() {
  manifest_.inputs = ctx_.inputs();
  for (const auto& [k, v] : extra_inputs_) manifest_.inputs[k] = v;
  manifest_.artifacts = hash_tree(tmp_);
  manifest_.finished_at = utc_timestamp();
  write_manifest(tmp_, manifest_);
  const fs::path final_dir = ctx_.stage_dir(stage_);
  fs::remove_all(final_dir);
  fs::remove_all(ctx_.stage_dir(stage_ + ".failed"));
  fs::rename(tmp_, final_dir);
  committed_ = true;
  ctx_.out() << stage_ << ": " << manifest_.artifacts.size() << " artifacts in " << final_dir.string()
             << " (content " << manifest_.content_hash().substr(0, 16) << ")\n";
  return manifest_;
}

// ---- Loaders ---------------------------------------------------------------------------

DatasetArtifacts load_dataset(Context& ctx, const std::string& by) {
  const fs::path dir = ctx.require("build-dataset", by);
  DatasetArtifacts d;
  d.pairs = dataset::read_pairs_jsonl(dir / "pairs.jsonl");
  d.stats = dataset::norm_stats_from_json(read_json(dir / "norm_stats.json"));
  return d;
}

std::unique_ptr<encoder::PatchEncoder> load_encoder(Context& ctx, const std::string& by) {
  const fs::path dir = ctx.require("pretrain-encoder", by);
  return encoder::PatchEncoder::from_archive(nn::load_archive(dir / "encoder.ckpt"));
}

DecoderArtifacts load_decoder(Context& ctx, const std::string& by) {
  const fs::path dir = ctx.require("pretrain-decoder", by);
  DecoderArtifacts d;
  d.decoder = aligner::Decoder::from_archive(nn::load_archive(dir / "decoder.ckpt"));
  d.tok = std::make_unique<aligner::Tokenizer>(aligner::Tokenizer::from_json(read_json(dir / "tokenizer.json")));
  if (d.tok->size() != d.decoder->config().vocab_size) {
    throw ValidationError("tokenizer and decoder checkpoint disagree on vocabulary size");
  }
  return d;
}

std::unique_ptr<aligner::Projection> load_trained_projection(Context& ctx, const std::string& by, int epoch) {
  const fs::path dir = ctx.require("train", by);
  fs::path file;
  if (epoch > 0) {
    file = dir / epoch_file(epoch);
  } else {
    const std::string which = ctx.config().str("checkpoint");
    if (which != "last" && which != "best") throw ValidationError("checkpoint must be 'last' or 'best'");
    file = dir / (which + ".ckpt");
  }
  if (!fs::exists(file)) throw ValidationError("train output has no " + file.filename().string());
  return train::load_projection(file);
}

std::vector<SubsetEntry> load_subset(Context& ctx, const std::string& by) {
  const fs::path dir = ctx.require("cluster", by);
  std::ifstream in(dir / "subset.csv");
  std::string line;
  std::getline(in, line);
  std::vector<SubsetEntry> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    std::stringstream ss(line);
    std::string id, day, cluster;
    if (!std::getline(ss, id, ',') || !std::getline(ss, day, ',') || !std::getline(ss, cluster, ',')) {
      throw ParseError(n, "subset.csv: expected participant_id,day_index,cluster");
    }
    out.push_back({id, std::stoi(day), std::stoi(cluster)});
  }
  return out;
}

std::vector<dataset::PairRecord> subset_pairs(const DatasetArtifacts& ds, const std::vector<SubsetEntry>& subset) {
  std::map<std::pair<std::string, int>, const dataset::PairRecord*> index;
  for (const auto& p : ds.pairs) index[{p.sequence.participant_id, p.sequence.day_index}] = &p;
  std::vector<dataset::PairRecord> out;
  for (const auto& s : subset) {
    auto it = index.find({s.participant_id, s.day_index});
    if (it == index.end()) throw ValidationError("subset participant '" + s.participant_id + "' is not in the dataset");
    out.push_back(*it->second);
  }
  return out;
}

// ---- Files -----------------------------------------------------------------------------

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw ValidationError("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(n, path.filename().string() + ": " + e.what());
    }
  }
  return out;
}

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string epoch_file(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "epoch_%03d.ckpt", epoch);
  return buf;
}

}  // namespace actilang::cli
