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

#include "actilang/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "actilang/errors.hpp"

namespace actilang::cli {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", "7", "master seed; every stage seed is derived from it"},
      // synth / dataset
      {"n_participants", "200", "synthetic cohort size"},
      {"archetype_mix", "1,1,1,1,1", "weights of morning,evening,bimodal,low-flat,irregular archetypes"},
      {"source", "auto", "build-dataset input: auto, synth or ingest"},
      {"split_train", "0.8", "train fraction"},
      {"split_val", "0.1", "validation fraction"},
      {"split_test", "0.1", "test fraction"},
      {"exemplar_k", "5", "exemplar clusters"},
      {"narrow_range", "20", "labeler: level range at or below which a day is low movement"},
      {"misuse_zero_count", "16", "labeler: misuse when more zero hours than this"},
      // encoder
      {"encoder_scale", "desk", "desk or paper"},
      {"mae_epochs", "30", "MAE pretraining epochs"},
      {"mae_mask_ratio", "0.5", "fraction of masked patches"},
      {"mae_batch_size", "8", "MAE batch size"},
      {"mae_lr", "1e-3", "MAE peak learning rate"},
      {"mae_warmup_steps", "100", "MAE warmup steps"},
      // decoder
      {"decoder_scale", "desk", "desk (uses decoder_* sizes) or paper"},
      {"decoder_dim", "128", "decoder width"},
      {"decoder_layers", "2", "decoder blocks"},
      {"decoder_heads", "4", "attention heads"},
      {"decoder_mlp", "512", "MLP hidden width"},
      {"max_seq_len", "256", "decoder positions (prefix + BOS + label)"},
      {"lm_context", "levels", "LM pretraining context: levels or none"},
      {"lm_epochs", "6", "LM pretraining epochs"},
      {"lm_batch_size", "8", "LM batch size"},
      {"lm_lr", "3e-3", "LM peak learning rate"},
      {"lm_warmup_steps", "100", "LM warmup steps"},
      {"lm_jitter", "0.15", "per-token chance of a +-1 level shift"},
      {"lm_aux_days", "600", "auxiliary synthetic days in the LM corpus"},
      // alignment
      {"epochs", "15", "alignment epochs"},
      {"batch_size", "2", "alignment batch size"},
      {"warmup_steps", "100", "alignment warmup steps"},
      {"lr", "1e-3", "alignment peak learning rate"},
      {"eval_every", "1", "epochs between validation passes"},
      {"log_every", "10", "steps between logged step rows"},
      {"metric", "sem_F1", "checkpoint selection metric: sem_F1 or rouge1"},
      {"projection", "linear", "linear or mlp"},
      {"val_max_tokens", "160", "generation cap during validation"},
      // generation / evaluation
      {"checkpoint", "last", "projection used after training: last or best"},
      {"split", "test", "split for generate and eval --references-only"},
      {"max_tokens", "160", "generation cap"},
      {"decode", "greedy", "greedy or topk"},
      {"top_k", "5", "candidates for topk decoding"},
      {"embedding", "decoder", "semantic-score embeddings: decoder or hashed"},
      {"eval_epochs", "5,10,15", "epoch checkpoints scored by eval"},
      {"baseline_split", "test", "baseline set: test, val or subset"},
      // analysis
      {"k", "5", "k-means clusters"},
      {"per_cluster", "20", "participants sampled per cluster"},
      {"kmeans_max_iter", "300", "Lloyd iteration cap"},
      {"kmeans_n_init", "4", "k-means++ restarts"},
  };
  return keys;
}

Config::Config() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + key + "'");
  it->second = value;
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ValidationError("unknown config key '" + key + "'");
  return it->second;
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ValidationError("config key '" + key + "': '" + text + "' is not a valid number");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::size_t end = comma == std::string::npos ? s.size() : comma;
    out.push_back(s.substr(start, end - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

long long Config::integer(const std::string& key) const { return parse_number<long long>(key, get(key)); }

std::size_t Config::count(const std::string& key) const {
  const long long v = integer(key);
  if (v < 0) throw ValidationError("config key '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

double Config::real(const std::string& key) const { return parse_number<double>(key, get(key)); }

std::uint64_t Config::u64(const std::string& key) const { return parse_number<std::uint64_t>(key, get(key)); }

std::vector<double> Config::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& part : split_list(get(key))) out.push_back(parse_number<double>(key, trim(part)));
  return out;
}

std::vector<int> Config::integers(const std::string& key) const {
  std::vector<int> out;
  for (const auto& part : split_list(get(key))) out.push_back(parse_number<int>(key, trim(part)));
  return out;
}

void Config::load(std::istream& in) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(n, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (values_.count(key) == 0) throw ParseError(n, "unknown config key '" + key + "'");
    values_[key] = trim(line.substr(eq + 1));
  }
}

void Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  try {
    load(in);
  } catch (const ParseError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void Config::load_snapshot(const nlohmann::json& snapshot) {
  for (const auto& [k, v] : snapshot.items()) set(k, v.get<std::string>());
}

nlohmann::json Config::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

void Config::write(std::ostream& out) const {
  for (const auto& k : config_keys()) out << k.name << " = " << values_.at(k.name) << "  # " << k.help << '\n';
}

}  // namespace actilang::cli
