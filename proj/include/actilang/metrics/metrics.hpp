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

// Overlap metrics (ROUGE-1, ROUGE-L) and a greedy-matching embedding score.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace actilang::metrics {

using Tokens = std::vector<std::string>;

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Harmonic mean, 0 when both inputs are 0.
double harmonic(double p, double r);

// Lowercase, split on whitespace and ASCII punctuation; punctuation is dropped.
Tokens tokenize(std::string_view text);

// Suffix stripper. Input must be lowercase ASCII; anything else is returned as is.
std::string stem(std::string_view token);

// Clipped unigram overlap after optional stemming.
std::size_t unigram_overlap(const Tokens& candidate, const Tokens& reference, bool use_stem);
// Length of the longest common subsequence.
std::size_t lcs_length(const Tokens& a, const Tokens& b);

// Both throw ValidationError on an empty reference; an empty candidate scores 0.
Prf rouge1(const Tokens& candidate, const Tokens& reference, bool use_stem = true);
Prf rougeL(const Tokens& candidate, const Tokens& reference, bool use_stem = true);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string name() const = 0;
  // One unit-norm vector per token.
  virtual std::vector<std::vector<double>> embed(const Tokens& tokens) const = 0;
  // True when cosines between outputs can be negative; scores then map cos to (1+cos)/2.
  virtual bool signed_cosines() const = 0;
};

// Static per-token vectors seeded from a hash of the stemmed token.
class HashedEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HashedEmbeddingProvider(std::size_t dim = 64, std::uint64_t seed = 0);
  std::string name() const override { return "hashed-static"; }
  std::vector<std::vector<double>> embed(const Tokens& tokens) const override;
  bool signed_cosines() const override { return true; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

struct SemanticScore {
  Prf prf;
  bool rescaled = false;  // (1+cos)/2 was applied
};

// Greedy max-similarity matching. Throws ValidationError on empty input.
SemanticScore semantic_score(const Tokens& candidate, const Tokens& reference, const EmbeddingProvider& provider);

struct MetricReport {
  double rouge1 = 0.0;
  double rougeL = 0.0;
  double sem_P = 0.0;
  double sem_R = 0.0;
  double sem_F1 = 0.0;
  bool sem_rescaled = false;
};

MetricReport score_pair(std::string_view candidate, std::string_view reference, const EmbeddingProvider& provider);

struct ScoredRow {
  std::string id;
  MetricReport report;
};

struct BatchResult {
  std::vector<ScoredRow> rows;
  MetricReport mean;  // macro average over ids
};

// Macro average; rows sharing an id are averaged first.
MetricReport macro_average(const std::vector<ScoredRow>& rows);

// JSONL lines of {"id","candidate","reference"}. ParseError carries the line number.
BatchResult score_jsonl(std::istream& in, const EmbeddingProvider& provider);
BatchResult score_jsonl(const std::filesystem::path& path, const EmbeddingProvider& provider);
// Header id,rouge1,rougeL,sem_P,sem_R,sem_F1 and a trailing "mean" row.
void write_report_csv(std::ostream& out, const BatchResult& result);

}  // namespace actilang::metrics
