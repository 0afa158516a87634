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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "actilang/labeler/labeler.hpp"
#include "actilang/signal/signal_data.hpp"

namespace actilang::dataset {

struct PairRecord {
  signal::DaySequence sequence;
  signal::HourlyProfile profile;
  labeler::SummaryLabel label;
  signal::Split split = signal::Split::kTrain;
  std::optional<int> cluster_id;

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

nlohmann::json to_json(const PairRecord& r);
PairRecord pair_from_json(const nlohmann::json& j);

// One record per line. Reading reports the 1-based line of a bad record.
void write_pairs_jsonl(std::ostream& out, std::span<const PairRecord> pairs);
void write_pairs_jsonl(const std::filesystem::path& path, std::span<const PairRecord> pairs);
std::vector<PairRecord> read_pairs_jsonl(std::istream& in);
std::vector<PairRecord> read_pairs_jsonl(const std::filesystem::path& path);

// Sidecar with an explicit schema_version; reading rejects other versions.
nlohmann::json norm_stats_to_json(const signal::NormalizationStats& s);
signal::NormalizationStats norm_stats_from_json(const nlohmann::json& j);

// Re-tags every record in place by a seeded shuffle.
void split_dataset(std::span<PairRecord> pairs, const signal::SplitFractions& fractions, std::uint64_t seed);

struct BuildOptions {
  std::uint64_t label_seed = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t cluster_seed = 0;
  int exemplar_k = 5;
  signal::SplitFractions fractions;
  labeler::LabelerConfig labeler;
};

struct BuiltDataset {
  std::vector<PairRecord> pairs;
  signal::NormalizationStats stats;
  std::vector<labeler::Exemplar> exemplars;
  bool degenerate_range = false;
};

// Bin with dataset-wide stats, label, split, and pick exemplars. Cluster ids
// come from the exemplar clustering.
BuiltDataset build_dataset(std::span<const signal::DaySequence> sequences, const BuildOptions& options);

// Throws ValidationError if any stored profile differs from re-binning its
// sequence under stats.
void verify_profiles(std::span<const PairRecord> pairs, const signal::NormalizationStats& stats);

std::vector<PairRecord> select_split(std::span<const PairRecord> pairs, signal::Split split);

}  // namespace actilang::dataset
