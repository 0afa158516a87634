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

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace actilang::signal {

inline constexpr std::size_t kMinutesPerDay = 1440;
inline constexpr std::size_t kHoursPerDay = 24;
inline constexpr int kMaxLevel = 1000;

// One participant-day of minute-level movement intensity (MIMS-like,
// unitless, non-negative).
struct DaySequence {
  std::string participant_id;
  int day_index = 0;
  std::vector<double> minutes;

  // Throws ValidationError naming the participant/day on a bad length or a
  // negative / non-finite value.
  void validate() const;

  friend bool operator==(const DaySequence&, const DaySequence&) = default;
};

// 24 hourly activity levels on the dataset-wide 0..1000 scale.
struct HourlyProfile {
  std::string participant_id;
  int day_index = 0;
  std::array<int, kHoursPerDay> levels{};

  friend bool operator==(const HourlyProfile&, const HourlyProfile&) = default;
};

using HourlyMeans = std::array<double, kHoursPerDay>;

// Min-max range of hourly means over the whole dataset, plus the minute-level
// mean/std used to standardise encoder inputs.
struct NormalizationStats {
  static constexpr int kSchemaVersion = 1;
  double global_min = 0.0;
  double global_max = 0.0;
  double minute_mean = 0.0;
  double minute_std = 1.0;

  bool degenerate() const { return !(global_max > global_min); }
};

HourlyMeans hourly_means(const DaySequence& seq);

// Min/max over every hourly mean of every day. Throws on empty input.
NormalizationStats compute_norm_stats(std::span<const HourlyMeans> means);

// Hourly range plus minute standardisation over a cohort.
NormalizationStats compute_norm_stats(std::span<const DaySequence> cohort);

// level[h] = floor((mean_h - min) / (max - min) * 1000 + 0.5), clamped to
// [0, 1000]. A degenerate range yields all zeros and sets *degenerate.
HourlyProfile bin_hourly(const DaySequence& seq, const NormalizationStats& stats,
                         bool* degenerate = nullptr);

// (minute - minute_mean) / minute_std for every minute.
std::vector<double> standardize_minutes(const DaySequence& seq, const NormalizationStats& stats);

// ---- CSV ingestion ---------------------------------------------------------

enum class CsvFormat { kWide, kLong };

// Auto-detects wide (participant_id,day_index,m0..m1439) or long
// (participant_id,day_index,minute,value) layout from the header. Row order
// (first appearance, for long format) is preserved.
std::vector<DaySequence> ingest_csv(const std::filesystem::path& path);
std::vector<DaySequence> ingest_csv(std::istream& in);

void write_csv(std::ostream& out, std::span<const DaySequence> seqs, CsvFormat format);
void write_csv(const std::filesystem::path& path, std::span<const DaySequence> seqs, CsvFormat format);

// ---- Synthetic cohort ------------------------------------------------------

enum class Archetype : int {
  kMorningDominant = 0,
  kEveningDominant = 1,
  kBimodal = 2,
  kLowFlat = 3,
  kIrregularSporadic = 4,
};
inline constexpr std::size_t kArchetypeCount = 5;
std::string_view archetype_name(Archetype a);

struct SyntheticCohort {
  std::vector<DaySequence> sequences;
  std::vector<Archetype> archetypes;
};

// Deterministic for fixed (n, seed, mix). Participant ids are "P" followed by
// a zero-padded index; every participant contributes day 0. mix weights pick
// the archetype of each participant.
SyntheticCohort synthesize_cohort(std::size_t n_participants, std::uint64_t seed,
                                  const std::array<double, kArchetypeCount>& archetype_mix);

// ---- Splitting -------------------------------------------------------------

enum class Split { kTrain, kVal, kTest };
std::string_view split_name(Split s);
Split parse_split(std::string_view s);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

// Seeded shuffle, then the first round(val*n) shuffled indices go to val, the
// next round(test*n) to test, and the remainder to train. Needs n >= 3; val
// and test each get at least one record.
std::vector<Split> assign_splits(std::size_t n, const SplitFractions& fractions, std::uint64_t seed);

}  // namespace actilang::signal
