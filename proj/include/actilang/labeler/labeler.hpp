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
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "actilang/signal/signal_data.hpp"

namespace actilang::labeler {

// ---- Intensity classes ------------------------------------------------------

enum class IntensityClass { kSedentary, kLight, kModerate, kVigorous };
std::string_view intensity_name(IntensityClass c);

// Counts-per-minute cut points: <100, 100..2019, 2020..5998, >=5999.
IntensityClass classify_intensity(double cpm);

// ---- Trend codes and time blocks -------------------------------------------

enum class Trend { kInactive, kSporadic, kGradualRise, kAbruptRise, kSustained, kDecline, kFlatLow };
inline constexpr int kTrendCount = 7;
std::string_view trend_name(Trend t);
Trend parse_trend(std::string_view s);

// Neighbouring codes earn partial rubric credit.
bool trends_adjacent(Trend a, Trend b);

inline constexpr int kBlockCount = 4;
inline constexpr int kHoursPerBlock = 6;
std::string_view block_name(int block);  // night, morning, afternoon, evening
inline int block_of_hour(int hour) { return hour / kHoursPerBlock; }

enum class Section { kOverall, kNight, kMorning, kAfternoon, kEvening, kClosing };
inline constexpr int kSectionCount = 6;
std::string_view section_name(Section s);

struct LabelerConfig {
  int narrow_range = 20;        // max - min of levels at or below this is low movement
  int misuse_zero_count = 16;   // misuse when more zero hours than this
  double inactive_mean = 10.0;
  double low_mean = 50.0;
  double sporadic_cv = 0.8;
  double rise_slope = 5.0;      // levels per hour
  double abrupt_fraction = 0.6; // largest single-hour increase relative to block range
};

// Trend code of one six-hour block. When low_movement is set, rises are
// reported as sustained.
Trend block_trend(std::span<const int, kHoursPerBlock> levels, const LabelerConfig& config, bool low_movement);

struct LabelFacts {
  int peak_hour = 0;
  int zero_count = 0;
  bool misuse_flag = false;
  bool low_movement = false;
  int rest_block = 0;
  std::array<Trend, kBlockCount> block_trends{};

  friend bool operator==(const LabelFacts&, const LabelFacts&) = default;
};

struct SummaryLabel {
  std::string participant_id;
  int day_index = 0;
  std::string text;
  std::array<std::string, kSectionCount> sections;
  LabelFacts facts;

  friend bool operator==(const SummaryLabel&, const SummaryLabel&) = default;
};

nlohmann::json to_json(const SummaryLabel& label);
SummaryLabel label_from_json(const nlohmann::json& j);

// Earliest hour holding the maximum level.
int peak_hour(const signal::HourlyProfile& profile);

SummaryLabel generate_label(const signal::HourlyProfile& profile, std::uint64_t seed,
                            const LabelerConfig& config = {});

// ---- Rubric ------------------------------------------------------------------

struct RubricScore {
  std::array<int, 6> categories{};
  int total() const;
};

// Automated proxy for the six-category rubric. Throws ValidationError if the
// label and profile belong to different participant-days.
RubricScore score_label(const SummaryLabel& label, const signal::HourlyProfile& profile,
                        const LabelerConfig& config = {});

void write_rubric_csv(std::ostream& out, std::span<const SummaryLabel> labels, std::span<const RubricScore> scores);

// ---- Exemplars ---------------------------------------------------------------

struct Exemplar {
  int cluster = 0;
  std::size_t index = 0;  // position in the input list
  signal::HourlyProfile profile;
  SummaryLabel label;
};

// k-means on the raw 24-level vectors, then the member nearest each centroid
// (lowest index on ties). Throws if there are fewer than k distinct profiles.
// Cluster ids of every profile are written to *assignments when given.
std::vector<Exemplar> select_exemplars(std::span<const signal::HourlyProfile> profiles, int k, std::uint64_t seed,
                                       const LabelerConfig& config = {}, std::vector<int>* assignments = nullptr);

// ---- Template bank -----------------------------------------------------------

// Every sentence fragment the labeler can emit, with all slots expanded.
// Used to build the closed tokenizer vocabulary.
std::vector<std::string> template_corpus();

// The versioned bank as shipped.
const nlohmann::json& template_bank();

}  // namespace actilang::labeler
