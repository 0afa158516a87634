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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "actilang/errors.hpp"
#include "actilang/rng.hpp"
#include "actilang/signal/signal_data.hpp"

namespace actilang::signal {
namespace {

std::string wide_header() {
  std::string h = "participant_id,day_index";
  for (int m = 0; m < 1440; ++m) h += ",m" + std::to_string(m);
  return h + "\n";
}

DaySequence random_day(Rng& rng, const std::string& id) {
  DaySequence d{id, 0, std::vector<double>(kMinutesPerDay)};
  for (double& v : d.minutes) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, 40.0);
  return d;
}

TEST(Ingest, WideZeroRow) {
  std::string csv = wide_header() + "A,0";
  for (int m = 0; m < 1440; ++m) csv += ",0";
  std::istringstream in(csv + "\n");
  const auto seqs = ingest_csv(in);
  ASSERT_EQ(seqs.size(), 1u);
  EXPECT_EQ(seqs[0].participant_id, "A");
  EXPECT_EQ(seqs[0].minutes, std::vector<double>(1440, 0.0));
}

TEST(Ingest, ShortRowNamesParticipant) {
  std::string csv = wide_header() + "B7,3";
  for (int m = 0; m < 1439; ++m) csv += ",1";
  std::istringstream in(csv + "\n");
  try {
    ingest_csv(in);
    FAIL();
  } catch (const ParseError&) {
    FAIL() << "length problems are validation errors, not parse errors";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("B7"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("1439"), std::string::npos);
  }
}

TEST(Ingest, MalformedCellReportsLine) {
  std::string csv = wide_header() + "A,0";
  for (int m = 0; m < 1440; ++m) csv += ",1";
  csv += "\nB,0";
  for (int m = 0; m < 1440; ++m) csv += (m == 5 ? ",x" : ",1");
  std::istringstream in(csv + "\n");
  try {
    ingest_csv(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Ingest, LongFormatMinuteIndex) {
  // Hand-written serializer, independent of write_csv.
  std::string csv = "participant_id,day_index,minute,value\n";
  for (int m = 0; m < 1440; ++m) csv += "Q,2," + std::to_string(m) + "," + std::to_string(m) + "\n";
  std::istringstream in(csv);
  const auto seqs = ingest_csv(in);
  ASSERT_EQ(seqs.size(), 1u);
  EXPECT_EQ(seqs[0].day_index, 2);
  for (int m = 0; m < 1440; ++m) EXPECT_EQ(seqs[0].minutes[m], m);
}

TEST(Ingest, LongFormatMissingMinute) {
  std::string csv = "participant_id,day_index,minute,value\n";
  for (int m = 0; m < 1440; ++m) {
    if (m != 700) csv += "Q,0," + std::to_string(m) + ",1\n";
  }
  std::istringstream in(csv);
  EXPECT_THROW(ingest_csv(in), ValidationError);
}

TEST(Ingest, RoundTripBothFormats) {
  Rng rng(11);
  std::vector<DaySequence> seqs = {random_day(rng, "a"), random_day(rng, "b"), random_day(rng, "c")};
  seqs[1].day_index = 4;
  seqs[2].minutes[17] = 0.1 + 0.2;  // needs shortest round-trip formatting
  for (CsvFormat f : {CsvFormat::kWide, CsvFormat::kLong}) {
    std::stringstream ss;
    write_csv(ss, seqs, f);
    EXPECT_EQ(ingest_csv(ss), seqs);
  }
}

TEST(Binning, MidpointAndArithmeticMean) {
  DaySequence d{"x", 0, std::vector<double>(1440, 0.0)};
  for (int m = 0; m < 60; ++m) d.minutes[m] = 5.0;
  for (int m = 0; m < 60; ++m) d.minutes[60 + m] = m;
  for (int m = 0; m < 60; ++m) d.minutes[120 + m] = 10.0;
  const HourlyMeans means = hourly_means(d);
  EXPECT_EQ(means[1], 29.5);
  NormalizationStats stats;
  stats.global_min = 0.0;
  stats.global_max = 10.0;
  const HourlyProfile p = bin_hourly(d, stats);
  EXPECT_EQ(p.levels[0], 500);
  EXPECT_EQ(p.levels[1], 1000);  // clamped
  EXPECT_EQ(p.levels[2], 1000);
  EXPECT_EQ(p.levels[3], 0);
}

TEST(Binning, HalfUpRounding) {
  DaySequence d{"x", 0, std::vector<double>(1440, 0.0)};
  for (int m = 0; m < 60; ++m) d.minutes[m] = 0.5;  // 0.5 / 1000 * 1000 = 0.5
  NormalizationStats stats;
  stats.global_max = 1000.0;
  EXPECT_EQ(bin_hourly(d, stats).levels[0], 1);
}

TEST(Binning, DegenerateRangeFlagsAndZeros) {
  DaySequence d{"x", 0, std::vector<double>(1440, 0.0)};
  std::vector<DaySequence> cohort = {d};
  const NormalizationStats stats = compute_norm_stats(cohort);
  EXPECT_EQ(stats.global_min, 0.0);
  EXPECT_EQ(stats.global_max, 0.0);
  bool flag = false;
  const HourlyProfile p = bin_hourly(d, stats, &flag);
  EXPECT_TRUE(flag);
  for (int v : p.levels) EXPECT_EQ(v, 0);
}

TEST(NormStats, SmallMeansAndEmpty) {
  HourlyMeans m{};
  m.fill(4.0);
  m[3] = 2.0;
  m[10] = 8.0;
  std::vector<HourlyMeans> v = {m};
  const auto s = compute_norm_stats(v);
  EXPECT_EQ(s.global_min, 2.0);
  EXPECT_EQ(s.global_max, 8.0);
  EXPECT_THROW(compute_norm_stats(std::span<const HourlyMeans>{}), ValidationError);
}

TEST(NormStats, CohortMatchesLinearScan) {
  const auto cohort = synthesize_cohort(60, 3, {1, 1, 1, 1, 1}).sequences;
  const auto stats = compute_norm_stats(cohort);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& d : cohort) {
    for (int h = 0; h < 24; ++h) {
      long double s = 0.0L;
      for (int m = 0; m < 60; ++m) s += d.minutes[h * 60 + m];
      lo = std::min(lo, static_cast<double>(s / 60.0L));
      hi = std::max(hi, static_cast<double>(s / 60.0L));
    }
  }
  EXPECT_NEAR(stats.global_min, lo, 1e-13 * (lo + 1.0));
  EXPECT_NEAR(stats.global_max, hi, 1e-13 * hi);
  // Extremes attained after binning.
  int min_level = 1000, max_level = 0;
  for (const auto& d : cohort) {
    for (int v : bin_hourly(d, stats).levels) {
      min_level = std::min(min_level, v);
      max_level = std::max(max_level, v);
    }
  }
  EXPECT_EQ(min_level, 0);
  EXPECT_EQ(max_level, 1000);
}

TEST(BinningProperty, PermutationInvariantAndMonotone) {
  Rng rng(5);
  const auto cohort = synthesize_cohort(30, 9, {1, 1, 1, 1, 1}).sequences;
  const auto stats = compute_norm_stats(cohort);
  for (const auto& d : cohort) {
    DaySequence shuffled = d;
    for (int h = 0; h < 24; ++h) {
      auto first = shuffled.minutes.begin() + h * 60;
      for (int i = 59; i > 0; --i) std::swap(first[i], first[rng.below(i + 1)]);
    }
    const auto a = hourly_means(d), b = hourly_means(shuffled);
    EXPECT_EQ(a, b);
    for (int h = 0; h < 24; ++h) {
      long double ref = 0.0L;
      for (int m = 0; m < 60; ++m) ref += d.minutes[h * 60 + m];
      const double brute = static_cast<double>(ref / 60.0L);
      EXPECT_LE(std::abs(a[h] - brute), std::nextafter(brute, INFINITY) - brute) << "hour " << h;
    }
    const auto p = bin_hourly(d, stats);
    for (int i = 0; i < 24; ++i) {
      for (int j = 0; j < 24; ++j) {
        if (a[i] <= a[j]) {
          EXPECT_LE(p.levels[i], p.levels[j]);
        }
      }
    }
  }
}

TEST(Synth, DeterministicAndValidated) {
  const auto a = synthesize_cohort(25, 7, {1, 1, 1, 1, 1});
  const auto b = synthesize_cohort(25, 7, {1, 1, 1, 1, 1});
  EXPECT_EQ(a.sequences, b.sequences);
  EXPECT_EQ(a.archetypes, b.archetypes);
  EXPECT_NE(synthesize_cohort(25, 8, {1, 1, 1, 1, 1}).sequences, a.sequences);
  for (const auto& d : a.sequences) EXPECT_NO_THROW(d.validate());
  EXPECT_THROW(synthesize_cohort(0, 7, {1, 1, 1, 1, 1}), ValidationError);
  EXPECT_THROW(synthesize_cohort(5, 7, {0, 0, 0, 0, 0}), ValidationError);
  EXPECT_THROW(synthesize_cohort(5, 7, {1, -1, 0, 0, 0}), ValidationError);
}

TEST(Synth, MorningMixPeaksInMorning) {
  const auto c = synthesize_cohort(200, 21, {1, 0, 0, 0, 0});
  for (const auto& d : c.sequences) {
    const auto means = hourly_means(d);
    const auto peak = std::max_element(means.begin(), means.end()) - means.begin();
    EXPECT_GE(peak, 6) << d.participant_id;
    EXPECT_LE(peak, 11) << d.participant_id;
  }
}

TEST(Synth, MixSelectsArchetypes) {
  const auto c = synthesize_cohort(100, 2, {0, 0, 1, 0, 1});
  for (Archetype a : c.archetypes) {
    EXPECT_TRUE(a == Archetype::kBimodal || a == Archetype::kIrregularSporadic);
  }
}

std::array<std::size_t, 3> counts(const std::vector<Split>& tags) {
  std::array<std::size_t, 3> c{};
  for (Split s : tags) ++c[static_cast<int>(s)];
  return c;
}

TEST(Split, FullCohortAndSmallSizes) {
  EXPECT_EQ(counts(assign_splits(7769, {}, 1)), (std::array<std::size_t, 3>{6215, 777, 777}));
  EXPECT_EQ(counts(assign_splits(10, {}, 1)), (std::array<std::size_t, 3>{8, 1, 1}));
  EXPECT_EQ(counts(assign_splits(3, {}, 1)), (std::array<std::size_t, 3>{1, 1, 1}));
  EXPECT_THROW(assign_splits(2, {}, 1), ValidationError);
  EXPECT_THROW(assign_splits(10, {0.8, 0.1, 0.2}, 1), ValidationError);
}

TEST(Split, DeterministicPartition) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = assign_splits(200, {}, seed);
    EXPECT_EQ(a, assign_splits(200, {}, seed));
    EXPECT_EQ(a.size(), 200u);  // each record carries exactly one tag
    const auto c = counts(a);
    EXPECT_EQ(c[0] + c[1] + c[2], 200u);
  }
  EXPECT_NE(assign_splits(200, {}, 1), assign_splits(200, {}, 2));
  EXPECT_EQ(parse_split(split_name(Split::kVal)), Split::kVal);
}

}  // namespace
}  // namespace actilang::signal
