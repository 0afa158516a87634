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

#include "actilang/signal/signal_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "actilang/errors.hpp"
#include "actilang/rng.hpp"

namespace actilang::signal {
namespace {

std::string day_label(const std::string& pid, int day) {
  return "participant '" + pid + "' day " + std::to_string(day);
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

double parse_double(std::string_view cell, std::size_t line_no) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    throw ParseError(line_no, "not a number: '" + std::string(cell) + "'");
  }
  return v;
}

int parse_int(std::string_view cell, std::size_t line_no) {
  int v = 0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || cell.empty()) {
    throw ParseError(line_no, "not an integer: '" + std::string(cell) + "'");
  }
  return v;
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

void DaySequence::validate() const {
  if (minutes.size() != kMinutesPerDay) {
    throw ValidationError(day_label(participant_id, day_index) + ": expected " +
                          std::to_string(kMinutesPerDay) + " minute values, got " +
                          std::to_string(minutes.size()));
  }
  if (day_index < 0) throw ValidationError(day_label(participant_id, day_index) + ": negative day index");
  for (std::size_t m = 0; m < minutes.size(); ++m) {
    if (!std::isfinite(minutes[m]) || minutes[m] < 0.0) {
      throw ValidationError(day_label(participant_id, day_index) + ": minute " + std::to_string(m) +
                            " must be finite and non-negative");
    }
  }
}

HourlyMeans hourly_means(const DaySequence& seq) {
  seq.validate();
  HourlyMeans means{};
  std::array<double, 60> hour{};
  for (std::size_t h = 0; h < kHoursPerDay; ++h) {
    // Sorted Neumaier sum: order-independent within the hour.
    std::copy_n(seq.minutes.begin() + h * 60, 60, hour.begin());
    std::sort(hour.begin(), hour.end());
    double s = 0.0, c = 0.0;
    for (double v : hour) {
      const double t = s + v;
      c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
      s = t;
    }
    means[h] = (s + c) / 60.0;
  }
  return means;
}

NormalizationStats compute_norm_stats(std::span<const HourlyMeans> means) {
  if (means.empty()) throw ValidationError("cannot compute normalization stats of an empty dataset");
  NormalizationStats s;
  s.global_min = means[0][0];
  s.global_max = means[0][0];
  for (const HourlyMeans& day : means) {
    for (double v : day) {
      s.global_min = std::min(s.global_min, v);
      s.global_max = std::max(s.global_max, v);
    }
  }
  return s;
}

NormalizationStats compute_norm_stats(std::span<const DaySequence> cohort) {
  std::vector<HourlyMeans> means;
  means.reserve(cohort.size());
  for (const DaySequence& d : cohort) means.push_back(hourly_means(d));
  NormalizationStats s = compute_norm_stats(means);
  double sum = 0.0;
  for (const DaySequence& d : cohort) sum += std::accumulate(d.minutes.begin(), d.minutes.end(), 0.0);
  const double n = static_cast<double>(cohort.size() * kMinutesPerDay);
  s.minute_mean = sum / n;
  double ss = 0.0;
  for (const DaySequence& d : cohort) {
    for (double v : d.minutes) ss += (v - s.minute_mean) * (v - s.minute_mean);
  }
  s.minute_std = std::sqrt(ss / n);
  if (!(s.minute_std > 0.0)) s.minute_std = 1.0;
  return s;
}

HourlyProfile bin_hourly(const DaySequence& seq, const NormalizationStats& stats, bool* degenerate) {
  const HourlyMeans means = hourly_means(seq);
  HourlyProfile p;
  p.participant_id = seq.participant_id;
  p.day_index = seq.day_index;
  const bool flat = stats.degenerate();
  if (degenerate != nullptr) *degenerate = flat;
  if (flat) return p;
  const double range = stats.global_max - stats.global_min;
  for (std::size_t h = 0; h < kHoursPerDay; ++h) {
    const double scaled = (means[h] - stats.global_min) / range * kMaxLevel;
    p.levels[h] = static_cast<int>(std::clamp(std::floor(scaled + 0.5), 0.0, double(kMaxLevel)));
  }
  return p;
}

std::vector<double> standardize_minutes(const DaySequence& seq, const NormalizationStats& stats) {
  std::vector<double> out(seq.minutes.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (seq.minutes[i] - stats.minute_mean) / stats.minute_std;
  return out;
}

// ---- CSV -------------------------------------------------------------------

std::vector<DaySequence> ingest_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header row");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "participant_id" || header[1] != "day_index") {
    throw ParseError(1, "header must start with participant_id,day_index");
  }
  CsvFormat format;
  if (header.size() == 4 && header[2] == "minute" && header[3] == "value") {
    format = CsvFormat::kLong;
  } else if (header.size() == 2 + kMinutesPerDay && header[2] == "m0" &&
             header.back() == "m" + std::to_string(kMinutesPerDay - 1)) {
    format = CsvFormat::kWide;
  } else {
    throw ParseError(1, "unrecognised header: expected wide (m0..m1439) or long (minute,value) layout");
  }

  std::vector<DaySequence> out;
  std::size_t line_no = 1;
  if (format == CsvFormat::kWide) {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "\r") continue;
      const auto cells = split_csv_line(line);
      if (cells.size() < 2) throw ParseError(line_no, "row has fewer than two cells");
      DaySequence d;
      d.participant_id = std::string(cells[0]);
      d.day_index = parse_int(cells[1], line_no);
      d.minutes.reserve(cells.size() - 2);
      for (std::size_t c = 2; c < cells.size(); ++c) d.minutes.push_back(parse_double(cells[c], line_no));
      d.validate();
      out.push_back(std::move(d));
    }
    return out;
  }

  // Long format: group rows by (participant, day) in first-appearance order.
  std::map<std::pair<std::string, int>, std::size_t> index;
  std::vector<std::vector<bool>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 4) throw ParseError(line_no, "long-format row needs 4 cells, got " + std::to_string(cells.size()));
    const std::string pid(cells[0]);
    const int day = parse_int(cells[1], line_no);
    const int minute = parse_int(cells[2], line_no);
    const double value = parse_double(cells[3], line_no);
    auto [it, inserted] = index.try_emplace({pid, day}, out.size());
    if (inserted) {
      DaySequence d;
      d.participant_id = pid;
      d.day_index = day;
      d.minutes.assign(kMinutesPerDay, 0.0);
      out.push_back(std::move(d));
      seen.emplace_back(kMinutesPerDay, false);
    }
    if (minute < 0 || static_cast<std::size_t>(minute) >= kMinutesPerDay) {
      throw ValidationError(day_label(pid, day) + ": minute index " + std::to_string(minute) + " out of range");
    }
    if (seen[it->second][minute]) {
      throw ValidationError(day_label(pid, day) + ": minute " + std::to_string(minute) + " given twice");
    }
    seen[it->second][minute] = true;
    out[it->second].minutes[minute] = value;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto n = static_cast<std::size_t>(std::count(seen[i].begin(), seen[i].end(), true));
    if (n != kMinutesPerDay) {
      throw ValidationError(day_label(out[i].participant_id, out[i].day_index) + ": expected " +
                            std::to_string(kMinutesPerDay) + " minute values, got " + std::to_string(n));
    }
    out[i].validate();
  }
  return out;
}

std::vector<DaySequence> ingest_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return ingest_csv(in);
}

void write_csv(std::ostream& out, std::span<const DaySequence> seqs, CsvFormat format) {
  std::string buf;
  if (format == CsvFormat::kWide) {
    buf = "participant_id,day_index";
    for (std::size_t m = 0; m < kMinutesPerDay; ++m) buf += ",m" + std::to_string(m);
    out << buf << '\n';
    for (const DaySequence& d : seqs) {
      buf = d.participant_id + "," + std::to_string(d.day_index);
      for (double v : d.minutes) {
        buf += ',';
        append_double(buf, v);
      }
      out << buf << '\n';
    }
    return;
  }
  out << "participant_id,day_index,minute,value\n";
  for (const DaySequence& d : seqs) {
    for (std::size_t m = 0; m < d.minutes.size(); ++m) {
      buf = d.participant_id + "," + std::to_string(d.day_index) + "," + std::to_string(m) + ",";
      append_double(buf, d.minutes[m]);
      out << buf << '\n';
    }
  }
}

void write_csv(const std::filesystem::path& path, std::span<const DaySequence> seqs, CsvFormat format) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_csv(out, seqs, format);
}

// ---- Synthetic cohort ------------------------------------------------------

std::string_view archetype_name(Archetype a) {
  switch (a) {
    case Archetype::kMorningDominant: return "morning-dominant";
    case Archetype::kEveningDominant: return "evening-dominant";
    case Archetype::kBimodal: return "bimodal";
    case Archetype::kLowFlat: return "low-flat";
    case Archetype::kIrregularSporadic: return "irregular-sporadic";
  }
  return "unknown";
}

namespace {

using HourCurve = std::array<double, kHoursPerDay>;

// Typical minute intensity per hour for each archetype.
constexpr HourCurve kMorning = {0.3, 0.3, 0.3, 0.3, 0.3, 0.8, 8, 30, 32, 30, 26, 14,
                                8,   8,   7,   7,   7,   6,   5, 5,  4,  3,  1,  0.5};
constexpr HourCurve kEvening = {0.5, 0.3, 0.3, 0.3, 0.3, 0.3, 0.5, 3, 4,  4,  5,  5,
                                6,   7,   7,   7,   9,   22,  28,  30, 28, 24, 10, 3};
constexpr HourCurve kBimodal = {0.3, 0.3, 0.3, 0.3, 0.3, 0.5, 5, 22, 26, 20, 7, 6,
                                6,   6,   6,   6,   16,  24,  26, 18, 6,  4,  1, 0.5};
constexpr HourCurve kLowFlat = {0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.5, 3, 3.5, 3.5, 4, 3.5,
                                3.5, 3.5, 3.5, 3.5, 4,   3.5, 3.5, 3, 3,   2.5, 1, 0.4};

double zero_probability(double base) {
  if (base < 0.6) return 0.95;
  if (base < 2.0) return 0.6;
  if (base < 6.0) return 0.3;
  return 0.1;
}

HourCurve participant_curve(Archetype a, Rng& rng) {
  HourCurve base{};
  switch (a) {
    case Archetype::kMorningDominant: base = kMorning; break;
    case Archetype::kEveningDominant: base = kEvening; break;
    case Archetype::kBimodal: base = kBimodal; break;
    case Archetype::kLowFlat: base = kLowFlat; break;
    case Archetype::kIrregularSporadic: {
      base.fill(0.6);
      for (std::size_t h = 0; h < 6; ++h) base[h] = 0.3;
      const std::size_t bursts = 3 + rng.below(4);
      for (std::size_t b = 0; b < bursts; ++b) base[rng.below(kHoursPerDay)] = rng.uniform(12.0, 34.0);
      break;
    }
  }
  HourCurve out = base;
  if (a != Archetype::kIrregularSporadic && a != Archetype::kLowFlat) {
    // Shift the whole day by -1, 0 or +1 hours.
    const int shift = static_cast<int>(rng.below(3)) - 1;
    for (int h = 0; h < static_cast<int>(kHoursPerDay); ++h) {
      out[h] = base[(h - shift + static_cast<int>(kHoursPerDay)) % static_cast<int>(kHoursPerDay)];
    }
  }
  const double amplitude = std::exp(rng.normal(0.0, 0.25));
  for (double& v : out) v *= amplitude;
  if (a == Archetype::kLowFlat && rng.uniform() < 0.25) {
    // Device left off for a long stretch.
    const std::size_t start = 4 + rng.below(6);
    const std::size_t len = 12 + rng.below(8);
    for (std::size_t h = start; h < std::min(kHoursPerDay, start + len); ++h) out[h] = 0.0;
  }
  return out;
}

}  // namespace

SyntheticCohort synthesize_cohort(std::size_t n_participants, std::uint64_t seed,
                                  const std::array<double, kArchetypeCount>& mix) {
  if (n_participants == 0) throw ValidationError("synthesize_cohort: need at least one participant");
  double total = 0.0;
  for (double w : mix) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("synthesize_cohort: archetype weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw ValidationError("synthesize_cohort: archetype weights are all zero");

  SyntheticCohort cohort;
  Rng pick(mix_seed(seed, 0));
  const int width = std::max<int>(5, static_cast<int>(std::to_string(n_participants).size()));
  for (std::size_t i = 0; i < n_participants; ++i) {
    double u = pick.uniform() * total;
    std::size_t a = 0;
    while (a + 1 < kArchetypeCount && (u >= mix[a] || mix[a] == 0.0)) {
      u -= mix[a];
      ++a;
    }
    while (mix[a] == 0.0) --a;  // rounding at the top end
    const auto arch = static_cast<Archetype>(a);

    Rng rng(mix_seed(seed, i + 1));
    const HourCurve curve = participant_curve(arch, rng);
    DaySequence d;
    std::string idx = std::to_string(i + 1);
    d.participant_id = "P" + std::string(width - idx.size(), '0') + idx;
    d.day_index = 0;
    d.minutes.resize(kMinutesPerDay);
    for (std::size_t m = 0; m < kMinutesPerDay; ++m) {
      const double base = curve[m / 60];
      if (base <= 0.0 || rng.uniform() < zero_probability(base)) {
        d.minutes[m] = 0.0;
      } else {
        d.minutes[m] = std::max(0.0, base * std::exp(rng.normal(0.0, 0.6) - 0.18));
      }
    }
    cohort.sequences.push_back(std::move(d));
    cohort.archetypes.push_back(arch);
  }
  return cohort;
}

// ---- Splitting -------------------------------------------------------------

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ValidationError("unknown split '" + std::string(s) + "'");
}

std::vector<Split> assign_splits(std::size_t n, const SplitFractions& f, std::uint64_t seed) {
  if (n < 3) throw ValidationError("split_dataset: need at least 3 records, got " + std::to_string(n));
  if (f.train < 0 || f.val < 0 || f.test < 0 || std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw ValidationError("split_dataset: fractions must be non-negative and sum to 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x5E1173));
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  auto count = [n](double frac) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(frac * static_cast<double>(n) + 0.5)));
  };
  const std::size_t n_val = count(f.val);
  const std::size_t n_test = std::min(count(f.test), n - n_val - 1);
  std::vector<Split> tags(n, Split::kTrain);
  for (std::size_t i = 0; i < n_val; ++i) tags[order[i]] = Split::kVal;
  for (std::size_t i = n_val; i < n_val + n_test; ++i) tags[order[i]] = Split::kTest;
  return tags;
}

}  // namespace actilang::signal
