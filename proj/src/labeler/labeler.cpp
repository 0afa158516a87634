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

#include "actilang/labeler/labeler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "actilang/analysis/analysis.hpp"
#include "actilang/errors.hpp"
#include "actilang/rng.hpp"

namespace actilang::labeler {
namespace detail {
extern const char* const kTemplateBankJson;
}

using signal::HourlyProfile;
using nlohmann::json;

// ---- Intensity ----------------------------------------------------------------

std::string_view intensity_name(IntensityClass c) {
  switch (c) {
    case IntensityClass::kSedentary: return "Sedentary";
    case IntensityClass::kLight: return "Light";
    case IntensityClass::kModerate: return "Moderate";
    case IntensityClass::kVigorous: return "Vigorous";
  }
  return "unknown";
}

IntensityClass classify_intensity(double cpm) {
  if (!(cpm >= 0.0) || !std::isfinite(cpm)) {
    throw ValidationError("classify_intensity: counts per minute must be finite and non-negative");
  }
  if (cpm < 100.0) return IntensityClass::kSedentary;
  if (cpm < 2020.0) return IntensityClass::kLight;
  if (cpm < 5999.0) return IntensityClass::kModerate;
  return IntensityClass::kVigorous;
}

// ---- Codes --------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, kTrendCount> kTrendNames = {
    "inactive", "sporadic", "gradual-rise", "abrupt-rise", "sustained", "decline", "flat-low"};
constexpr std::array<std::string_view, kBlockCount> kBlockNames = {"night", "morning", "afternoon", "evening"};
constexpr std::array<std::string_view, kSectionCount> kSectionNames = {"overall",   "night",   "morning",
                                                                       "afternoon", "evening", "closing"};

}  // namespace

std::string_view trend_name(Trend t) { return kTrendNames.at(static_cast<int>(t)); }

Trend parse_trend(std::string_view s) {
  for (int i = 0; i < kTrendCount; ++i) {
    if (kTrendNames[i] == s) return static_cast<Trend>(i);
  }
  throw ValidationError("unknown trend code '" + std::string(s) + "'");
}

bool trends_adjacent(Trend a, Trend b) {
  auto is = [&](Trend x, Trend y) { return (a == x && b == y) || (a == y && b == x); };
  return is(Trend::kInactive, Trend::kFlatLow) || is(Trend::kGradualRise, Trend::kAbruptRise) ||
         is(Trend::kSustained, Trend::kGradualRise) || is(Trend::kSustained, Trend::kDecline) ||
         is(Trend::kSporadic, Trend::kSustained) || is(Trend::kSporadic, Trend::kFlatLow);
}

std::string_view block_name(int block) { return kBlockNames.at(block); }
std::string_view section_name(Section s) { return kSectionNames.at(static_cast<int>(s)); }

Trend block_trend(std::span<const int, kHoursPerBlock> y, const LabelerConfig& cfg, bool low_movement) {
  double sum = 0.0, sum_sq = 0.0;
  for (int v : y) {
    sum += v;
    sum_sq += static_cast<double>(v) * v;
  }
  const double n = kHoursPerBlock;
  const double mean = sum / n;
  if (mean < cfg.low_mean) return mean < cfg.inactive_mean ? Trend::kInactive : Trend::kFlatLow;
  // cv > t  <=>  n*sum_sq - sum^2 > t^2 * sum^2, all exact in integers.
  if (n * sum_sq - sum * sum > cfg.sporadic_cv * cfg.sporadic_cv * sum * sum) return Trend::kSporadic;
  double sxy = 0.0;
  for (int i = 0; i < kHoursPerBlock; ++i) sxy += (i - 2.5) * y[i];
  const double slope = sxy / 17.5;
  if (slope > cfg.rise_slope) {
    if (low_movement) return Trend::kSustained;
    int jump = 0;
    for (int i = 1; i < kHoursPerBlock; ++i) jump = std::max(jump, y[i] - y[i - 1]);
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    return jump >= cfg.abrupt_fraction * (*hi - *lo) ? Trend::kAbruptRise : Trend::kGradualRise;
  }
  if (slope < -cfg.rise_slope) return Trend::kDecline;
  return Trend::kSustained;
}

int peak_hour(const HourlyProfile& p) {
  return static_cast<int>(std::max_element(p.levels.begin(), p.levels.end()) - p.levels.begin());
}

// ---- Template bank ------------------------------------------------------------

const json& template_bank() {
  static const json bank = [] {
    json j = json::parse(detail::kTemplateBankJson);
    for (std::string_view t : kTrendNames) {
      if (j.at("trends").at(std::string(t)).size() < 4) {
        throw ValidationError("template bank: trend '" + std::string(t) + "' needs at least 4 templates");
      }
    }
    return j;
  }();
  return bank;
}

namespace {

std::string replace_all(std::string s, std::string_view key, std::string_view value) {
  for (std::size_t pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size())) {
    s.replace(pos, key.size(), value);
  }
  return s;
}

std::size_t pick(std::uint64_t seed, int section, std::uint64_t key, std::uint64_t bucket, std::size_t n) {
  return mix_seed(mix_seed(mix_seed(seed, static_cast<std::uint64_t>(section)), key), bucket) % n;
}

std::string level_word(double mean) {
  const json& b = template_bank();
  const auto& bounds = b.at("level_bounds");
  std::size_t i = 0;
  while (i < bounds.size() && mean >= bounds[i].get<double>()) ++i;
  return b.at("level_words").at(i).get<std::string>();
}

std::string period_name(int block) { return template_bank().at("period_names").at(block).get<std::string>(); }

std::vector<std::string> expand_levels(const std::string& s) {
  if (s.find("{level}") == std::string::npos) return {s};
  std::vector<std::string> out;
  for (const auto& w : template_bank().at("level_words")) out.push_back(replace_all(s, "{level}", w.get<std::string>()));
  return out;
}

std::vector<std::string> expand_periods(const std::string& s) {
  std::vector<std::string> out;
  for (int p = 0; p < kBlockCount; ++p) {
    for (int r = 0; r < kBlockCount; ++r) {
      std::string e = replace_all(replace_all(s, "{period}", period_name(p)), "{rest}", period_name(r));
      if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
    }
  }
  return out;
}

std::string choose(const json& list, std::size_t index) { return list.at(index % list.size()).get<std::string>(); }

struct ProfileStats {
  int peak = 0;
  int zeros = 0;
  int range = 0;
  int rest_block = 0;
  std::array<double, kBlockCount> block_mean{};
};

ProfileStats profile_stats(const HourlyProfile& p) {
  ProfileStats s;
  s.peak = peak_hour(p);
  s.zeros = static_cast<int>(std::count(p.levels.begin(), p.levels.end(), 0));
  const auto [lo, hi] = std::minmax_element(p.levels.begin(), p.levels.end());
  s.range = *hi - *lo;
  for (int b = 0; b < kBlockCount; ++b) {
    int sum = 0;
    for (int h = 0; h < kHoursPerBlock; ++h) sum += p.levels[b * kHoursPerBlock + h];
    s.block_mean[b] = sum / static_cast<double>(kHoursPerBlock);
  }
  s.rest_block = static_cast<int>(std::min_element(s.block_mean.begin(), s.block_mean.end()) - s.block_mean.begin());
  return s;
}

std::span<const int, kHoursPerBlock> block_levels(const HourlyProfile& p, int b) {
  return std::span<const int, kHoursPerBlock>(p.levels.data() + b * kHoursPerBlock, kHoursPerBlock);
}

constexpr std::uint64_t kIntroKey = 100, kPeakKey = 200, kRestKey = 300;

}  // namespace

std::vector<std::string> template_corpus() {
  const json& b = template_bank();
  std::vector<std::string> out;
  for (const auto& intros : b.at("block_intros")) {
    for (const auto& s : intros) out.push_back(s.get<std::string>());
  }
  for (const auto& [code, list] : b.at("trends").items()) {
    for (const auto& s : list) {
      for (auto& e : expand_levels(s.get<std::string>())) out.push_back(e);
    }
  }
  for (const char* key : {"peak", "rest"}) {
    for (const auto& s : b.at(key)) out.push_back(s.get<std::string>());
  }
  for (const char* key : {"overall", "closing"}) {
    for (const auto& [kind, list] : b.at(key).items()) {
      for (const auto& s : list) {
        for (auto& e : expand_periods(s.get<std::string>())) out.push_back(e);
      }
    }
  }
  return out;
}

// ---- Generation -----------------------------------------------------------------

SummaryLabel generate_label(const HourlyProfile& profile, std::uint64_t seed, const LabelerConfig& cfg) {
  for (int v : profile.levels) {
    if (v < 0 || v > signal::kMaxLevel) {
      throw ValidationError("participant '" + profile.participant_id + "': level outside [0, 1000]");
    }
  }
  const json& bank = template_bank();
  const ProfileStats st = profile_stats(profile);

  SummaryLabel label;
  label.participant_id = profile.participant_id;
  label.day_index = profile.day_index;
  LabelFacts& f = label.facts;
  f.peak_hour = st.peak;
  f.zero_count = st.zeros;
  f.misuse_flag = st.zeros > cfg.misuse_zero_count;
  f.low_movement = st.range <= cfg.narrow_range;
  f.rest_block = st.rest_block;
  for (int b = 0; b < kBlockCount; ++b) f.block_trends[b] = block_trend(block_levels(profile, b), cfg, f.low_movement);

  const bool flat = st.range == 0;
  const int peak_block = block_of_hour(st.peak);
  const bool mention_peak = !flat && !f.low_movement;

  std::string& overall = label.sections[0];
  if (f.misuse_flag) {
    overall = choose(bank.at("overall").at("misuse"), pick(seed, 0, 1, st.zeros / 4, 4));
  }
  if (f.low_movement) {
    const std::string low = choose(bank.at("overall").at("low_movement"), pick(seed, 0, 2, st.range / 10, 4));
    overall = overall.empty() ? low : overall + " " + low;
  } else if (!f.misuse_flag) {
    overall = replace_all(choose(bank.at("overall").at("normal"), pick(seed, 0, 3, peak_block, 4)), "{period}",
                          period_name(peak_block));
  }

  for (int b = 0; b < kBlockCount; ++b) {
    const int section = b + 1;
    const auto code = static_cast<std::uint64_t>(f.block_trends[b]);
    const auto bucket = static_cast<std::uint64_t>(st.block_mean[b] / 250.0);
    const json& intros = bank.at("block_intros").at(b);
    const json& phrases = bank.at("trends").at(std::string(trend_name(f.block_trends[b])));
    std::string phrase = replace_all(choose(phrases, pick(seed, section, code, bucket, phrases.size())), "{level}",
                                     level_word(st.block_mean[b]));
    std::string text = choose(intros, pick(seed, section, kIntroKey + code, bucket, intros.size())) + ", " +
                       phrase + ".";
    if (mention_peak && b == peak_block) {
      text += " " + choose(bank.at("peak"), pick(seed, section, kPeakKey, bucket, bank.at("peak").size()));
    }
    if (!flat && b == st.rest_block && b != peak_block) {
      text += " " + choose(bank.at("rest"), pick(seed, section, kRestKey, bucket, bank.at("rest").size()));
    }
    label.sections[section] = std::move(text);
  }

  std::string& closing = label.sections[5];
  if (f.misuse_flag) {
    closing = choose(bank.at("closing").at("misuse"), pick(seed, 5, 1, st.zeros / 4, 4));
  } else if (f.low_movement) {
    closing = choose(bank.at("closing").at("low_movement"), pick(seed, 5, 2, st.range / 10, 4));
  } else {
    closing = replace_all(
        replace_all(choose(bank.at("closing").at("normal"), pick(seed, 5, 3, peak_block * 4 + st.rest_block, 4)),
                    "{period}", period_name(peak_block)),
        "{rest}", period_name(st.rest_block));
  }

  for (const auto& s : label.sections) {
    if (!label.text.empty()) label.text += ' ';
    label.text += s;
  }
  return label;
}

// ---- JSON -----------------------------------------------------------------------

json to_json(const SummaryLabel& l) {
  json sections = json::object();
  for (int i = 0; i < kSectionCount; ++i) sections[std::string(kSectionNames[i])] = l.sections[i];
  json trends = json::object();
  for (int b = 0; b < kBlockCount; ++b) trends[std::string(kBlockNames[b])] = std::string(trend_name(l.facts.block_trends[b]));
  return json{{"participant_id", l.participant_id},
              {"day_index", l.day_index},
              {"text", l.text},
              {"sections", sections},
              {"facts",
               {{"peak_hour", l.facts.peak_hour},
                {"zero_count", l.facts.zero_count},
                {"misuse_flag", l.facts.misuse_flag},
                {"low_movement", l.facts.low_movement},
                {"rest_block", std::string(kBlockNames.at(l.facts.rest_block))},
                {"block_trends", trends}}}};
}

SummaryLabel label_from_json(const json& j) {
  try {
    SummaryLabel l;
    l.participant_id = j.at("participant_id").get<std::string>();
    l.day_index = j.at("day_index").get<int>();
    l.text = j.at("text").get<std::string>();
    for (int i = 0; i < kSectionCount; ++i) l.sections[i] = j.at("sections").at(std::string(kSectionNames[i])).get<std::string>();
    const json& f = j.at("facts");
    l.facts.peak_hour = f.at("peak_hour").get<int>();
    l.facts.zero_count = f.at("zero_count").get<int>();
    l.facts.misuse_flag = f.at("misuse_flag").get<bool>();
    l.facts.low_movement = f.at("low_movement").get<bool>();
    const std::string rest = f.at("rest_block").get<std::string>();
    const auto it = std::find(kBlockNames.begin(), kBlockNames.end(), rest);
    if (it == kBlockNames.end()) throw ValidationError("unknown block '" + rest + "'");
    l.facts.rest_block = static_cast<int>(it - kBlockNames.begin());
    for (int b = 0; b < kBlockCount; ++b) {
      l.facts.block_trends[b] = parse_trend(f.at("block_trends").at(std::string(kBlockNames[b])).get<std::string>());
    }
    return l;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed label record: ") + e.what());
  }
}

// ---- Rubric ---------------------------------------------------------------------

int RubricScore::total() const { return std::accumulate(categories.begin(), categories.end(), 0); }

namespace {

bool contains_any(const std::string& text, const json& list) {
  for (const auto& s : list) {
    if (text.find(s.get<std::string>()) != std::string::npos) return true;
  }
  return false;
}

// True when the section opens with "<intro>, <phrase of code>.".
bool section_matches_code(const std::string& section, int block, Trend code) {
  const json& bank = template_bank();
  for (const auto& intro : bank.at("block_intros").at(block)) {
    for (const auto& phrase : bank.at("trends").at(std::string(trend_name(code)))) {
      for (const auto& e : expand_levels(phrase.get<std::string>())) {
        const std::string want = intro.get<std::string>() + ", " + e + ".";
        if (section.compare(0, want.size(), want) == 0) return true;
      }
    }
  }
  return false;
}

bool has_word(const std::string& lower, const std::string& word) {
  for (std::size_t pos = lower.find(word); pos != std::string::npos; pos = lower.find(word, pos + 1)) {
    const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1]));
    const std::size_t end = pos + word.size();
    const bool right = end >= lower.size() || !std::isalnum(static_cast<unsigned char>(lower[end]));
    if (left && right) return true;
  }
  return false;
}

}  // namespace

RubricScore score_label(const SummaryLabel& label, const HourlyProfile& profile, const LabelerConfig& cfg) {
  if (label.participant_id != profile.participant_id || label.day_index != profile.day_index) {
    throw ValidationError("score_label: label for '" + label.participant_id + "' day " +
                          std::to_string(label.day_index) + " scored against profile of '" + profile.participant_id +
                          "' day " + std::to_string(profile.day_index));
  }
  const json& bank = template_bank();
  const ProfileStats st = profile_stats(profile);
  const auto& L = profile.levels;
  RubricScore r;

  // 1: peak identification.
  const int claimed = label.facts.peak_hour;
  const int lo = *std::min_element(L.begin(), L.end());
  int c1;
  if (claimed < 0 || claimed >= static_cast<int>(signal::kHoursPerDay)) {
    c1 = 1;
  } else if (claimed == st.peak) {
    c1 = 5;
  } else if (st.range > 0 && L[claimed] == lo) {
    c1 = 1;
  } else {
    int second = -1;
    for (int h = 0; h < static_cast<int>(signal::kHoursPerDay); ++h) {
      if (h != st.peak) second = std::max(second, L[h]);
    }
    if (L[claimed] == second || std::abs(claimed - st.peak) == 1) {
      c1 = 4;
    } else if (block_of_hour(claimed) == block_of_hour(st.peak)) {
      c1 = 3;
    } else {
      c1 = 2;
    }
  }
  if (st.range > cfg.narrow_range && claimed >= 0 && claimed < 24) {
    // The peak sentence must sit in the block of the claimed peak hour.
    const int want = block_of_hour(claimed);
    for (int b = 0; b < kBlockCount; ++b) {
      const bool has = contains_any(label.sections[b + 1], bank.at("peak"));
      if (has != (b == want)) c1 = std::min(c1, 2);
    }
  }
  r.categories[0] = c1;

  // 2-5: block descriptions against a fresh trend computation.
  const bool low = st.range <= cfg.narrow_range;
  for (int b = 0; b < kBlockCount; ++b) {
    const Trend truth = block_trend(block_levels(profile, b), cfg, low);
    const Trend claim = label.facts.block_trends[b];
    int c = claim == truth ? 5 : trends_adjacent(claim, truth) ? 3 : 1;
    if (!section_matches_code(label.sections[b + 1], b, claim)) c = 1;
    r.categories[b + 1] = c;
  }

  // 6: no numeric time references or speculative wording.
  std::string lower = label.text;
  for (char& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  bool banned = false;
  for (const auto& w : bank.at("denylist")) banned = banned || has_word(lower, w.get<std::string>());
  if (std::any_of(label.text.begin(), label.text.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
    r.categories[5] = 1;
  } else if (banned) {
    r.categories[5] = 2;
  } else {
    r.categories[5] = 5;
  }
  return r;
}

void write_rubric_csv(std::ostream& out, std::span<const SummaryLabel> labels, std::span<const RubricScore> scores) {
  if (labels.size() != scores.size()) throw ValidationError("write_rubric_csv: one score per label required");
  out << "participant_id,c1,c2,c3,c4,c5,c6,total\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << labels[i].participant_id;
    for (int c : scores[i].categories) out << ',' << c;
    out << ',' << scores[i].total() << '\n';
  }
}

// ---- Exemplars --------------------------------------------------------------------

std::vector<Exemplar> select_exemplars(std::span<const HourlyProfile> profiles, int k, std::uint64_t seed,
                                       const LabelerConfig& cfg, std::vector<int>* assignments) {
  std::set<std::array<int, signal::kHoursPerDay>> distinct;
  for (const auto& p : profiles) distinct.insert(p.levels);
  if (k < 1 || distinct.size() < static_cast<std::size_t>(k)) {
    throw ValidationError("select_exemplars: need at least k=" + std::to_string(k) + " distinct profiles, got " +
                          std::to_string(distinct.size()));
  }
  analysis::Rows rows;
  rows.reserve(profiles.size());
  for (const auto& p : profiles) rows.emplace_back(p.levels.begin(), p.levels.end());
  const analysis::ClusterModel model = analysis::kmeans(rows, k, seed);
  if (assignments != nullptr) *assignments = model.assignments;
  std::vector<Exemplar> out;
  for (int c = 0; c < k; ++c) {
    std::size_t best = rows.size();
    double best_d = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (model.assignments[i] != c) continue;
      const double d = analysis::squared_distance(rows[i], model.centroids[c]);
      if (best == rows.size() || d < best_d) {
        best = i;
        best_d = d;
      }
    }
    if (best == rows.size()) throw ValidationError("select_exemplars: cluster " + std::to_string(c) + " is empty");
    out.push_back({c, best, profiles[best], generate_label(profiles[best], seed, cfg)});
  }
  return out;
}

}  // namespace actilang::labeler
