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

#include "actilang/signal/dataset.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "actilang/errors.hpp"

namespace actilang::dataset {

using nlohmann::json;

json to_json(const PairRecord& r) {
  json j;
  j["sequence"] = {{"participant_id", r.sequence.participant_id},
                   {"day_index", r.sequence.day_index},
                   {"minutes", r.sequence.minutes}};
  j["profile"] = {{"participant_id", r.profile.participant_id},
                  {"day_index", r.profile.day_index},
                  {"levels", r.profile.levels}};
  j["label"] = labeler::to_json(r.label);
  j["split"] = std::string(signal::split_name(r.split));
  j["cluster_id"] = r.cluster_id ? json(*r.cluster_id) : json(nullptr);
  return j;
}

PairRecord pair_from_json(const json& j) {
  try {
    PairRecord r;
    const json& s = j.at("sequence");
    r.sequence.participant_id = s.at("participant_id").get<std::string>();
    r.sequence.day_index = s.at("day_index").get<int>();
    r.sequence.minutes = s.at("minutes").get<std::vector<double>>();
    r.sequence.validate();
    const json& p = j.at("profile");
    r.profile.participant_id = p.at("participant_id").get<std::string>();
    r.profile.day_index = p.at("day_index").get<int>();
    const auto levels = p.at("levels").get<std::vector<int>>();
    if (levels.size() != signal::kHoursPerDay) throw ValidationError("profile needs 24 levels");
    for (std::size_t h = 0; h < levels.size(); ++h) {
      if (levels[h] < 0 || levels[h] > signal::kMaxLevel) throw ValidationError("profile level outside [0, 1000]");
      r.profile.levels[h] = levels[h];
    }
    r.label = labeler::label_from_json(j.at("label"));
    r.split = signal::parse_split(j.at("split").get<std::string>());
    if (!j.at("cluster_id").is_null()) r.cluster_id = j.at("cluster_id").get<int>();
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed pair record: ") + e.what());
  }
}

void write_pairs_jsonl(std::ostream& out, std::span<const PairRecord> pairs) {
  for (const auto& r : pairs) out << to_json(r).dump() << '\n';
}

void write_pairs_jsonl(const std::filesystem::path& path, std::span<const PairRecord> pairs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_pairs_jsonl(out, pairs);
}

std::vector<PairRecord> read_pairs_jsonl(std::istream& in) {
  std::vector<PairRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(pair_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

std::vector<PairRecord> read_pairs_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return read_pairs_jsonl(in);
}

json norm_stats_to_json(const signal::NormalizationStats& s) {
  return json{{"schema_version", signal::NormalizationStats::kSchemaVersion},
              {"global_min", s.global_min},
              {"global_max", s.global_max},
              {"minute_mean", s.minute_mean},
              {"minute_std", s.minute_std}};
}

signal::NormalizationStats norm_stats_from_json(const json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != signal::NormalizationStats::kSchemaVersion) {
      throw ValidationError("normalization stats schema_version " + std::to_string(version) + " is not supported");
    }
    signal::NormalizationStats s;
    s.global_min = j.at("global_min").get<double>();
    s.global_max = j.at("global_max").get<double>();
    s.minute_mean = j.at("minute_mean").get<double>();
    s.minute_std = j.at("minute_std").get<double>();
    if (!(s.global_min <= s.global_max) || !std::isfinite(s.global_max) || !(s.minute_std > 0.0)) {
      throw ValidationError("normalization stats are inconsistent");
    }
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed normalization stats: ") + e.what());
  }
}

void split_dataset(std::span<PairRecord> pairs, const signal::SplitFractions& fractions, std::uint64_t seed) {
  const auto tags = signal::assign_splits(pairs.size(), fractions, seed);
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i].split = tags[i];
}

BuiltDataset build_dataset(std::span<const signal::DaySequence> sequences, const BuildOptions& opt) {
  BuiltDataset out;
  out.stats = signal::compute_norm_stats(sequences);
  std::vector<signal::HourlyProfile> profiles;
  profiles.reserve(sequences.size());
  for (const auto& seq : sequences) {
    bool degenerate = false;
    profiles.push_back(signal::bin_hourly(seq, out.stats, &degenerate));
    out.degenerate_range = out.degenerate_range || degenerate;
  }
  out.pairs.reserve(sequences.size());
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    out.pairs.push_back({sequences[i], profiles[i], labeler::generate_label(profiles[i], opt.label_seed, opt.labeler),
                         signal::Split::kTrain, std::nullopt});
  }
  split_dataset(out.pairs, opt.fractions, opt.split_seed);
  std::vector<int> assignments;
  out.exemplars = labeler::select_exemplars(profiles, opt.exemplar_k, opt.cluster_seed, opt.labeler, &assignments);
  for (std::size_t i = 0; i < out.pairs.size(); ++i) out.pairs[i].cluster_id = assignments[i];
  return out;
}

void verify_profiles(std::span<const PairRecord> pairs, const signal::NormalizationStats& stats) {
  for (const auto& r : pairs) {
    if (signal::bin_hourly(r.sequence, stats) != r.profile) {
      throw ValidationError("participant '" + r.sequence.participant_id + "' day " +
                            std::to_string(r.sequence.day_index) + ": stored profile does not match its sequence");
    }
  }
}

std::vector<PairRecord> select_split(std::span<const PairRecord> pairs, signal::Split split) {
  std::vector<PairRecord> out;
  for (const auto& r : pairs) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

}  // namespace actilang::dataset
