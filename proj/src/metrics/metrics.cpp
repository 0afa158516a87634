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

#include "actilang/metrics/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "actilang/errors.hpp"
#include "actilang/rng.hpp"
#include "actilang/simd/kernels.hpp"

namespace actilang::metrics {

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || std::ispunct(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace {

// Stems that lost a final e when a suffix was removed.
constexpr std::string_view kRestoreE[] = {"captur", "chang",  "clos",     "concentrat", "declin", "decreas",
                                          "defin",  "describ", "increas", "mov",        "remov",  "ris",
                                          "separat", "settl",  "emerg",   "continu",    "eas",    "rang"};

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string restore_e(std::string s) {
  if (std::find(std::begin(kRestoreE), std::end(kRestoreE), s) != std::end(kRestoreE)) s.push_back('e');
  return s;
}

bool lower_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

// One rewrite step; returns false when nothing applies.
bool stem_step(std::string& w) {
  if (ends_with(w, "ing") && w.size() - 3 >= 3) {
    w = restore_e(w.substr(0, w.size() - 3));
    return true;
  }
  if (ends_with(w, "s") && !ends_with(w, "ss") && w.size() - 1 >= 3) {
    w.pop_back();
    return true;
  }
  if (ends_with(w, "ed") && w.size() - 2 >= 3) {
    w = restore_e(w.substr(0, w.size() - 2));
    return true;
  }
  return false;
}

}  // namespace

std::string stem(std::string_view token) {
  std::string w(token);
  if (!lower_ascii(w)) return w;
  // Every step shortens the word, so this terminates at a fixpoint.
  while (stem_step(w)) {
  }
  return w;
}

namespace {

Tokens maybe_stem(const Tokens& t, bool use_stem) {
  if (!use_stem) return t;
  Tokens out;
  out.reserve(t.size());
  for (const auto& w : t) out.push_back(stem(w));
  return out;
}

Prf from_counts(std::size_t hits, std::size_t n_cand, std::size_t n_ref) {
  Prf r;
  if (n_cand == 0 || hits == 0) return r;
  r.precision = static_cast<double>(hits) / static_cast<double>(n_cand);
  r.recall = static_cast<double>(hits) / static_cast<double>(n_ref);
  r.f1 = harmonic(r.precision, r.recall);
  return r;
}

void require_reference(const Tokens& reference) {
  if (reference.empty()) throw ValidationError("metric: reference text is empty");
}

}  // namespace

std::size_t unigram_overlap(const Tokens& candidate, const Tokens& reference, bool use_stem) {
  std::unordered_map<std::string, std::size_t> ref_counts;
  for (const auto& w : maybe_stem(reference, use_stem)) ++ref_counts[w];
  std::size_t hits = 0;
  for (const auto& w : maybe_stem(candidate, use_stem)) {
    auto it = ref_counts.find(w);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++hits;
    }
  }
  return hits;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Prf rouge1(const Tokens& candidate, const Tokens& reference, bool use_stem) {
  require_reference(reference);
  return from_counts(unigram_overlap(candidate, reference, use_stem), candidate.size(), reference.size());
}

Prf rougeL(const Tokens& candidate, const Tokens& reference, bool use_stem) {
  require_reference(reference);
  const std::size_t l = lcs_length(maybe_stem(candidate, use_stem), maybe_stem(reference, use_stem));
  return from_counts(l, candidate.size(), reference.size());
}

HashedEmbeddingProvider::HashedEmbeddingProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim == 0) throw ValidationError("embedding dim must be positive");
}

std::vector<std::vector<double>> HashedEmbeddingProvider::embed(const Tokens& tokens) const {
  std::vector<std::vector<double>> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    // FNV-1a over the stemmed form so inflections share a vector.
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : stem(t)) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    Rng rng(mix_seed(seed_, h));
    std::vector<double> v(dim_);
    double norm = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

SemanticScore semantic_score(const Tokens& candidate, const Tokens& reference, const EmbeddingProvider& provider) {
  if (candidate.empty() || reference.empty()) throw ValidationError("semantic score: empty input");
  const auto ec = provider.embed(candidate);
  const auto er = provider.embed(reference);
  if (ec.size() != candidate.size() || er.size() != reference.size()) {
    throw ShapeError("embedding provider returned the wrong number of vectors");
  }
  SemanticScore s;
  s.rescaled = provider.signed_cosines();
  std::vector<double> best_c(ec.size(), -2.0), best_r(er.size(), -2.0);
  for (std::size_t i = 0; i < ec.size(); ++i) {
    for (std::size_t j = 0; j < er.size(); ++j) {
      double c = std::clamp(simd::dot(ec[i], er[j]), -1.0, 1.0);
      if (s.rescaled) c = 0.5 * (1.0 + c);
      best_c[i] = std::max(best_c[i], c);
      best_r[j] = std::max(best_r[j], c);
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return std::clamp(acc / static_cast<double>(v.size()), 0.0, 1.0);
  };
  s.prf.precision = mean(best_c);
  s.prf.recall = mean(best_r);
  s.prf.f1 = harmonic(s.prf.precision, s.prf.recall);
  return s;
}

MetricReport score_pair(std::string_view candidate, std::string_view reference, const EmbeddingProvider& provider) {
  const Tokens c = tokenize(candidate), r = tokenize(reference);
  MetricReport m;
  m.rouge1 = rouge1(c, r).f1;
  m.rougeL = rougeL(c, r).f1;
  if (!c.empty()) {
    const auto s = semantic_score(c, r, provider);
    m.sem_P = s.prf.precision;
    m.sem_R = s.prf.recall;
    m.sem_F1 = s.prf.f1;
    m.sem_rescaled = s.rescaled;
  } else {
    m.sem_rescaled = provider.signed_cosines();
  }
  return m;
}

MetricReport macro_average(const std::vector<ScoredRow>& rows) {
  std::map<std::string, std::pair<MetricReport, std::size_t>> per_id;
  MetricReport out;
  for (const auto& r : rows) {
    auto& [acc, n] = per_id[r.id];
    acc.rouge1 += r.report.rouge1;
    acc.rougeL += r.report.rougeL;
    acc.sem_P += r.report.sem_P;
    acc.sem_R += r.report.sem_R;
    acc.sem_F1 += r.report.sem_F1;
    ++n;
    out.sem_rescaled = out.sem_rescaled || r.report.sem_rescaled;
  }
  if (per_id.empty()) return out;
  for (const auto& [id, entry] : per_id) {
    const auto& [acc, n] = entry;
    const double k = static_cast<double>(n);
    out.rouge1 += acc.rouge1 / k;
    out.rougeL += acc.rougeL / k;
    out.sem_P += acc.sem_P / k;
    out.sem_R += acc.sem_R / k;
    out.sem_F1 += acc.sem_F1 / k;
  }
  const double m = static_cast<double>(per_id.size());
  out.rouge1 /= m;
  out.rougeL /= m;
  out.sem_P /= m;
  out.sem_R /= m;
  out.sem_F1 /= m;
  return out;
}

BatchResult score_jsonl(std::istream& in, const EmbeddingProvider& provider) {
  BatchResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string id, cand, ref;
    try {
      const auto j = nlohmann::json::parse(line);
      id = j.at("id").get<std::string>();
      cand = j.at("candidate").get<std::string>();
      ref = j.at("reference").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    try {
      result.rows.push_back({id, score_pair(cand, ref, provider)});
    } catch (const ValidationError& e) {
      throw ValidationError("record '" + id + "' on line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  result.mean = macro_average(result.rows);
  return result;
}

BatchResult score_jsonl(const std::filesystem::path& path, const EmbeddingProvider& provider) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return score_jsonl(in, provider);
}

namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 6);
  return std::string(buf, res.ptr);
}

void write_row(std::ostream& out, const std::string& id, const MetricReport& m) {
  out << id << ',' << fmt(m.rouge1) << ',' << fmt(m.rougeL) << ',' << fmt(m.sem_P) << ',' << fmt(m.sem_R) << ','
      << fmt(m.sem_F1) << '\n';
}

}  // namespace

void write_report_csv(std::ostream& out, const BatchResult& result) {
  out << "id,rouge1,rougeL,sem_P,sem_R,sem_F1\n";
  for (const auto& r : result.rows) write_row(out, r.id, r.report);
  write_row(out, "mean", result.mean);
}

}  // namespace actilang::metrics
