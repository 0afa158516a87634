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

#include "actilang/train/train.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>

#include "actilang/errors.hpp"
#include "actilang/labeler/labeler.hpp"
#include "actilang/nn/archive.hpp"
#include "actilang/nn/ops.hpp"
#include "actilang/rng.hpp"

namespace actilang::train {

using aligner::PrefixExample;
using metrics::MetricReport;
namespace fs = std::filesystem;

std::string selection_metric_name(SelectionMetric m) { return m == SelectionMetric::kRouge1 ? "rouge1" : "sem_F1"; }

SelectionMetric parse_selection_metric(const std::string& s) {
  if (s == "sem_F1" || s == "semantic-F1") return SelectionMetric::kSemanticF1;
  if (s == "rouge1") return SelectionMetric::kRouge1;
  throw ValidationError("selection metric must be sem_F1 or rouge1, got '" + s + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be positive");
  if (batch_size < 1) throw ValidationError("batch_size must be positive");
  if (warmup_steps < 0) throw ValidationError("warmup_steps must be non-negative");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("lr must be positive");
  if (eval_every < 1) throw ValidationError("eval_every must be positive");
  if (log_every < 1) throw ValidationError("log_every must be positive");
  if (val_max_tokens < 1) throw ValidationError("val_max_tokens must be positive");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"warmup_steps", warmup_steps},
          {"lr", lr},
          {"seed", seed},
          {"eval_every", eval_every},
          {"log_every", log_every},
          {"metric", selection_metric_name(metric)},
          {"projection", projection == aligner::ProjectionKind::kLinear ? "linear" : "mlp"},
          {"max_seq_len", max_seq_len},
          {"val_max_tokens", val_max_tokens}};
}

// ---- RunLog ----------------------------------------------------------------------

namespace {

nlohmann::json report_json(const MetricReport& m) {
  return {{"rouge1", m.rouge1}, {"rougeL", m.rougeL}, {"sem_P", m.sem_P},
          {"sem_R", m.sem_R},   {"sem_F1", m.sem_F1}, {"sem_rescaled", m.sem_rescaled}};
}

MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport m;
  m.rouge1 = j.at("rouge1").get<double>();
  m.rougeL = j.at("rougeL").get<double>();
  m.sem_P = j.at("sem_P").get<double>();
  m.sem_R = j.at("sem_R").get<double>();
  m.sem_F1 = j.at("sem_F1").get<double>();
  m.sem_rescaled = j.at("sem_rescaled").get<bool>();
  return m;
}

bool same_report(const MetricReport& a, const MetricReport& b) {
  return a.rouge1 == b.rouge1 && a.rougeL == b.rougeL && a.sem_P == b.sem_P && a.sem_R == b.sem_R &&
         a.sem_F1 == b.sem_F1 && a.sem_rescaled == b.sem_rescaled;
}

// Shortest round-trip form.
std::string num(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double selected(const MetricReport& m, SelectionMetric metric) {
  return metric == SelectionMetric::kRouge1 ? m.rouge1 : m.sem_F1;
}

}  // namespace

bool operator==(const EpochRow& a, const EpochRow& b) {
  if (a.epoch != b.epoch || a.mean_loss != b.mean_loss || a.val.has_value() != b.val.has_value()) return false;
  return !a.val || same_report(*a.val, *b.val);
}

nlohmann::json RunLog::to_json() const {
  nlohmann::json steps_j = nlohmann::json::array(), epochs_j = nlohmann::json::array();
  for (const auto& s : steps) steps_j.push_back({{"step", s.step}, {"lr", s.lr}, {"loss", s.loss}});
  for (const auto& e : epochs) {
    nlohmann::json row = {{"epoch", e.epoch}, {"mean_loss", e.mean_loss}};
    if (e.val) row["val"] = report_json(*e.val);
    epochs_j.push_back(row);
  }
  return {{"steps", steps_j}, {"epochs", epochs_j}};
}

RunLog RunLog::from_json(const nlohmann::json& j) {
  RunLog log;
  try {
    for (const auto& s : j.at("steps")) {
      log.steps.push_back({s.at("step").get<std::int64_t>(), s.at("lr").get<double>(), s.at("loss").get<double>()});
    }
    for (const auto& e : j.at("epochs")) {
      EpochRow row{e.at("epoch").get<int>(), e.at("mean_loss").get<double>(), std::nullopt};
      if (e.contains("val")) row.val = report_from_json(e.at("val"));
      log.epochs.push_back(row);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("run log: ") + e.what());
  }
  return log;
}

void RunLog::write_steps_csv(std::ostream& out) const {
  out << "step,lr,loss\n";
  for (const auto& s : steps) out << s.step << ',' << num(s.lr) << ',' << num(s.loss) << '\n';
}

void RunLog::write_epochs_csv(std::ostream& out) const {
  out << "epoch,mean_loss,val_rouge1,val_rougeL,val_sem_P,val_sem_R,val_sem_F1\n";
  for (const auto& e : epochs) {
    out << e.epoch << ',' << num(e.mean_loss);
    if (e.val) {
      out << ',' << num(e.val->rouge1) << ',' << num(e.val->rougeL) << ',' << num(e.val->sem_P) << ','
          << num(e.val->sem_R) << ',' << num(e.val->sem_F1);
    } else {
      out << ",,,,,";
    }
    out << '\n';
  }
}

// ---- Training ----------------------------------------------------------------------

std::vector<PrefixExample> encode_examples(std::span<const dataset::PairRecord> pairs,
                                           const encoder::PatchEncoder& enc,
                                           const signal::NormalizationStats& stats) {
  std::vector<PrefixExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back({p.sequence.participant_id, enc.encode(signal::standardize_minutes(p.sequence, stats)), p.label.text});
  }
  return out;
}

std::uint64_t projection_seed(std::uint64_t seed) { return mix_seed(seed, 0x9A0); }

namespace {

void copy_values(const nn::ParameterList& from, const nn::ParameterList& to) {
  for (std::size_t i = 0; i < from.size(); ++i) to[i]->value = from[i]->value;
}

std::unique_ptr<aligner::Projection> clone(aligner::Projection& p) {
  auto out = std::make_unique<aligner::Projection>(p.config(), 0);
  copy_values(p.parameters(), out->parameters());
  return out;
}

constexpr const char* kBestPrefix = "best/";

void append_best(nn::Archive& a, aligner::Projection& best) {
  for (nn::Parameter* p : best.parameters()) {
    a.entries.push_back({kBestPrefix + p->name, p->value.shape(), p->frozen, p->value.vec()});
  }
}

void restore_best(const nn::Archive& a, aligner::Projection& best) {
  nn::Archive sub;
  for (const auto& e : a.entries) {
    if (e.name.rfind(kBestPrefix, 0) == 0) {
      auto copy = e;
      copy.name = e.name.substr(std::char_traits<char>::length(kBestPrefix));
      sub.entries.push_back(std::move(copy));
    }
  }
  nn::restore_parameters(sub, best.parameters());
}

std::string epoch_file(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "epoch_%03d.ckpt", epoch);
  return buf;
}

void dump_diagnostic(const fs::path& dir, int epoch, std::int64_t step, const std::vector<std::string>& ids,
                     const std::string& what) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  std::ofstream out(dir / "diagnostic.json");
  out << nlohmann::json{{"epoch", epoch}, {"step", step}, {"participants", ids}, {"error", what}}.dump(2) << '\n';
}

}  // namespace

TrainResult train_alignment(const std::vector<PrefixExample>& train, const std::vector<PrefixExample>& val,
                            aligner::Decoder& decoder, const aligner::Tokenizer& tok, const TrainConfig& config,
                            const encoder::PatchConfig& encoder_config,
                            const std::optional<fs::path>& resume_from) {
  config.validate();
  if (!decoder.frozen()) throw ValidationError("decoder checkpoint is not frozen; run pretrain-decoder first");
  if (train.empty()) throw ValidationError("train split is empty");
  if (val.empty()) throw ValidationError("validation split is empty");
  for (const auto* split : {&train, &val}) {
    for (const auto& ex : *split) {
      if (ex.prefix.rank() != 2 || ex.prefix.cols() != encoder_config.embed_dim) {
        throw ShapeError("participant '" + ex.participant_id + "': prefix width does not match the encoder");
      }
    }
  }

  auto proj = std::make_unique<aligner::Projection>(
      aligner::ProjectionConfig{encoder_config.embed_dim, decoder.config().dim, config.projection},
      projection_seed(config.seed));
  nn::Adam adam(proj->parameters(), {config.lr, 0.9, 0.999, 1e-8});
  const nn::WarmupSchedule sched{config.lr, config.warmup_steps, 0.1};

  TrainResult result;
  std::int64_t step = 0;
  int first_epoch = 1;
  bool have_best = false;
  if (resume_from) {
    const nn::Archive a = nn::load_archive(*resume_from);
    if (a.header.value("kind", "") != "alignment-checkpoint") {
      throw ValidationError(resume_from->string() + " is not an alignment epoch checkpoint");
    }
    if (a.header.at("train_config") != config.to_json()) {
      throw ValidationError("resume checkpoint was written with a different training config");
    }
    nn::restore_parameters(a, proj->parameters());
    adam.set_state(nn::read_optimizer_state(a, proj->parameters()));
    step = a.header.at("step").get<std::int64_t>();
    first_epoch = a.header.at("epoch").get<int>() + 1;
    result.log = RunLog::from_json(a.header.at("run_log"));
    have_best = a.header.at("best_epoch").get<int>() > 0;
    if (have_best) {
      result.best = clone(*proj);
      restore_best(a, *result.best);
      result.best_epoch = a.header.at("best_epoch").get<int>();
      result.best_metric = a.header.at("best_metric").get<double>();
    }
  }

  aligner::DecoderEmbeddingProvider provider(decoder, tok);
  aligner::GenerateOptions gen;
  gen.max_tokens = config.val_max_tokens;
  std::vector<std::size_t> order(train.size());
  for (int epoch = first_epoch; epoch <= config.epochs; ++epoch) {
    Rng rng(mix_seed(config.seed, 0xE90C00 + static_cast<std::uint64_t>(epoch)));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<PrefixExample> items;
      std::vector<std::string> ids;
      for (std::size_t i = start; i < end; ++i) {
        items.push_back(train[order[i]]);
        ids.push_back(train[order[i]].participant_id);
      }
      const double lr = nn::lr_at(sched, step);
      double loss_value = 0.0;
      try {
        const auto batch = aligner::assemble_prefix_batch(items, tok, config.max_seq_len);
        nn::Tape t;
        nn::Var loss = aligner::forward_loss(t, batch, decoder, *proj);
        loss_value = loss.value()[0];
        t.backward(loss);
        adam.step(lr);
        for (nn::Parameter* p : proj->parameters()) {
          if (!p->value.all_finite()) throw NumericError("projection parameter " + p->name + " became non-finite");
        }
      } catch (const NumericError& e) {
        dump_diagnostic(config.checkpoint_dir, epoch, step + 1, ids, e.what());
        throw NumericError("training aborted at epoch " + std::to_string(epoch) + ", step " + std::to_string(step + 1) +
                           ": " + e.what());
      }
      ++step;
      loss_sum += loss_value;
      ++batches;
      if (step % config.log_every == 0) result.log.steps.push_back({step, lr, loss_value});
    }
    EpochRow row{epoch, loss_sum / static_cast<double>(batches), std::nullopt};
    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      const EvalTable table = evaluate_split(val, decoder, *proj, tok, provider, gen);
      row.val = table.mean;
      const double m = selected(table.mean, config.metric);
      if (!have_best || m > result.best_metric) {
        have_best = true;
        result.best = clone(*proj);
        result.best_epoch = epoch;
        result.best_metric = m;
      }
    }
    result.log.epochs.push_back(row);

    if (!config.checkpoint_dir.empty()) {
      fs::create_directories(config.checkpoint_dir);
      nlohmann::json header = {{"kind", "alignment-checkpoint"},
                               {"config", proj->config().to_json()},
                               {"train_config", config.to_json()},
                               {"epoch", epoch},
                               {"step", step},
                               {"best_epoch", have_best ? result.best_epoch : 0},
                               {"best_metric", have_best ? result.best_metric : 0.0},
                               {"run_log", result.log.to_json()}};
      nn::Archive a = nn::make_archive(proj->parameters(), header);
      nn::append_optimizer_state(a, proj->parameters(), adam.state());
      if (have_best) append_best(a, *result.best);
      nn::save_archive(config.checkpoint_dir / epoch_file(epoch), a);
      if (have_best) {
        nn::Archive best = result.best->to_archive();
        best.header["epoch"] = result.best_epoch;
        best.header["metric"] = selection_metric_name(config.metric);
        best.header["value"] = result.best_metric;
        nn::save_archive(config.checkpoint_dir / "best.ckpt", best);
      }
    }
  }
  result.last = std::move(proj);
  if (!result.best) result.best = clone(*result.last);
  return result;
}

std::unique_ptr<aligner::Projection> load_projection(const fs::path& path) {
  const nn::Archive a = nn::load_archive(path);
  if (a.header.value("kind", "") != "alignment-checkpoint") return aligner::Projection::from_archive(a);
  auto p = std::make_unique<aligner::Projection>(aligner::ProjectionConfig::from_json(a.header.at("config")), 0);
  nn::restore_parameters(a, p->parameters());
  return p;
}

// ---- Evaluation ----------------------------------------------------------------------

namespace {

void accumulate(MetricReport& acc, const MetricReport& m, double w) {
  acc.rouge1 += w * m.rouge1;
  acc.rougeL += w * m.rougeL;
  acc.sem_P += w * m.sem_P;
  acc.sem_R += w * m.sem_R;
  acc.sem_F1 += w * m.sem_F1;
}

void finish_table(EvalTable& t) {
  // Per-participant averages first, then mean and population std across participants.
  std::map<std::string, std::pair<MetricReport, std::size_t>> per_id;
  for (const auto& r : t.rows) {
    auto& [acc, n] = per_id[r.id];
    accumulate(acc, r.report, 1.0);
    ++n;
    t.mean.sem_rescaled = t.mean.sem_rescaled || r.report.sem_rescaled;
  }
  std::vector<MetricReport> avgs;
  for (auto& [id, entry] : per_id) {
    MetricReport m;
    accumulate(m, entry.first, 1.0 / static_cast<double>(entry.second));
    avgs.push_back(m);
  }
  const double n = static_cast<double>(avgs.size());
  for (const auto& m : avgs) accumulate(t.mean, m, 1.0 / n);
  auto var = [&](auto field) {
    double s = 0.0;
    for (const auto& m : avgs) s += (m.*field - t.mean.*field) * (m.*field - t.mean.*field);
    return std::sqrt(s / n);
  };
  t.stddev.rouge1 = var(&MetricReport::rouge1);
  t.stddev.rougeL = var(&MetricReport::rougeL);
  t.stddev.sem_P = var(&MetricReport::sem_P);
  t.stddev.sem_R = var(&MetricReport::sem_R);
  t.stddev.sem_F1 = var(&MetricReport::sem_F1);
  t.stddev.sem_rescaled = t.mean.sem_rescaled;
}

}  // namespace

EvalTable score_texts(const std::vector<std::string>& ids, const std::vector<std::string>& candidates,
                      const std::vector<std::string>& references, const metrics::EmbeddingProvider& provider) {
  if (ids.empty()) throw ValidationError("cannot evaluate an empty split");
  if (candidates.size() != ids.size() || references.size() != ids.size()) {
    throw ValidationError("ids, candidates and references differ in length");
  }
  EvalTable t;
  t.provider = provider.name();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    EvalRow row{ids[i], candidates[i], references[i], false, {}};
    try {
      row.report = metrics::score_pair(candidates[i], references[i], provider);
    } catch (const ValidationError& e) {
      throw ValidationError("participant '" + ids[i] + "': " + e.what());
    }
    t.rows.push_back(std::move(row));
  }
  finish_table(t);
  return t;
}

namespace {

EvalTable generate_and_score(const std::vector<PrefixExample>& examples, const std::vector<std::size_t>& source,
                             const aligner::Decoder& decoder, const aligner::Projection& projection,
                             const aligner::Tokenizer& tok, const metrics::EmbeddingProvider& provider,
                             const aligner::GenerateOptions& opt) {
  std::vector<std::string> ids, cands, refs;
  std::vector<bool> truncated;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto g = aligner::generate(examples[source[i]].prefix, decoder, projection, tok, opt);
    ids.push_back(examples[i].participant_id);
    cands.push_back(g.text);
    refs.push_back(examples[i].label);
    truncated.push_back(g.truncated);
  }
  EvalTable t = score_texts(ids, cands, refs, provider);
  for (std::size_t i = 0; i < t.rows.size(); ++i) t.rows[i].truncated = truncated[i];
  return t;
}

}  // namespace

EvalTable evaluate_split(const std::vector<PrefixExample>& examples, const aligner::Decoder& decoder,
                         const aligner::Projection& projection, const aligner::Tokenizer& tok,
                         const metrics::EmbeddingProvider& provider, const aligner::GenerateOptions& opt) {
  if (examples.empty()) throw ValidationError("cannot evaluate an empty split");
  std::vector<std::size_t> identity(examples.size());
  std::iota(identity.begin(), identity.end(), 0);
  return generate_and_score(examples, identity, decoder, projection, tok, provider, opt);
}

std::vector<std::size_t> derangement(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ValidationError("a shuffled-prefix baseline needs at least two participants");
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  Rng rng(mix_seed(seed, 0x5A77));
  // Sattolo's algorithm: a uniformly random single cycle, so no fixed points.
  for (std::size_t i = n - 1; i > 0; --i) std::swap(p[i], p[rng.below(i)]);
  return p;
}

EvalTable shuffled_input_baseline(const std::vector<PrefixExample>& examples, const aligner::Decoder& decoder,
                                  const aligner::Projection& projection, const aligner::Tokenizer& tok,
                                  const metrics::EmbeddingProvider& provider, std::uint64_t seed,
                                  const aligner::GenerateOptions& opt) {
  return generate_and_score(examples, derangement(examples.size(), seed), decoder, projection, tok, provider, opt);
}

void write_eval_csv(std::ostream& out, const EvalTable& table) {
  out << "id,rouge1,rougeL,sem_P,sem_R,sem_F1,truncated\n";
  for (const auto& r : table.rows) {
    const auto& m = r.report;
    out << r.id << ',' << num(m.rouge1) << ',' << num(m.rougeL) << ',' << num(m.sem_P) << ',' << num(m.sem_R) << ','
        << num(m.sem_F1) << ',' << (r.truncated ? 1 : 0) << '\n';
  }
}

nlohmann::json eval_summary_json(const EvalTable& table) {
  nlohmann::json metrics_j = nlohmann::json::object();
  const MetricReport& m = table.mean;
  const MetricReport& s = table.stddev;
  metrics_j["rouge1"] = {{"mean", m.rouge1}, {"std", s.rouge1}};
  metrics_j["rougeL"] = {{"mean", m.rougeL}, {"std", s.rougeL}};
  metrics_j["sem_P"] = {{"mean", m.sem_P}, {"std", s.sem_P}};
  metrics_j["sem_R"] = {{"mean", m.sem_R}, {"std", s.sem_R}};
  metrics_j["sem_F1"] = {{"mean", m.sem_F1}, {"std", s.sem_F1}};
  std::size_t truncated = 0;
  for (const auto& r : table.rows) truncated += r.truncated ? 1 : 0;
  return {{"n", table.rows.size()},
          {"provider", table.provider},
          {"sem_rescaled", m.sem_rescaled},
          {"truncated", truncated},
          {"metrics", metrics_j}};
}

// ---- LM corpus -------------------------------------------------------------------------

std::vector<aligner::LmExample> build_lm_corpus(std::span<const dataset::PairRecord> train_pairs,
                                                const signal::NormalizationStats& stats,
                                                const aligner::Tokenizer& tok, const LmCorpusOptions& opt) {
  std::vector<aligner::LmExample> out;
  for (const auto& p : train_pairs) {
    out.push_back({aligner::context_level_ids(p.sequence, stats, tok), p.label.text});
  }
  if (opt.aux_days > 0) {
    const auto aux = signal::synthesize_cohort(opt.aux_days, opt.aux_seed, {1, 1, 1, 1, 1});
    for (const auto& day : aux.sequences) {
      const auto profile = signal::bin_hourly(day, stats);
      out.push_back({aligner::context_level_ids(day, stats, tok), labeler::generate_label(profile, opt.label_seed, {}).text});
    }
  }
  return out;
}

}  // namespace actilang::train
