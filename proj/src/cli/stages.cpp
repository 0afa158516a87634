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
#include <fstream>
#include <sstream>

#include "actilang/analysis/analysis.hpp"
#include "actilang/errors.hpp"
#include "actilang/labeler/labeler.hpp"
#include "actilang/metrics/metrics.hpp"
#include "actilang/nn/archive.hpp"
#include "actilang/rng.hpp"
#include "actilang/train/train.hpp"
#include "context.hpp"

namespace actilang::cli {

namespace {

signal::Split parse_split_key(const Config& cfg, const std::string& key) { return signal::parse_split(cfg.str(key)); }

labeler::LabelerConfig labeler_config(const Config& cfg) {
  labeler::LabelerConfig c;
  c.narrow_range = static_cast<int>(cfg.integer("narrow_range"));
  c.misuse_zero_count = static_cast<int>(cfg.integer("misuse_zero_count"));
  return c;
}

aligner::GenerateOptions generate_options(const Config& cfg, std::uint64_t seed) {
  aligner::GenerateOptions g;
  g.max_tokens = cfg.count("max_tokens");
  const std::string mode = cfg.str("decode");
  if (mode == "greedy") {
    g.mode = aligner::DecodeMode::kGreedy;
  } else if (mode == "topk") {
    g.mode = aligner::DecodeMode::kTopK;
  } else {
    throw ValidationError("decode must be 'greedy' or 'topk'");
  }
  g.top_k = cfg.count("top_k");
  g.seed = seed;
  return g;
}

std::unique_ptr<metrics::EmbeddingProvider> make_provider(Context& ctx, const std::string& by,
                                                          DecoderArtifacts* dec) {
  const std::string kind = ctx.config().str("embedding");
  if (kind == "hashed") return std::make_unique<metrics::HashedEmbeddingProvider>();
  if (kind != "decoder") throw ValidationError("embedding must be 'decoder' or 'hashed'");
  if (!dec->decoder) *dec = load_decoder(ctx, by);
  return std::make_unique<aligner::DecoderEmbeddingProvider>(*dec->decoder, *dec->tok);
}

void write_table(const fs::path& dir, const std::string& stem, const train::EvalTable& t) {
  std::ostringstream csv;
  train::write_eval_csv(csv, t);
  write_text(dir / (stem + ".csv"), csv.str());
  std::ostringstream jl;
  for (const auto& r : t.rows) {
    const nlohmann::json j = {{"id", r.id},
                              {"candidate", r.candidate},
                              {"reference", r.reference},
                              {"truncated", r.truncated},
                              {"rouge1", r.report.rouge1},
                              {"rougeL", r.report.rougeL},
                              {"sem_P", r.report.sem_P},
                              {"sem_R", r.report.sem_R},
                              {"sem_F1", r.report.sem_F1}};
    jl << j.dump() << '\n';
  }
  write_text(dir / (stem + ".jsonl"), jl.str());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

// ---- synth / ingest / build-dataset ---------------------------------------------------

void cmd_synth(Context& ctx) {
  const Config& cfg = ctx.config();
  const auto w = cfg.reals("archetype_mix");
  if (w.size() != signal::kArchetypeCount) throw ValidationError("archetype_mix needs 5 weights");
  std::array<double, signal::kArchetypeCount> mix{};
  std::copy(w.begin(), w.end(), mix.begin());
  const std::uint64_t seed = cfg.u64("seed");
  const auto cohort = signal::synthesize_cohort(cfg.count("n_participants"), seed, mix);

  StageRun run(ctx, "synth");
  run.seed("cohort", seed);
  signal::write_csv(run.dir() / "cohort.csv", cohort.sequences, signal::CsvFormat::kWide);
  std::ostringstream arch;
  arch << "participant_id,archetype\n";
  for (std::size_t i = 0; i < cohort.sequences.size(); ++i) {
    arch << cohort.sequences[i].participant_id << ',' << signal::archetype_name(cohort.archetypes[i]) << '\n';
  }
  write_text(run.dir() / "archetypes.csv", arch.str());
  run.commit();
}

void cmd_ingest(Context& ctx) {
  const fs::path input = *ctx.options().input;
  const auto seqs = signal::ingest_csv(input);
  if (seqs.empty()) throw ValidationError(input.string() + " holds no participant-days");
  StageRun run(ctx, "ingest");
  run.input("source-file", sha256_file(input));
  run.provenance()["input"] = fs::absolute(input).string();
  signal::write_csv(run.dir() / "cohort.csv", seqs, signal::CsvFormat::kWide);
  run.commit();
}

void cmd_build_dataset(Context& ctx) {
  const Config& cfg = ctx.config();
  std::string source = cfg.str("source");
  if (source == "auto") source = ctx.has_stage("ingest") ? "ingest" : "synth";
  if (source != "synth" && source != "ingest") throw ValidationError("source must be auto, synth or ingest");
  const fs::path src = ctx.require(source, "build-dataset");
  const auto seqs = signal::ingest_csv(src / "cohort.csv");

  dataset::BuildOptions bo;
  bo.label_seed = ctx.seed(streams::kLabel);
  bo.split_seed = ctx.seed(streams::kSplit);
  bo.cluster_seed = ctx.seed(streams::kExemplar);
  bo.exemplar_k = static_cast<int>(cfg.integer("exemplar_k"));
  bo.fractions = {cfg.real("split_train"), cfg.real("split_val"), cfg.real("split_test")};
  bo.labeler = labeler_config(cfg);
  const auto ds = dataset::build_dataset(seqs, bo);
  if (ds.degenerate_range) ctx.out() << "warning: every hourly mean is equal; all levels are 0\n";

  StageRun run(ctx, "build-dataset");
  run.seed("label", bo.label_seed);
  run.seed("split", bo.split_seed);
  run.seed("exemplar", bo.cluster_seed);
  dataset::write_pairs_jsonl(run.dir() / "pairs.jsonl", ds.pairs);
  write_json(run.dir() / "norm_stats.json", dataset::norm_stats_to_json(ds.stats));

  std::ostringstream ex;
  for (const auto& e : ds.exemplars) {
    const nlohmann::json j = {{"cluster", e.cluster},
                              {"index", e.index},
                              {"participant_id", e.profile.participant_id},
                              {"day_index", e.profile.day_index},
                              {"levels", e.profile.levels},
                              {"label", labeler::to_json(e.label)}};
    ex << j.dump() << '\n';
  }
  write_text(run.dir() / "exemplars.jsonl", ex.str());

  std::vector<labeler::SummaryLabel> labels;
  std::vector<labeler::RubricScore> scores;
  double rubric_sum = 0.0;
  int rubric_min = 30;
  for (const auto& p : ds.pairs) {
    labels.push_back(p.label);
    scores.push_back(labeler::score_label(p.label, p.profile, bo.labeler));
    rubric_sum += scores.back().total();
    rubric_min = std::min(rubric_min, scores.back().total());
  }
  std::ostringstream rubric;
  labeler::write_rubric_csv(rubric, labels, scores);
  write_text(run.dir() / "rubric.csv", rubric.str());

  nlohmann::json counts = nlohmann::json::object();
  for (auto s : {signal::Split::kTrain, signal::Split::kVal, signal::Split::kTest}) {
    counts[std::string(signal::split_name(s))] = dataset::select_split(ds.pairs, s).size();
  }
  write_json(run.dir() / "summary.json", {{"records", ds.pairs.size()},
                                          {"splits", counts},
                                          {"exemplars", ds.exemplars.size()},
                                          {"degenerate_range", ds.degenerate_range},
                                          {"rubric_mean", rubric_sum / static_cast<double>(ds.pairs.size())},
                                          {"rubric_min", rubric_min}});
  run.commit();
}

// ---- Pretraining ---------------------------------------------------------------------

void cmd_pretrain_encoder(Context& ctx) {
  const Config& cfg = ctx.config();
  const auto ds = load_dataset(ctx, "pretrain-encoder");
  std::vector<std::vector<double>> cohort;
  for (const auto& p : ds.split(signal::Split::kTrain)) cohort.push_back(signal::standardize_minutes(p.sequence, ds.stats));

  const std::string scale = cfg.str("encoder_scale");
  encoder::PatchConfig pc;
  if (scale == "desk") {
    pc = encoder::PatchConfig::desk();
  } else if (scale == "paper") {
    pc = encoder::PatchConfig::paper();
  } else {
    throw ValidationError("encoder_scale must be 'desk' or 'paper'");
  }
  encoder::PatchEncoder enc(pc, ctx.seed(streams::kEncoderInit));
  encoder::MaeOptions mo;
  mo.mask_ratio = cfg.real("mae_mask_ratio");
  mo.epochs = static_cast<int>(cfg.integer("mae_epochs"));
  mo.batch_size = cfg.count("mae_batch_size");
  mo.seed = ctx.seed(streams::kMae);
  mo.adam.lr = cfg.real("mae_lr");
  mo.warmup_steps = cfg.integer("mae_warmup_steps");
  const auto report = encoder::pretrain_mae(enc, cohort, mo);

  StageRun run(ctx, "pretrain-encoder");
  run.seed("init", ctx.seed(streams::kEncoderInit));
  run.seed("mae", mo.seed);
  nn::save_archive(run.dir() / "encoder.ckpt", enc.to_archive());
  std::ostringstream csv;
  csv << "epoch,loss\n";
  for (std::size_t i = 0; i < report.epoch_loss.size(); ++i) csv << i + 1 << ',' << num(report.epoch_loss[i]) << '\n';
  write_text(run.dir() / "mae_loss.csv", csv.str());
  ctx.out() << "mae loss " << num(report.epoch_loss.front()) << " -> " << num(report.epoch_loss.back()) << '\n';
  run.commit();
}

void cmd_pretrain_decoder(Context& ctx) {
  const Config& cfg = ctx.config();
  const auto ds = load_dataset(ctx, "pretrain-decoder");
  const auto tok = aligner::Tokenizer::from_templates();

  aligner::DecoderConfig dc;
  const std::string scale = cfg.str("decoder_scale");
  if (scale == "paper") {
    dc = aligner::DecoderConfig::paper(tok.size());
  } else if (scale == "desk") {
    dc = aligner::DecoderConfig::desk(tok.size());
    dc.dim = cfg.count("decoder_dim");
    dc.n_layers = cfg.count("decoder_layers");
    dc.n_heads = cfg.count("decoder_heads");
    dc.mlp_hidden = cfg.count("decoder_mlp");
    dc.max_seq_len = cfg.count("max_seq_len");
  } else {
    throw ValidationError("decoder_scale must be 'desk' or 'paper'");
  }
  dc.validate();

  train::LmCorpusOptions co;
  co.aux_days = cfg.count("lm_aux_days");
  co.aux_seed = ctx.seed(streams::kLmAux);
  co.label_seed = ctx.seed(streams::kLmLabel);
  const auto corpus = train::build_lm_corpus(ds.split(signal::Split::kTrain), ds.stats, tok, co);

  aligner::LmOptions lo;
  const std::string context = cfg.str("lm_context");
  if (context == "levels") {
    lo.context = aligner::LmContext::kLevels;
  } else if (context == "none") {
    lo.context = aligner::LmContext::kNone;
  } else {
    throw ValidationError("lm_context must be 'levels' or 'none'");
  }
  lo.epochs = static_cast<int>(cfg.integer("lm_epochs"));
  lo.batch_size = cfg.count("lm_batch_size");
  lo.seed = ctx.seed(streams::kLm);
  lo.adam.lr = cfg.real("lm_lr");
  lo.warmup_steps = cfg.integer("lm_warmup_steps");
  lo.jitter = cfg.real("lm_jitter");

  aligner::Decoder dec(dc, ctx.seed(streams::kDecoderInit));
  const auto report = aligner::pretrain_decoder_lm(dec, tok, corpus, lo);

  StageRun run(ctx, "pretrain-decoder");
  run.seed("init", ctx.seed(streams::kDecoderInit));
  run.seed("lm", lo.seed);
  run.seed("aux_cohort", co.aux_seed);
  run.seed("aux_labels", co.label_seed);
  nn::save_archive(run.dir() / "decoder.ckpt", dec.to_archive());
  write_json(run.dir() / "tokenizer.json", tok.to_json());
  std::ostringstream csv;
  csv << "epoch,loss\n";
  for (std::size_t i = 0; i < report.epoch_loss.size(); ++i) csv << i + 1 << ',' << num(report.epoch_loss[i]) << '\n';
  write_text(run.dir() / "lm_loss.csv", csv.str());
  const auto& probe = corpus.front();
  const auto g = aligner::generate_from_context(lo.context == aligner::LmContext::kLevels ? probe.context
                                                                                         : std::vector<int>{},
                                                dec, tok, cfg.count("max_tokens"));
  write_json(run.dir() / "sample.json", {{"reference", probe.label}, {"generated", g.text}, {"truncated", g.truncated}});
  ctx.out() << "lm loss " << num(report.epoch_loss.front()) << " -> " << num(report.epoch_loss.back()) << '\n';
  run.commit();
}

// ---- Alignment ----------------------------------------------------------------------------

void cmd_train(Context& ctx) {
  const Config& cfg = ctx.config();
  const auto ds = load_dataset(ctx, "train");
  const auto enc = load_encoder(ctx, "train");
  auto dec = load_decoder(ctx, "train");

  train::TrainConfig tc;
  tc.epochs = static_cast<int>(cfg.integer("epochs"));
  tc.batch_size = cfg.count("batch_size");
  tc.warmup_steps = cfg.integer("warmup_steps");
  tc.lr = cfg.real("lr");
  tc.seed = ctx.seed(streams::kTrain);
  tc.eval_every = static_cast<int>(cfg.integer("eval_every"));
  tc.log_every = static_cast<int>(cfg.integer("log_every"));
  tc.metric = train::parse_selection_metric(cfg.str("metric"));
  const std::string proj = cfg.str("projection");
  if (proj == "linear") {
    tc.projection = aligner::ProjectionKind::kLinear;
  } else if (proj == "mlp") {
    tc.projection = aligner::ProjectionKind::kMlp;
  } else {
    throw ValidationError("projection must be 'linear' or 'mlp'");
  }
  tc.max_seq_len = dec.decoder->config().max_seq_len;
  tc.val_max_tokens = cfg.count("val_max_tokens");

  const auto tr = train::encode_examples(ds.split(signal::Split::kTrain), *enc, ds.stats);
  const auto va = train::encode_examples(ds.split(signal::Split::kVal), *enc, ds.stats);

  std::optional<fs::path> resume;
  if (ctx.options().resume) {
    // Read before the stage directory is replaced.
    resume = fs::absolute(*ctx.options().resume);
    if (!fs::exists(*resume)) throw ValidationError("resume checkpoint " + resume->string() + " does not exist");
  }
  StageRun run(ctx, "train");
  run.seed("train", tc.seed);
  if (resume) {
    run.provenance()["resumed_from"] = resume->string();
    run.input("resume-checkpoint", sha256_file(*resume));
  }
  tc.checkpoint_dir = run.dir();
  const auto result = train::train_alignment(tr, va, *dec.decoder, *dec.tok, tc, enc->config(), resume);

  nn::save_archive(run.dir() / "last.ckpt", result.last->to_archive());
  std::ostringstream steps, epochs;
  result.log.write_steps_csv(steps);
  result.log.write_epochs_csv(epochs);
  write_text(run.dir() / "steps.csv", steps.str());
  write_text(run.dir() / "epochs.csv", epochs.str());
  const double first = result.log.epochs.front().mean_loss;
  const double last = result.log.epochs.back().mean_loss;
  write_json(run.dir() / "summary.json", {{"epochs", tc.epochs},
                                          {"first_epoch_loss", first},
                                          {"last_epoch_loss", last},
                                          {"loss_ratio", last / first},
                                          {"best_epoch", result.best_epoch},
                                          {"selection_metric", train::selection_metric_name(tc.metric)},
                                          {"best_metric", result.best_metric},
                                          {"train_config", tc.to_json()}});
  ctx.out() << "loss " << num(first) << " -> " << num(last) << ", best epoch " << result.best_epoch << '\n';
  run.commit();
}

void cmd_generate(Context& ctx) {
  const Config& cfg = ctx.config();
  const auto ds = load_dataset(ctx, "generate");
  const auto enc = load_encoder(ctx, "generate");
  auto dec = load_decoder(ctx, "generate");
  const auto proj = load_trained_projection(ctx, "generate");

  std::vector<signal::DaySequence> days;
  if (ctx.options().input) {
    days = signal::ingest_csv(*ctx.options().input);
  } else {
    for (const auto& p : ds.split(parse_split_key(cfg, "split"))) days.push_back(p.sequence);
  }
  StageRun run(ctx, "generate");
  if (ctx.options().input) {
    run.input("source-file", sha256_file(*ctx.options().input));
    run.provenance()["input"] = fs::absolute(*ctx.options().input).string();
  }
  const std::uint64_t seed = ctx.seed(streams::kGenerate);
  run.seed("generate", seed);
  std::ostringstream out;
  for (std::size_t i = 0; i < days.size(); ++i) {
    days[i].validate();
    const auto prefix = enc->encode(signal::standardize_minutes(days[i], ds.stats));
    const auto g = aligner::generate(prefix, *dec.decoder, *proj, *dec.tok, generate_options(cfg, mix_seed(seed, i)));
    out << nlohmann::json{{"participant_id", days[i].participant_id}, {"text", g.text}, {"truncated", g.truncated}}.dump()
        << '\n';
  }
  write_text(run.dir() / "generations.jsonl", out.str());
  run.commit();
}

// ---- Evaluation -----------------------------------------------------------------------------

void cmd_eval(Context& ctx) {
  const Config& cfg = ctx.config();
  DecoderArtifacts dec;

  if (ctx.options().input) {
    const fs::path input = *ctx.options().input;
    std::vector<std::string> ids, cands, refs;
    std::size_t line = 0;
    for (const auto& j : read_jsonl(input)) {
      ++line;
      if (!j.contains("id") || !j.contains("candidate") || !j.contains("reference")) {
        throw ParseError(line, input.filename().string() + ": needs id, candidate and reference");
      }
      ids.push_back(j.at("id").get<std::string>());
      cands.push_back(j.at("candidate").get<std::string>());
      refs.push_back(j.at("reference").get<std::string>());
    }
    const auto provider = make_provider(ctx, "eval", &dec);
    const auto table = train::score_texts(ids, cands, refs, *provider);
    StageRun run(ctx, "eval");
    run.input("source-file", sha256_file(input));
    run.provenance()["input"] = fs::absolute(input).string();
    write_table(run.dir(), "metrics", table);
    write_json(run.dir() / "summary.json", {{"mode", "input"}, {"input", train::eval_summary_json(table)}});
    run.commit();
    return;
  }

  const auto ds = load_dataset(ctx, "eval");
  if (ctx.options().references_only) {
    const auto split = parse_split_key(cfg, "split");
    std::vector<std::string> ids, refs;
    for (const auto& p : ds.split(split)) {
      ids.push_back(p.sequence.participant_id);
      refs.push_back(p.label.text);
    }
    const auto provider = make_provider(ctx, "eval", &dec);
    const auto table = train::score_texts(ids, refs, refs, *provider);
    StageRun run(ctx, "eval");
    write_table(run.dir(), "metrics", table);
    write_json(run.dir() / "summary.json",
               {{"mode", "references"}, {"split", cfg.str("split")}, {"references", train::eval_summary_json(table)}});
    run.commit();
    return;
  }

  const auto enc = load_encoder(ctx, "eval");
  dec = load_decoder(ctx, "eval");
  ctx.require("train", "eval");
  const auto provider = make_provider(ctx, "eval", &dec);
  const int trained = static_cast<int>(read_json(ctx.stage_dir("train") / "summary.json").at("epochs").get<int>());
  std::vector<int> epochs;
  for (int e : cfg.integers("eval_epochs")) {
    if (e >= 1 && e <= trained && std::find(epochs.begin(), epochs.end(), e) == epochs.end()) epochs.push_back(e);
  }
  if (epochs.empty()) epochs.push_back(trained);
  const std::uint64_t seed = ctx.seed(streams::kGenerate);
  const auto gen = generate_options(cfg, seed);

  std::vector<std::pair<signal::Split, std::vector<aligner::PrefixExample>>> splits;
  for (auto s : {signal::Split::kVal, signal::Split::kTest}) {
    splits.emplace_back(s, train::encode_examples(ds.split(s), *enc, ds.stats));
  }
  const bool with_subset = ctx.has_stage("cluster");
  std::vector<aligner::PrefixExample> subset;
  if (with_subset) subset = train::encode_examples(subset_pairs(ds, load_subset(ctx, "eval")), *enc, ds.stats);

  StageRun run(ctx, "eval");
  run.seed("generate", seed);
  nlohmann::json summary = {{"mode", "checkpoints"}, {"epochs", epochs}, {"checkpoints", nlohmann::json::array()}};
  for (int e : epochs) {
    const auto proj = load_trained_projection(ctx, "eval", e);
    for (const auto& [split, examples] : splits) {
      const auto table = train::evaluate_split(examples, *dec.decoder, *proj, *dec.tok, *provider, gen);
      char stem[64];
      std::snprintf(stem, sizeof(stem), "%s_epoch_%03d", std::string(signal::split_name(split)).c_str(), e);
      write_table(run.dir(), stem, table);
      summary["checkpoints"].push_back(
          {{"split", signal::split_name(split)}, {"epoch", e}, {"file", std::string(stem) + ".csv"},
           {"summary", train::eval_summary_json(table)}});
    }
  }
  if (with_subset) {
    const auto proj = load_trained_projection(ctx, "eval");
    const auto table = train::evaluate_split(subset, *dec.decoder, *proj, *dec.tok, *provider, gen);
    write_table(run.dir(), "subset", table);
    summary["subset"] = {{"checkpoint", cfg.str("checkpoint")}, {"summary", train::eval_summary_json(table)}};
  }
  write_json(run.dir() / "summary.json", summary);
  run.commit();
}

void cmd_baseline(Context& ctx) {
  const Config& cfg = ctx.config();
  const auto ds = load_dataset(ctx, "baseline");
  const auto enc = load_encoder(ctx, "baseline");
  auto dec = load_decoder(ctx, "baseline");
  const auto trained = load_trained_projection(ctx, "baseline");

  const std::string set = cfg.str("baseline_split");
  std::vector<dataset::PairRecord> pairs;
  if (set == "subset") {
    pairs = subset_pairs(ds, load_subset(ctx, "baseline"));
  } else {
    pairs = ds.split(signal::parse_split(set));
  }
  const auto examples = train::encode_examples(pairs, *enc, ds.stats);
  // Same initialisation the training run started from.
  const auto tc = read_json(ctx.stage_dir("train") / "summary.json").at("train_config");
  const std::uint64_t train_seed = tc.at("seed").get<std::uint64_t>();
  aligner::Projection untrained(trained->config(), train::projection_seed(train_seed));
  const auto provider = make_provider(ctx, "baseline", &dec);
  const std::uint64_t gen_seed = ctx.seed(streams::kGenerate);
  const std::uint64_t perm_seed = ctx.seed(streams::kBaseline);
  const auto gen = generate_options(cfg, gen_seed);

  StageRun run(ctx, "baseline");
  run.seed("generate", gen_seed);
  run.seed("derangement", perm_seed);
  nlohmann::json conditions = nlohmann::json::object();
  std::map<std::string, double> rouge;
  const std::pair<const char*, const aligner::Projection*> projs[] = {{"trained", trained.get()},
                                                                       {"untrained", &untrained}};
  for (const auto& [name, p] : projs) {
    const auto matched = train::evaluate_split(examples, *dec.decoder, *p, *dec.tok, *provider, gen);
    const auto shuffled =
        train::shuffled_input_baseline(examples, *dec.decoder, *p, *dec.tok, *provider, perm_seed, gen);
    const std::string n = name;
    write_table(run.dir(), n + "_matched", matched);
    write_table(run.dir(), n + "_shuffled", shuffled);
    conditions[n + "_matched"] = train::eval_summary_json(matched);
    conditions[n + "_shuffled"] = train::eval_summary_json(shuffled);
    rouge[n] = matched.mean.rouge1 - shuffled.mean.rouge1;
  }
  write_json(run.dir() / "summary.json", {{"set", set},
                                          {"n", examples.size()},
                                          {"checkpoint", cfg.str("checkpoint")},
                                          {"conditions", conditions},
                                          {"rouge1_gap", {{"trained", rouge["trained"]}, {"untrained", rouge["untrained"]}}}});
  ctx.out() << "rouge1 matched-minus-shuffled gap: trained " << num(rouge["trained"]) << ", untrained "
            << num(rouge["untrained"]) << '\n';
  run.commit();
}

// ---- Analysis --------------------------------------------------------------------------------

void cmd_cluster(Context& ctx) {
  const Config& cfg = ctx.config();
  const auto ds = load_dataset(ctx, "cluster");
  analysis::Rows points;
  for (const auto& p : ds.pairs) points.emplace_back(p.profile.levels.begin(), p.profile.levels.end());
  const int k = static_cast<int>(cfg.integer("k"));
  analysis::KMeansOptions ko;
  ko.max_iter = static_cast<int>(cfg.integer("kmeans_max_iter"));
  ko.n_init = static_cast<int>(cfg.integer("kmeans_n_init"));
  const std::uint64_t kseed = ctx.seed(streams::kKMeans);
  const auto model = analysis::kmeans(points, k, kseed, ko);
  const std::uint64_t sseed = ctx.seed(streams::kSubset);
  std::vector<std::size_t> subset;
  try {
    subset = analysis::sample_cluster_subset(model, cfg.count("per_cluster"), sseed);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(e.what()) + "; lower --per-cluster or use a larger cohort");
  }

  StageRun run(ctx, "cluster");
  run.seed("kmeans", kseed);
  run.seed("subset", sseed);
  std::ostringstream a, c, tr, s, prof;
  a << "participant_id,day_index,split,cluster\n";
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
    a << csv_field(ds.pairs[i].sequence.participant_id) << ',' << ds.pairs[i].sequence.day_index << ','
      << signal::split_name(ds.pairs[i].split) << ',' << model.assignments[i] << '\n';
  }
  c << "cluster";
  for (std::size_t h = 0; h < signal::kHoursPerDay; ++h) c << ",h" << h;
  c << '\n';
  for (int j = 0; j < k; ++j) {
    c << j;
    for (double v : model.centroids[j]) c << ',' << num(v);
    c << '\n';
  }
  tr << "iteration,inertia\n";
  for (std::size_t i = 0; i < model.inertia_trace.size(); ++i) tr << i + 1 << ',' << num(model.inertia_trace[i]) << '\n';
  s << "participant_id,day_index,cluster\n";
  for (std::size_t i : subset) {
    s << csv_field(ds.pairs[i].sequence.participant_id) << ',' << ds.pairs[i].sequence.day_index << ','
      << model.assignments[i] << '\n';
  }
  prof << "hour";
  for (int j = 0; j < k; ++j) prof << ",cluster_" << j + 1;
  prof << '\n';
  for (std::size_t h = 0; h < signal::kHoursPerDay; ++h) {
    prof << h;
    for (int j = 0; j < k; ++j) prof << ',' << num(model.centroids[j][h]);
    prof << '\n';
  }
  write_text(run.dir() / "assignments.csv", a.str());
  write_text(run.dir() / "centroids.csv", c.str());
  write_text(run.dir() / "inertia.csv", tr.str());
  write_text(run.dir() / "subset.csv", s.str());
  write_text(run.dir() / "cluster_profiles.csv", prof.str());
  std::vector<analysis::Series> series;
  for (int j = 0; j < k; ++j) series.push_back({"Cluster " + std::to_string(j + 1), model.centroids[j], j});
  std::ostringstream svg;
  analysis::write_line_svg(svg, series, "Cluster centroid profiles", "hour", "level");
  write_text(run.dir() / "cluster_profiles.svg", svg.str());

  std::vector<std::size_t> counts(k, 0);
  for (int a_ : model.assignments) ++counts[a_];
  write_json(run.dir() / "summary.json", {{"k", k},
                                          {"counts", counts},
                                          {"inertia", model.inertia},
                                          {"iterations", model.iterations},
                                          {"subset_size", subset.size()},
                                          {"per_cluster", cfg.count("per_cluster")}});
  run.commit();
}

void cmd_pca(Context& ctx) {
  const auto ds = load_dataset(ctx, "pca");
  const auto enc = load_encoder(ctx, "pca");
  const auto subset = load_subset(ctx, "pca");
  const auto proj = load_trained_projection(ctx, "pca");
  const auto pairs = subset_pairs(ds, subset);
  if (pairs.size() < 2) throw ValidationError("pca needs at least two subset participants");

  analysis::Rows before, after;
  std::vector<int> groups;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto tokens = enc->encode(signal::standardize_minutes(pairs[i].sequence, ds.stats));
    before.push_back(analysis::pool_embeddings(tokens));
    after.push_back(analysis::pool_embeddings(proj->apply(tokens)));
    groups.push_back(subset[i].cluster);
  }

  StageRun run(ctx, "pca");
  nlohmann::json summary = nlohmann::json::object();
  const std::pair<const char*, const analysis::Rows*> views[] = {{"encoder", &before}, {"projected", &after}};
  for (const auto& [name, rows] : views) {
    const auto res = analysis::pca2(*rows);
    std::ostringstream csv;
    csv << "participant_id,cluster,pc1,pc2\n";
    for (std::size_t i = 0; i < res.coords.size(); ++i) {
      csv << csv_field(subset[i].participant_id) << ',' << groups[i] << ',' << num(res.coords[i][0]) << ','
          << num(res.coords[i][1]) << '\n';
    }
    const std::string n = name;
    write_text(run.dir() / ("pca_" + n + ".csv"), csv.str());
    std::ostringstream svg;
    analysis::write_scatter_svg(svg, res.coords, groups,
                                n == "encoder" ? "Pooled encoder embeddings" : "Pooled projected embeddings", "PC1",
                                "PC2");
    write_text(run.dir() / ("pca_" + n + ".svg"), svg.str());
    summary[n] = {{"dim", rows->front().size()},
                  {"explained_variance", res.model.explained_variance},
                  {"silhouette", analysis::silhouette_score(*rows, groups)}};
  }
  write_json(run.dir() / "summary.json", summary);
  run.commit();
}

}  // namespace actilang::cli
