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

#include <fstream>
#include <sstream>

#include "actilang/analysis/analysis.hpp"
#include "actilang/errors.hpp"
#include "context.hpp"

namespace actilang::cli {

namespace {

const char* const kMetrics[] = {"rouge1", "rougeL", "sem_P", "sem_R", "sem_F1"};

std::string cell(const nlohmann::json& summary, const std::string& metric) {
  const auto& m = summary.at("metrics").at(metric);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f ± %.4f", m.at("mean").get<double>(), m.at("std").get<double>());
  return buf;
}

using Grid = std::vector<std::vector<std::string>>;  // first row is the header

std::string to_csv(const Grid& g) {
  std::string out;
  for (const auto& row : g) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += '\n';
  }
  return out;
}

std::string to_markdown(const Grid& g) {
  std::string out;
  for (std::size_t r = 0; r < g.size(); ++r) {
    out += "|";
    for (const auto& c : g[r]) out += " " + c + " |";
    out += '\n';
    if (r == 0) {
      out += "|";
      for (std::size_t i = 0; i < g[0].size(); ++i) out += i == 0 ? "---|" : "---:|";
      out += '\n';
    }
  }
  return out;
}

Grid parse_csv(const std::string& text) {
  Grid g;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) row.push_back(f);
    g.push_back(row);
  }
  return g;
}

Grid epoch_table(const nlohmann::json& eval, const std::string& split) {
  Grid g{{"metric"}};
  std::vector<const nlohmann::json*> cols;
  for (const auto& c : eval.at("checkpoints")) {
    if (c.at("split") != split) continue;
    g[0].push_back("Epoch " + std::to_string(c.at("epoch").get<int>()));
    cols.push_back(&c.at("summary"));
  }
  for (const char* m : kMetrics) {
    std::vector<std::string> row{m};
    for (const auto* s : cols) row.push_back(cell(*s, m));
    g.push_back(row);
  }
  std::vector<std::string> n{"n"};
  for (const auto* s : cols) n.push_back(std::to_string(s->at("n").get<std::size_t>()));
  g.push_back(n);
  return g;
}

void copy_artifact(const fs::path& from, const fs::path& to) { write_text(to, read_text(from)); }

}  // namespace

void cmd_report(Context& ctx) {
  const auto ds = load_dataset(ctx, "report");
  const fs::path train_dir = ctx.require("train", "report");
  const fs::path eval_dir = ctx.require("eval", "report");
  const fs::path base_dir = ctx.require("baseline", "report");
  const fs::path cluster_dir = ctx.require("cluster", "report");
  const fs::path pca_dir = ctx.require("pca", "report");

  const auto eval = read_json(eval_dir / "summary.json");
  if (eval.at("mode") != "checkpoints" || !eval.contains("subset")) {
    throw StageOrderError("'report' needs `actilang eval` run on the trained model after `actilang cluster`; rerun eval");
  }
  const auto base = read_json(base_dir / "summary.json");
  const auto cluster = read_json(cluster_dir / "summary.json");
  const auto pca = read_json(pca_dir / "summary.json");
  const auto train = read_json(train_dir / "summary.json");
  const auto subset = load_subset(ctx, "report");

  StageRun run(ctx, "report");
  const fs::path dir = run.dir();

  const Grid t1 = epoch_table(eval, "val");
  const Grid t2 = epoch_table(eval, "test");
  write_text(dir / "table1_validation.csv", to_csv(t1));
  write_text(dir / "table2_test.csv", to_csv(t2));

  const auto& cond = base.at("conditions");
  Grid t3{{"metric", "Untrained shuffled", "Untrained matched", "Trained shuffled", "Trained matched"}};
  for (const char* m : kMetrics) {
    t3.push_back({m, cell(cond.at("untrained_shuffled"), m), cell(cond.at("untrained_matched"), m),
                  cell(cond.at("trained_shuffled"), m), cell(cond.at("trained_matched"), m)});
  }
  write_text(dir / "table3_baseline.csv", to_csv(t3));

  std::map<std::string, int> assignment;
  for (const auto& s : subset) assignment.emplace(s.participant_id, s.cluster);
  std::vector<analysis::MetricRow> rows;
  const auto subset_rows = read_jsonl(eval_dir / "subset.jsonl");
  for (const auto& r : subset_rows) {
    rows.push_back({r.at("id").get<std::string>(),
                    {r.at("rouge1").get<double>(), r.at("rougeL").get<double>(), r.at("sem_F1").get<double>()}});
  }
  const int k = cluster.at("k").get<int>();
  std::ostringstream t4;
  analysis::write_clusterwise_csv(t4, analysis::clusterwise_report(rows, assignment, k));
  write_text(dir / "table4_clusterwise.csv", t4.str());

  // Loss curve.
  const Grid epochs = parse_csv(read_text(train_dir / "epochs.csv"));
  std::ostringstream loss_csv;
  loss_csv << "epoch,mean_loss\n";
  analysis::Series loss{"mean loss", {}, 0};
  for (std::size_t i = 1; i < epochs.size(); ++i) {
    loss_csv << epochs[i][0] << ',' << epochs[i][1] << '\n';
    loss.y.push_back(std::stod(epochs[i][1]));
  }
  write_text(dir / "figure5_loss.csv", loss_csv.str());
  std::ostringstream loss_svg;
  analysis::write_line_svg(loss_svg, {loss}, "Alignment loss per epoch", "epoch (0-based)", "mean loss");
  write_text(dir / "figure5_loss.svg", loss_svg.str());

  // Example summary of the first subset participant.
  if (subset_rows.empty()) throw ValidationError("eval subset is empty");
  const auto& ex = subset_rows.front();
  const std::string ex_id = ex.at("id").get<std::string>();
  const dataset::PairRecord* ex_pair = nullptr;
  for (const auto& p : ds.pairs) {
    if (p.sequence.participant_id == ex_id) {
      ex_pair = &p;
      break;
    }
  }
  if (ex_pair == nullptr) throw ValidationError("example participant '" + ex_id + "' is not in the dataset");
  std::ostringstream ex_csv;
  ex_csv << "minute,value\n";
  for (std::size_t m = 0; m < ex_pair->sequence.minutes.size(); ++m) {
    ex_csv << m << ',' << num(ex_pair->sequence.minutes[m]) << '\n';
  }
  write_text(dir / "figure6_example.csv", ex_csv.str());
  std::ostringstream ex_svg;
  analysis::write_line_svg(ex_svg, {{ex_id, ex_pair->sequence.minutes, 0}}, "Minute-level activity of " + ex_id,
                           "minute", "intensity");
  write_text(dir / "figure6_example.svg", ex_svg.str());

  for (const char* view : {"encoder", "projected"}) {
    for (const char* ext : {".csv", ".svg"}) {
      copy_artifact(pca_dir / (std::string("pca_") + view + ext), dir / (std::string("figure7_pca_") + view + ext));
    }
  }
  copy_artifact(cluster_dir / "cluster_profiles.csv", dir / "cluster_profiles.csv");
  copy_artifact(cluster_dir / "cluster_profiles.svg", dir / "cluster_profiles.svg");

  std::ostringstream md;
  md << "# actilang run report\n\n";
  md << "| stage | content hash |\n|---|---|\n";
  for (const auto& [stage, hash] : ctx.inputs()) md << "| " << stage << " | `" << hash.substr(0, 16) << "` |\n";
  md << "\n## Training\n\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "Mean loss went from %.4f (epoch 1) to %.4f (epoch %d), a ratio of %.3f. "
                "Best validation %s %.4f at epoch %d.\n\n",
                train.at("first_epoch_loss").get<double>(), train.at("last_epoch_loss").get<double>(),
                train.at("epochs").get<int>(), train.at("loss_ratio").get<double>(),
                train.at("selection_metric").get<std::string>().c_str(), train.at("best_metric").get<double>(),
                train.at("best_epoch").get<int>());
  md << buf;
  md << "## Table 1: validation metrics by epoch\n\n" << to_markdown(t1) << '\n';
  md << "## Table 2: test metrics by epoch\n\n" << to_markdown(t2) << '\n';
  md << "## Table 3: conditioning baselines\n\n";
  md << "Set `" << base.at("set").get<std::string>() << "`, n = " << base.at("n").get<std::size_t>()
     << ". Shuffled rows generate from another participant's input and score against the original reference.\n\n";
  md << to_markdown(t3) << '\n';
  std::snprintf(buf, sizeof(buf), "ROUGE-1 matched minus shuffled: trained %.4f, untrained %.4f.\n\n",
                base.at("rouge1_gap").at("trained").get<double>(), base.at("rouge1_gap").at("untrained").get<double>());
  md << buf;
  md << "## Table 4: cluster-wise metrics on the balanced subset\n\n"
     << to_markdown(parse_csv(t4.str())) << '\n';
  md << "## Figure 5: alignment loss\n\n![loss](figure5_loss.svg)\n\n";
  md << "## Figure 6: example summary (" << ex_id << ")\n\n![activity](figure6_example.svg)\n\n";
  md << "Generated:\n\n> " << ex.at("candidate").get<std::string>() << "\n\n";
  md << "Reference:\n\n> " << ex.at("reference").get<std::string>() << "\n\n";
  md << "## Figure 7: pooled embeddings, PCA\n\n";
  md << "![encoder](figure7_pca_encoder.svg) ![projected](figure7_pca_projected.svg)\n\n";
  Grid t7{{"view", "dim", "explained var PC1", "explained var PC2", "silhouette"}};
  for (const char* view : {"encoder", "projected"}) {
    const auto& v = pca.at(view);
    char a[32], b[32], c[32];
    std::snprintf(a, sizeof(a), "%.4g", v.at("explained_variance")[0].get<double>());
    std::snprintf(b, sizeof(b), "%.4g", v.at("explained_variance")[1].get<double>());
    std::snprintf(c, sizeof(c), "%.4f", v.at("silhouette").get<double>());
    t7.push_back({view, std::to_string(v.at("dim").get<std::size_t>()), a, b, c});
  }
  md << to_markdown(t7) << '\n';
  md << "Colours follow the cluster palette: cluster c uses entry c of";
  for (const auto& col : analysis::kPalette) md << ' ' << col;
  md << ".\n\n## Cluster centroid profiles\n\n![profiles](cluster_profiles.svg)\n";
  write_text(dir / "report.md", md.str());
  run.commit();
}

}  // namespace actilang::cli
