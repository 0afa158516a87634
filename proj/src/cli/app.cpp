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

#include <CLI11.hpp>

#include <functional>
#include <map>
#include <ostream>

#include "actilang/cli/cli.hpp"
#include "actilang/errors.hpp"
#include "context.hpp"

namespace actilang::cli {

namespace {

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

struct Command {
  const char* name;
  const char* help;
  void (*fn)(Context&);
};

const Command kCommands[] = {
    {"synth", "synthetic cohort of minute-level days", cmd_synth},
    {"ingest", "import a wide or long minute-level CSV", cmd_ingest},
    {"build-dataset", "bin, label, split and pick exemplars", cmd_build_dataset},
    {"pretrain-encoder", "masked-patch pretraining of the time-series encoder", cmd_pretrain_encoder},
    {"pretrain-decoder", "language-model pretraining of the decoder", cmd_pretrain_decoder},
    {"train", "train the projection against the frozen encoder and decoder", cmd_train},
    {"generate", "summaries for a split or an input CSV", cmd_generate},
    {"eval", "ROUGE and semantic scores", cmd_eval},
    {"baseline", "shuffled-prefix and untrained-projection baselines", cmd_baseline},
    {"cluster", "k-means on hourly profiles and a cluster-balanced subset", cmd_cluster},
    {"pca", "2-D PCA of pooled embeddings before and after projection", cmd_pca},
    {"report", "tables and figures from eval, baseline, cluster and pca", cmd_report},
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"actilang: actigraphy-to-text pipeline"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string workspace = "workspace";
  std::string config_file, manifest_file;
  std::vector<std::string> sets;
  Options opts;
  std::string input, resume;
  app.add_option("-w,--workspace", workspace, "workspace directory")->capture_default_str();
  app.add_option("-c,--config", config_file, "key = value config file");
  app.add_option("--from-manifest", manifest_file, "reuse the config snapshot of a manifest.json");
  app.add_option("--set", sets, "key=value override (repeatable)");

  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_opts;
  for (const auto& k : config_keys()) {
    flag_opts[k.name] = app.add_option(flag_name(k.name), flag_values[k.name], k.help + " [" + k.default_value + "]")
                            ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }

  std::string chosen;
  CLI::Option* n_alias = nullptr;
  std::string n_value;
  for (const auto& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->callback([&chosen, name = c.name] { chosen = name; });
    const std::string name = c.name;
    if (name == "synth") n_alias = sub->add_option("--n", n_value, "alias of --n-participants");
    if (name == "ingest") sub->add_option("--input", input, "CSV file (wide or long layout)")->required();
    if (name == "generate") sub->add_option("--input", input, "CSV of days to summarise instead of a split");
    if (name == "eval") {
      sub->add_option("--input", input, "JSONL with id, candidate, reference");
      sub->add_flag("--references-only", opts.references_only, "score references against themselves");
    }
    if (name == "train") sub->add_option("--resume", resume, "epoch checkpoint to continue from");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    Config cfg;
    if (!manifest_file.empty()) cfg.load_snapshot(read_json(manifest_file).at("config"));
    if (!config_file.empty()) cfg.load(fs::path(config_file));
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
      cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, opt] : flag_opts) {
      if (opt->count() > 0) cfg.set(key, flag_values[key]);
    }
    if (n_alias != nullptr && n_alias->count() > 0) cfg.set("n_participants", n_value);
    if (!input.empty()) opts.input = input;
    if (!resume.empty()) opts.resume = resume;

    Context ctx(workspace, cfg, opts, out);
    for (const auto& c : kCommands) {
      if (chosen == c.name) c.fn(ctx);
    }
    return 0;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace actilang::cli
