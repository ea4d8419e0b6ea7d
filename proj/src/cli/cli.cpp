// Copyright (c) 2026 The memephys Authors. All Rights Reserved.
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

#include "memephys/cli/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "memephys/autodiff/optim.hpp"
#include "memephys/error.hpp"
#include "memephys/eval/ablation.hpp"
#include "memephys/features/table.hpp"
#include "memephys/fusion/model.hpp"
#include "memephys/fusion/train.hpp"
#include "memephys/harmonize/harmonizer.hpp"
#include "memephys/ingest/manifest.hpp"
#include "memephys/ingest/synth.hpp"
#include "memephys/stats/analysis.hpp"

namespace memephys::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  std::string precision = "f64";
  bool json_summary = false;
};

struct GenSynthArgs {
  std::string spec, out;
  std::optional<std::size_t> n_memes;
};

struct ExtractArgs {
  std::string manifest, out;
};

struct HarmonizeArgs {
  std::string features, out, params_out;
  bool include_behavioral = false;
};

struct AnalyzeArgs {
  std::string features, by = "task2", contrast, out = "analysis";
  std::vector<std::string> metrics;
  bool fdr = false;
};

struct ModelArgs {
  std::string config;
  std::optional<std::size_t> model_dim, heads, mlp_hidden, phase1_epochs, phase2_epochs, batch_size;
};

struct TrainArgs {
  std::string features, manifest, out, task = "T1";
  ModelArgs model;
  bool no_eeg = false, no_ethr = false, no_harmonize = false;
  double val_fraction = 0.2;
};

struct EvalArgs {
  std::string features, manifest, out;
  std::vector<std::string> tasks{"T1", "T2", "T3"};
  ModelArgs model;
  std::size_t folds = 5, bootstrap = 1000;
  bool no_harmonize = false;
};

struct ExportArgs {
  std::string run, features, manifest, meme, out;
  std::size_t top_k = 3;
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

/// Resolved config goes next to the outputs: inside an output directory,
/// or beside an output file as <file>.run.json.
void write_run_config(const fs::path& out, bool is_dir, const std::string& subcommand, const Globals& g,
                      json resolved) {
  resolved["subcommand"] = subcommand;
  resolved["threads"] = g.threads;
  resolved["precision"] = g.precision;
  write_json_file(is_dir ? out / "run_config.json" : fs::path(out.string() + ".run.json"), resolved);
}

fusion::FusionConfig resolve_model(const ModelArgs& a, const Globals& g) {
  fusion::FusionConfig c;
  if (!a.config.empty()) c = fusion::config_from_json(read_json_file(a.config));
  if (a.model_dim) c.model_dim = *a.model_dim;
  if (a.heads) c.heads = *a.heads;
  if (a.mlp_hidden) c.mlp_hidden = *a.mlp_hidden;
  if (a.phase1_epochs) c.phase1_epochs = *a.phase1_epochs;
  if (a.phase2_epochs) c.phase2_epochs = *a.phase2_epochs;
  if (a.batch_size) c.batch_size = *a.batch_size;
  if (g.seed) c.seed = *g.seed;
  c.precision = g.precision == "f32" ? fusion::Precision::F32 : fusion::Precision::F64;
  return c;
}

fusion::Task resolve_task(const std::string& s) {
  const auto t = fusion::parse_task(s);
  if (!t) throw Error(ErrorCode::ConfigError, "unknown task " + s);
  return *t;
}

void add_model_options(CLI::App* sub, ModelArgs& m) {
  sub->add_option("--config", m.config, "Model config JSON; flags below override it")->check(CLI::ExistingFile);
  sub->add_option("--model-dim", m.model_dim, "Fusion width");
  sub->add_option("--heads", m.heads, "Attention heads");
  sub->add_option("--mlp-hidden", m.mlp_hidden, "Classifier hidden width");
  sub->add_option("--phase1-epochs", m.phase1_epochs, "Epochs with the text adapter frozen");
  sub->add_option("--phase2-epochs", m.phase2_epochs, "Epochs of full fine-tuning");
  sub->add_option("--batch-size", m.batch_size, "Memes per batch");
}

json scaler_to_json(const fusion::PhysioScaler& s) {
  return {{"eeg_mean", s.eeg_mean}, {"eeg_sd", s.eeg_sd}, {"ethr_mean", s.ethr_mean}, {"ethr_sd", s.ethr_sd}};
}

fusion::PhysioScaler scaler_from_json(const json& j) {
  fusion::PhysioScaler s;
  j.at("eeg_mean").get_to(s.eeg_mean);
  j.at("eeg_sd").get_to(s.eeg_sd);
  j.at("ethr_mean").get_to(s.ethr_mean);
  j.at("ethr_sd").get_to(s.ethr_sd);
  return s;
}

features::FeatureTable rows_of_memes(const features::FeatureTable& t, const std::set<std::string>& memes) {
  features::FeatureTable out;
  out.columns = t.columns;
  for (std::size_t r = 0; r < t.size(); ++r) {
    if (memes.count(t.rows[r].meme_id)) {
      out.rows.push_back(t.rows[r]);
      out.values.push_back(t.values[r]);
    }
  }
  return out;
}

json run_gen_synth(const GenSynthArgs& a, const Globals& g, std::ostream& err) {
  ingest::SynthSpec spec;
  if (!a.spec.empty()) spec = ingest::synth_spec_from_json(read_json_file(a.spec));
  if (a.n_memes) spec.n_memes = *a.n_memes;
  if (g.seed) spec.seed = *g.seed;
  const auto manifest = ingest::generate_synthetic(spec, a.out, g.threads);
  err << fmt::format("gen-synth: {} trials for {} memes in {}\n", manifest.trials.size(), spec.n_memes, a.out);
  write_run_config(a.out, true, "gen-synth", g, {{"seed", spec.seed}, {"spec", ingest::synth_spec_to_json(spec)}});
  return {{"trials", manifest.trials.size()}, {"manifest", (fs::path(a.out) / "manifest.ndjson").string()}};
}

json run_extract(const ExtractArgs& a, const Globals& g, std::ostream& err) {
  const auto manifest = ingest::load_manifest(a.manifest);
  features::ExtractOptions opts;
  opts.threads = g.threads;
  const auto table = features::extract_features(manifest, opts);
  features::write_feature_csv(a.out, table);
  err << fmt::format("extract: {} rows x {} features -> {}\n", table.size(), table.columns.size(), a.out);
  write_run_config(a.out, false, "extract", g, {{"manifest", a.manifest}});
  return {{"rows", table.size()}, {"features", table.columns.size()}};
}

json run_harmonize(const HarmonizeArgs& a, const Globals& g, std::ostream& err) {
  const auto table = features::read_feature_csv(a.features);
  harmonize::HarmonizeOptions opts;
  opts.include_behavioral = a.include_behavioral;
  const auto params = harmonize::fit_harmonizer(table, opts);
  const auto out = harmonize::apply_harmonizer(params, table);
  features::write_feature_csv(a.out, out);
  const std::string params_path = a.params_out.empty() ? a.out + ".params.json" : a.params_out;
  harmonize::save_harmonize_params(params_path, params);
  err << fmt::format("harmonize: {} features, {} dropped -> {}\n", params.features.size(), params.dropped.size(),
                     a.out);
  write_run_config(a.out, false, "harmonize", g,
                   {{"features", a.features}, {"include_behavioral", a.include_behavioral}, {"params", params_path}});
  return {{"features", params.features.size()}, {"dropped", params.dropped}};
}

json run_analyze(const AnalyzeArgs& a, const Globals& g, std::ostream& err) {
  const auto table = features::read_feature_csv(a.features);
  const fs::path out(a.out);
  fs::create_directories(out);
  const auto metrics = a.metrics.empty() ? std::vector<std::string>{"rt_s"} : a.metrics;
  const auto groups = stats::group_rows(table, a.by);
  std::vector<stats::AnovaResult> results;
  json summary = json::array();
  for (const auto& m : metrics) {
    results.push_back(stats::anova_for(table, groups, m));
    const auto& r = results.back();
    summary.push_back({{"metric", m}, {"F", r.F}, {"df_between", r.df_between}, {"df_within", r.df_within}, {"p", r.p}});
    err << fmt::format("analyze: {} by {}: F({:g}, {:g}) = {:.4f}, p = {:.3g}\n", m, a.by, r.df_between,
                       r.df_within, r.F, r.p);
  }
  stats::write_anova_csv(out / "anova.csv", results);
  json result = {{"anova", summary}};
  if (!a.contrast.empty()) {
    const auto cg = stats::group_rows(table, a.contrast);
    if (cg.names.size() != 2) {
      throw Error(ErrorCode::ConfigError,
                  fmt::format("--contrast {} gives {} groups; exactly 2 are needed", a.contrast, cg.names.size()));
    }
    const auto contrasts = stats::channel_band_contrast(table, cg.rows[0], cg.rows[1], a.fdr);
    stats::write_contrast_csv(out / "contrasts.csv", contrasts);
    std::ofstream svg(out / "topomap.svg", std::ios::binary);
    svg << stats::emit_topomap(contrasts, ChannelLayout::standard16(), {cg.names[0], cg.names[1]});
    const auto n_sig = std::count_if(contrasts.begin(), contrasts.end(), [](const auto& c) { return c.significant; });
    err << fmt::format("analyze: {} of {} channel-band contrasts significant ({} vs {})\n", n_sig, contrasts.size(),
                       cg.names[1], cg.names[0]);
    result["significant_contrasts"] = n_sig;
  }
  write_run_config(out, true, "analyze", g,
                   {{"features", a.features}, {"by", a.by}, {"metrics", metrics}, {"contrast", a.contrast},
                    {"fdr", a.fdr}});
  return result;
}

json run_train(const TrainArgs& a, const Globals& g, std::ostream& err) {
  auto cfg = resolve_model(a.model, g);
  cfg.task = resolve_task(a.task);
  if (a.no_eeg) cfg.use_eeg = false;
  if (a.no_ethr) cfg.use_ethr = false;
  cfg.validate();
  const auto table = features::read_feature_csv(a.features);
  const auto text = fusion::load_text(ingest::load_manifest(a.manifest));
  const auto scope = fusion::build_dataset(table, text, cfg.task);
  std::vector<std::size_t> all(scope.size());
  std::vector<int> strata;
  for (std::size_t i = 0; i < scope.size(); ++i) {
    all[i] = i;
    strata.push_back(eval::stratum_of(scope.examples[i], cfg.task));
  }
  const auto [tr, va] = eval::stratified_holdout(all, strata, a.val_fraction, Rng(cfg.seed).derive("train/holdout").next_u64());
  const fs::path out(a.out);
  fs::create_directories(out);

  auto htable = table;
  if (!a.no_harmonize) {
    std::set<std::string> train_memes;
    for (auto i : tr) train_memes.insert(scope.examples[i].meme_id);
    const auto params = harmonize::fit_harmonizer(rows_of_memes(table, train_memes));
    harmonize::save_harmonize_params(out / "harmonize_params.json", params);
    htable = harmonize::apply_harmonizer(params, table);
  }
  auto data = fusion::build_dataset(htable, text, cfg.task);
  const auto scaler = fusion::fit_scaler(data, tr);
  fusion::apply_scaler(scaler, data);

  fusion::FusionModel model(cfg, fusion::dims_of(data));
  const auto result = fusion::train(model, data, tr, va);
  ad::save_checkpoint(out / "model", model.parameters());
  write_json_file(out / "model_config.json", fusion::config_to_json(cfg));
  write_json_file(out / "scaler.json", scaler_to_json(scaler));
  json split = {{"train", json::array()}, {"val", json::array()}};
  for (auto i : tr) split["train"].push_back(data.examples[i].meme_id);
  for (auto i : va) split["val"].push_back(data.examples[i].meme_id);
  write_json_file(out / "split.json", split);
  {
    std::ofstream log(out / "training_log.ndjson", std::ios::binary);
    fusion::write_training_log(log, result.log);
  }
  err << fmt::format("train: {} on {} memes ({} val), best epoch {} with val macro F1 {:.4f}\n",
                     fusion::task_name(cfg.task), tr.size(), va.size(), result.best_epoch, result.best_val_f1.value_or(0.0));
  write_run_config(out, true, "train", g,
                   {{"features", a.features}, {"manifest", a.manifest}, {"model", fusion::config_to_json(cfg)},
                    {"harmonize", !a.no_harmonize}, {"val_fraction", a.val_fraction}});
  return {{"best_epoch", result.best_epoch}, {"best_val_macro_f1", result.best_val_f1.value_or(0.0)},
          {"parameters", model.parameter_count()}};
}

json run_eval(const EvalArgs& a, const Globals& g, std::ostream& err) {
  eval::SuiteOptions opts;
  opts.model = resolve_model(a.model, g);
  opts.model.validate();
  opts.tasks.clear();
  for (const auto& t : a.tasks) opts.tasks.push_back(resolve_task(t));
  opts.k = a.folds;
  opts.n_bootstrap = a.bootstrap;
  opts.harmonize = !a.no_harmonize;
  opts.threads = g.threads;
  opts.seed = g.seed.value_or(opts.model.seed);
  const auto table = features::read_feature_csv(a.features);
  const auto text = fusion::load_text(ingest::load_manifest(a.manifest));
  const auto report = eval::run_ablation_suite(table, text, opts);
  eval::write_reports(report, a.out);
  json summary = json::array();
  for (const auto& r : report.results) {
    err << fmt::format("eval: {} {:<12} macro F1 {:.3f}  AUC {:.3f} [{:.3f}, {:.3f}]\n", fusion::task_name(r.task),
                       r.config, r.macro_f1.mean, r.auc.mean, r.auc.ci.lo, r.auc.ci.hi);
    summary.push_back({{"task", fusion::task_name(r.task)},
                       {"config", r.config},
                       {"macro_f1", r.macro_f1.mean},
                       {"auc", r.auc.mean},
                       {"auc_ci", {r.auc.ci.lo, r.auc.ci.hi}}});
  }
  write_run_config(a.out, true, "eval", g,
                   {{"features", a.features},
                    {"manifest", a.manifest},
                    {"seed", opts.seed},
                    {"model", fusion::config_to_json(opts.model)},
                    {"tasks", a.tasks},
                    {"folds", opts.k},
                    {"bootstrap", opts.n_bootstrap},
                    {"harmonize", opts.harmonize}});
  return {{"results", summary}};
}

json run_export_attn(const ExportArgs& a, const Globals& g, std::ostream& err) {
  const fs::path run(a.run);
  const auto cfg = fusion::config_from_json(read_json_file(run / "model_config.json"));
  auto table = features::read_feature_csv(a.features);
  if (fs::exists(run / "harmonize_params.json")) {
    table = harmonize::apply_harmonizer(harmonize::load_harmonize_params(run / "harmonize_params.json"), table);
  }
  const auto text = fusion::load_text(ingest::load_manifest(a.manifest));
  auto data = fusion::build_dataset(table, text, cfg.task);
  fusion::apply_scaler(scaler_from_json(read_json_file(run / "scaler.json")), data);
  fusion::FusionModel model(cfg, fusion::dims_of(data));
  ad::load_checkpoint(run / "model", model.parameters());
  const auto it = std::find_if(data.examples.begin(), data.examples.end(),
                               [&](const auto& ex) { return ex.meme_id == a.meme; });
  if (it == data.examples.end()) {
    throw Error(ErrorCode::ValidationError, "meme " + a.meme + " is not in the " +
                                                std::string(fusion::task_name(cfg.task)) + " dataset");
  }
  const auto idx = static_cast<std::size_t>(it - data.examples.begin());
  const auto record = fusion::export_attention(model, data, idx, it->token_strings, a.top_k);
  write_json_file(a.out, record);
  err << fmt::format("export-attn: {} -> {}\n", a.meme, a.out);
  write_run_config(a.out, false, "export-attn", g,
                   {{"run", a.run}, {"features", a.features}, {"manifest", a.manifest}, {"meme", a.meme},
                    {"top_k", a.top_k}});
  return {{"meme_id", a.meme}, {"out", a.out}};
}

int exit_code_for(ErrorCode code) { return code == ErrorCode::ConfigError ? kExitUsage : kExitData; }

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Physiological-signal meme classification toolkit", "memephys"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed for every random stream");
  app.add_option("--threads", g.threads, "Cap on worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
  app.add_option("--precision", g.precision, "Model parameter precision")->check(CLI::IsMember({"f32", "f64"}));
  app.add_flag("--json", g.json_summary, "Print a machine-readable summary on stdout");

  GenSynthArgs gs;
  auto* c_gen = app.add_subcommand("gen-synth", "Generate a synthetic dataset with planted effects");
  c_gen->add_option("--spec", gs.spec, "Synthetic spec JSON (defaults when omitted)")->check(CLI::ExistingFile);
  c_gen->add_option("--out", gs.out, "Output directory")->required();
  c_gen->add_option("--n-memes", gs.n_memes, "Override the number of memes");

  ExtractArgs ex;
  auto* c_ext = app.add_subcommand("extract", "Extract per-trial EEG and behavioral features");
  c_ext->add_option("--manifest", ex.manifest, "Trial manifest (NDJSON)")->required();
  c_ext->add_option("--out", ex.out, "Feature CSV")->required();

  HarmonizeArgs hm;
  auto* c_harm = app.add_subcommand("harmonize", "Box-Cox, ComBat by subject, winsorize and robust z");
  c_harm->add_option("--features", hm.features, "Feature CSV")->required()->check(CLI::ExistingFile);
  c_harm->add_option("--out", hm.out, "Harmonized feature CSV")->required();
  c_harm->add_option("--params-out", hm.params_out, "Fitted parameters (default <out>.params.json)");
  c_harm->add_flag("--include-behavioral", hm.include_behavioral, "Also harmonize ET, HR and RT columns");

  AnalyzeArgs an;
  auto* c_an = app.add_subcommand("analyze", "ANOVA tables, channel-band contrasts and topomaps");
  c_an->add_option("--features", an.features, "Feature CSV")->required()->check(CLI::ExistingFile);
  c_an->add_option("--by", an.by, "Grouping: task1, task2, level, task3:<category>, emotion")->capture_default_str();
  c_an->add_option("--metric", an.metrics, "Feature column (repeatable; default rt_s)");
  c_an->add_option("--contrast", an.contrast, "Two-group grouping for the EEG contrast and topomap");
  c_an->add_flag("--fdr", an.fdr, "Benjamini-Hochberg adjust the contrasts");
  c_an->add_option("--out", an.out, "Output directory")->capture_default_str();

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train one fusion model on a stratified train/val split");
  c_tr->add_option("--features", tr.features, "Feature CSV (raw)")->required()->check(CLI::ExistingFile);
  c_tr->add_option("--manifest", tr.manifest, "Manifest whose emb/ holds the text embeddings")->required();
  c_tr->add_option("--out", tr.out, "Run directory")->required();
  c_tr->add_option("--task", tr.task, "T1, T2 or T3")->capture_default_str();
  c_tr->add_flag("--no-eeg", tr.no_eeg, "Drop the EEG branch");
  c_tr->add_flag("--no-ethr", tr.no_ethr, "Drop the ET/HR branch");
  c_tr->add_flag("--no-harmonize", tr.no_harmonize, "Skip harmonization");
  c_tr->add_option("--val-fraction", tr.val_fraction, "Share of memes held out for checkpoint selection")->capture_default_str();
  add_model_options(c_tr, tr.model);

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "Cross-validated ablation suite with bootstrap CIs");
  c_ev->add_option("--features", ev.features, "Feature CSV (raw)")->required()->check(CLI::ExistingFile);
  c_ev->add_option("--manifest", ev.manifest, "Manifest whose emb/ holds the text embeddings")->required();
  c_ev->add_option("--out", ev.out, "Report directory")->required();
  c_ev->add_option("--tasks", ev.tasks, "Tasks to run")->capture_default_str()->delimiter(',');
  c_ev->add_option("--folds", ev.folds, "Cross-validation folds")->capture_default_str()->check(CLI::Range(2, 100));
  c_ev->add_option("--bootstrap", ev.bootstrap, "Bootstrap resamples for the CIs")->capture_default_str();
  c_ev->add_flag("--no-harmonize", ev.no_harmonize, "Skip per-fold harmonization");
  add_model_options(c_ev, ev.model);

  ExportArgs xa;
  auto* c_x = app.add_subcommand("export-attn", "Cross-attention weights of a trained model for one meme");
  c_x->add_option("--run", xa.run, "Run directory written by train")->required()->check(CLI::ExistingDirectory);
  c_x->add_option("--features", xa.features, "Feature CSV (raw)")->required()->check(CLI::ExistingFile);
  c_x->add_option("--manifest", xa.manifest, "Manifest whose emb/ holds the text embeddings")->required();
  c_x->add_option("--meme", xa.meme, "Meme id")->required();
  c_x->add_option("--out", xa.out, "Output JSON")->required();
  c_x->add_option("--top-k", xa.top_k, "Tokens listed per subject row")->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    auto* failed = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << failed->help();
    return kExitUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    json summary;
    if (c_gen->parsed()) summary = run_gen_synth(gs, g, err);
    if (c_ext->parsed()) summary = run_extract(ex, g, err);
    if (c_harm->parsed()) summary = run_harmonize(hm, g, err);
    if (c_an->parsed()) summary = run_analyze(an, g, err);
    if (c_tr->parsed()) summary = run_train(tr, g, err);
    if (c_ev->parsed()) summary = run_eval(ev, g, err);
    if (c_x->parsed()) summary = run_export_attn(xa, g, err);
    if (g.json_summary) out << summary.dump() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    err << "error: malformed JSON: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace memephys::cli
