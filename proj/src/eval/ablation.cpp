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

#include "memephys/eval/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "memephys/error.hpp"
#include "memephys/fusion/train.hpp"
#include "memephys/util/descriptive.hpp"
#include "memephys/util/parallel.hpp"

namespace memephys::eval {

using fusion::Task;

const std::vector<AblationConfig>& standard_ablation() {
  static const std::vector<AblationConfig> c = {
      {"baseline", false, false}, {"+EEG", true, false}, {"+EEG+ET/HR", true, true}};
  return c;
}

const ConfigResult& EvalReport::at(Task task, const std::string& config) const {
  for (const auto& r : results) {
    if (r.task == task && r.config == config) return r;
  }
  throw Error(ErrorCode::ValidationError, "no result for " + std::string(fusion::task_name(task)) + " " + config);
}

int stratum_of(const fusion::MemeExample& ex, Task task) {
  if (task != Task::T3) return ex.targets.at(0) > 0.5 ? 1 : 0;
  for (std::size_t c = 0; c < ex.targets.size(); ++c) {
    if (ex.targets[c] > 0.5) return static_cast<int>(c);
  }
  return static_cast<int>(ex.targets.size());
}

namespace {

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

struct FoldOutput {
  // [config] -> predictions of this fold's test memes
  std::vector<std::vector<OofPrediction>> preds;
};

struct Scores {
  double macro_f1 = 0.0, f1_positive = 0.0, auc = 0.0;
  std::vector<double> per_class;
};

Scores score(const std::vector<const OofPrediction*>& preds, Task task) {
  Scores s;
  const std::size_t C = fusion::num_outputs(task);
  if (C == 1) {
    std::vector<int> y, yhat;
    std::vector<double> z;
    for (const auto* p : preds) {
      y.push_back(p->targets[0] > 0.5);
      yhat.push_back(p->logits[0] >= 0.0);
      z.push_back(p->logits[0]);
    }
    const auto f = f1_scores(yhat, y, 2);
    s.macro_f1 = f.macro;
    s.f1_positive = f.positive;
    s.auc = auc(z, y);
  } else {
    std::vector<std::vector<int>> y, yhat;
    std::vector<std::vector<double>> z;
    for (const auto* p : preds) {
      auto& yr = y.emplace_back();
      auto& hr = yhat.emplace_back();
      for (std::size_t c = 0; c < C; ++c) {
        yr.push_back(p->targets[c] > 0.5);
        hr.push_back(p->logits[c] >= 0.0);
      }
      z.push_back(p->logits);
    }
    const auto f = multilabel_f1(yhat, y);
    s.macro_f1 = f.macro;
    s.f1_positive = f.positive;
    s.per_class = f.per_class;
    s.auc = macro_auc(z, y);
  }
  return s;
}

void summarize_into(MetricSummary& m) {
  m.mean = mean(m.per_fold);
  m.sd = m.per_fold.size() > 1 ? sample_sd(m.per_fold) : 0.0;
}

}  // namespace

EvalReport run_ablation_suite(const features::FeatureTable& table, const std::map<std::string, fusion::MemeText>& text,
                              const SuiteOptions& opts) {
  if (opts.configs.empty() || opts.tasks.empty()) throw Error(ErrorCode::ConfigError, "nothing to evaluate");
  EvalReport report;
  report.tasks = opts.tasks;
  for (const auto& c : opts.configs) report.configs.push_back(c.name);
  const Rng root(opts.seed);

  for (Task task : opts.tasks) {
    const std::string tname(fusion::task_name(task));
    const auto scope = fusion::build_dataset(table, text, task);
    std::vector<std::string> ids;
    std::vector<int> strata;
    for (const auto& ex : scope.examples) {
      ids.push_back(ex.meme_id);
      strata.push_back(stratum_of(ex, task));
    }
    const auto plan = make_folds(ids, strata, opts.k, root.derive("folds/" + tname).next_u64());
    const auto fold_of = plan.assignment();

    const auto outputs = parallel_map<FoldOutput>(opts.k, opts.threads, [&](std::size_t f) {
      std::set<std::string> train_memes;
      for (const auto& id : ids) {
        if (fold_of.at(id) != f) train_memes.insert(id);
      }
      features::FeatureTable htable;
      if (opts.harmonize) {
        const auto params = harmonize::fit_harmonizer(rows_of_memes(table, train_memes), opts.harmonize_options);
        htable = harmonize::apply_harmonizer(params, table);
      } else {
        htable = table;
      }
      auto data = fusion::build_dataset(htable, text, task);
      std::vector<std::size_t> train_all, test;
      std::vector<int> train_strata;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (fold_of.at(data.examples[i].meme_id) == f) {
          test.push_back(i);
        } else {
          train_all.push_back(i);
          train_strata.push_back(stratum_of(data.examples[i], task));
        }
      }
      const auto [tr, va] = stratified_holdout(train_all, train_strata, opts.val_fraction,
                                               root.derive("holdout/" + tname, f).next_u64());
      fusion::apply_scaler(fusion::fit_scaler(data, tr), data);

      FoldOutput out;
      const std::uint64_t model_seed = root.derive("model/" + tname, f).next_u64();
      for (const auto& ac : opts.configs) {
        auto cfg = opts.model;
        cfg.task = task;
        cfg.use_eeg = ac.use_eeg;
        cfg.use_ethr = ac.use_ethr;
        cfg.seed = model_seed;
        cfg.pos_weights.clear();
        fusion::FusionModel model(cfg, fusion::dims_of(data));
        fusion::train(model, data, tr, va);
        const auto logits = model.predict_logits(data, test);
        const std::size_t C = fusion::num_outputs(task);
        auto& preds = out.preds.emplace_back();
        for (std::size_t k = 0; k < test.size(); ++k) {
          const auto& ex = data.examples[test[k]];
          preds.push_back({ex.meme_id, f, ex.targets,
                           std::vector<double>(logits.begin() + static_cast<std::ptrdiff_t>(k * C),
                                               logits.begin() + static_cast<std::ptrdiff_t>((k + 1) * C))});
        }
      }
      return out;
    });

    for (std::size_t ci = 0; ci < opts.configs.size(); ++ci) {
      ConfigResult res;
      res.task = task;
      res.config = opts.configs[ci].name;
      const std::size_t C = fusion::num_outputs(task);
      if (task == Task::T3) {
        res.per_class_f1.resize(C);
        res.class_absent.assign(C, false);
      }
      for (std::size_t f = 0; f < opts.k; ++f) {
        const auto& fp = outputs[f].preds[ci];
        std::vector<const OofPrediction*> ptrs;
        for (const auto& p : fp) ptrs.push_back(&p);
        const auto s = score(ptrs, task);
        res.macro_f1.per_fold.push_back(s.macro_f1);
        res.f1_positive.per_fold.push_back(s.f1_positive);
        res.auc.per_fold.push_back(s.auc);
        for (std::size_t c = 0; c < s.per_class.size(); ++c) {
          res.per_class_f1[c].per_fold.push_back(s.per_class[c]);
          bool any = false;
          for (const auto* p : ptrs) any = any || p->targets[c] > 0.5;
          if (!any) res.class_absent[c] = true;
        }
        res.predictions.insert(res.predictions.end(), fp.begin(), fp.end());
      }
      std::sort(res.predictions.begin(), res.predictions.end(),
                [](const OofPrediction& a, const OofPrediction& b) { return a.meme_id < b.meme_id; });

      std::vector<const OofPrediction*> all;
      for (const auto& p : res.predictions) all.push_back(&p);
      const auto pooled = score(all, task);
      res.macro_f1.pooled = pooled.macro_f1;
      res.f1_positive.pooled = pooled.f1_positive;
      res.auc.pooled = pooled.auc;

      auto ci_of = [&](const char* metric, auto pick) {
        const Rng r = root.derive(fmt::format("bootstrap/{}/{}/{}", tname, res.config, metric));
        return bootstrap_ci(
            all.size(),
            [&](const std::vector<std::size_t>& idx) {
              std::vector<const OofPrediction*> draw;
              draw.reserve(idx.size());
              for (std::size_t i : idx) draw.push_back(all[i]);
              return pick(score(draw, task));
            },
            opts.n_bootstrap, opts.level, r);
      };
      res.macro_f1.ci = ci_of("macro_f1", [](const Scores& s) { return s.macro_f1; });
      res.f1_positive.ci = ci_of("f1_positive", [](const Scores& s) { return s.f1_positive; });
      res.auc.ci = ci_of("auc", [](const Scores& s) { return s.auc; });
      summarize_into(res.macro_f1);
      summarize_into(res.f1_positive);
      summarize_into(res.auc);
      for (std::size_t c = 0; c < res.per_class_f1.size(); ++c) {
        res.per_class_f1[c].pooled = pooled.per_class[c];
        res.per_class_f1[c].ci = ci_of(fmt::format("f1_class{}", c).c_str(),
                                       [c](const Scores& s) { return s.per_class[c]; });
        summarize_into(res.per_class_f1[c]);
      }
      report.results.push_back(std::move(res));
    }
  }
  return report;
}

namespace {

std::string num(double v) { return fmt::format("{:.6f}", v); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return out;
}

}  // namespace

void write_reports(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "auc_by_task.csv");
    out << "config";
    for (Task t : report.tasks) {
      const auto n = fusion::task_name(t);
      out << fmt::format(",{0}_auc_mean,{0}_auc_sd,{0}_auc_ci_lo,{0}_auc_ci_hi", n);
    }
    out << '\n';
    for (const auto& c : report.configs) {
      out << c;
      for (Task t : report.tasks) {
        const auto& a = report.at(t, c).auc;
        out << ',' << num(a.mean) << ',' << num(a.sd) << ',' << num(a.ci.lo) << ',' << num(a.ci.hi);
      }
      out << '\n';
    }
  }
  if (std::find(report.tasks.begin(), report.tasks.end(), Task::T3) != report.tasks.end()) {
    auto out = open_out(dir / "category_f1.csv");
    out << "category";
    for (const auto& c : report.configs) out << fmt::format(",{0}_f1_mean,{0}_f1_sd", c);
    out << ",absent_in_some_fold\n";
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      out << category_name(static_cast<Category>(k));
      bool absent = false;
      for (const auto& c : report.configs) {
        const auto& r = report.at(Task::T3, c);
        out << ',' << num(r.per_class_f1[k].mean) << ',' << num(r.per_class_f1[k].sd);
        absent = absent || r.class_absent[k];
      }
      out << ',' << (absent ? "true" : "false") << '\n';
    }
    out << "macro_average";
    for (const auto& c : report.configs) {
      const auto& r = report.at(Task::T3, c);
      out << ',' << num(r.macro_f1.mean) << ',' << num(r.macro_f1.sd);
    }
    out << ",false\n";
  }
  {
    auto out = open_out(dir / "metrics.csv");
    const std::size_t k = report.results.empty() ? 0 : report.results[0].auc.per_fold.size();
    out << "task,config,metric,mean,sd,ci_lo,ci_hi,pooled";
    for (std::size_t f = 0; f < k; ++f) out << ",fold" << f + 1;
    out << '\n';
    for (const auto& r : report.results) {
      auto row = [&](const std::string& metric, const MetricSummary& m) {
        out << fusion::task_name(r.task) << ',' << r.config << ',' << metric << ',' << num(m.mean) << ','
            << num(m.sd) << ',' << num(m.ci.lo) << ',' << num(m.ci.hi) << ',' << num(m.pooled);
        for (double v : m.per_fold) out << ',' << num(v);
        out << '\n';
      };
      row("macro_f1", r.macro_f1);
      row("f1_positive", r.f1_positive);
      row("auc", r.auc);
      for (std::size_t c = 0; c < r.per_class_f1.size(); ++c) {
        row("f1_" + std::string(category_name(static_cast<Category>(c))), r.per_class_f1[c]);
      }
    }
  }
  {
    auto out = open_out(dir / "predictions.ndjson");
    for (const auto& r : report.results) {
      for (const auto& p : r.predictions) {
        nlohmann::json j = {{"task", fusion::task_name(r.task)}, {"config", r.config}, {"fold", p.fold},
                            {"meme_id", p.meme_id},            {"target", p.targets}, {"logit", p.logits}};
        out << j.dump() << '\n';
      }
    }
  }
  auto out = open_out(dir / "ci_chart.svg");
  out << emit_bar_chart(report);
}

std::string emit_bar_chart(const EvalReport& report) {
  static const char* kColors[] = {"#9e9e9e", "#2c7fb8", "#d95f0e", "#31a354", "#756bb1"};
  constexpr double kPanelW = 330.0, kPanelH = 260.0, kLeft = 50.0, kTop = 40.0, kPlotH = 180.0;
  const std::size_t nc = report.configs.size();
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" font-family=\"sans-serif\" "
      "font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n",
      kLeft + kPanelW * static_cast<double>(report.tasks.size()) + 20.0, kTop + kPanelH + 30.0 + 16.0 * nc);
  const char* metrics[] = {"Macro F1", "F1+", "AUC"};
  for (std::size_t ti = 0; ti < report.tasks.size(); ++ti) {
    const Task t = report.tasks[ti];
    const double x0 = kLeft + kPanelW * static_cast<double>(ti), y0 = kTop + kPlotH;
    s += fmt::format("<text x=\"{:.1f}\" y=\"24\" text-anchor=\"middle\">{}</text>\n", x0 + kPanelW / 2 - 10,
                     fusion::task_name(t));
    s += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#333333\"/>\n", x0,
                     y0, x0 + kPanelW - 20, y0);
    s += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#333333\"/>\n", x0,
                     y0, x0, kTop);
    for (int tick = 0; tick <= 4; ++tick) {
      const double y = y0 - kPlotH * tick / 4.0;
      s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.2f}</text>\n", x0 - 4, y + 4,
                       tick / 4.0);
    }
    const double group_w = (kPanelW - 40.0) / 3.0, bar_w = group_w / static_cast<double>(nc + 1);
    for (std::size_t mi = 0; mi < 3; ++mi) {
      const double gx = x0 + 10.0 + group_w * static_cast<double>(mi);
      s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", gx + group_w / 2 - bar_w / 2,
                       y0 + 16, metrics[mi]);
      for (std::size_t ci = 0; ci < nc; ++ci) {
        const auto& r = report.at(t, report.configs[ci]);
        const MetricSummary& m = mi == 0 ? r.macro_f1 : mi == 1 ? r.f1_positive : r.auc;
        const double bx = gx + bar_w * static_cast<double>(ci);
        const double h = kPlotH * std::clamp(m.mean, 0.0, 1.0);
        s += fmt::format(
            "<rect class=\"bar\" data-task=\"{}\" data-config=\"{}\" data-metric=\"{}\" x=\"{:.2f}\" y=\"{:.2f}\" "
            "width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
            fusion::task_name(t), report.configs[ci], metrics[mi], bx, y0 - h, bar_w * 0.9, h, kColors[ci % 5]);
        const double cx = bx + bar_w * 0.45;
        const double ylo = y0 - kPlotH * std::clamp(m.ci.lo, 0.0, 1.0), yhi = y0 - kPlotH * std::clamp(m.ci.hi, 0.0, 1.0);
        s += fmt::format(
            "<path class=\"ci\" d=\"M{0:.2f},{1:.2f} L{0:.2f},{2:.2f} M{3:.2f},{1:.2f} L{4:.2f},{1:.2f} M{3:.2f},{2:.2f} "
            "L{4:.2f},{2:.2f}\" stroke=\"#000000\" fill=\"none\"/>\n",
            cx, ylo, yhi, cx - bar_w * 0.2, cx + bar_w * 0.2);
      }
    }
  }
  for (std::size_t ci = 0; ci < nc; ++ci) {
    const double y = kTop + kPanelH + 10.0 + 16.0 * static_cast<double>(ci);
    s += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n", kLeft, y,
                     kColors[ci % 5]);
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", kLeft + 16, y + 9, report.configs[ci]);
  }
  s += "</svg>\n";
  return s;
}

}  // namespace memephys::eval
