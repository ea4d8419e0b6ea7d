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

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "memephys/eval/folds.hpp"
#include "memephys/eval/metrics.hpp"
#include "memephys/features/table.hpp"
#include "memephys/fusion/config.hpp"
#include "memephys/fusion/dataset.hpp"
#include "memephys/harmonize/harmonizer.hpp"

namespace memephys::eval {

struct AblationConfig {
  std::string name;
  bool use_eeg = false;
  bool use_ethr = false;
};

/// Baseline (content only), + EEG, + EEG + ET/HR.
const std::vector<AblationConfig>& standard_ablation();

struct SuiteOptions {
  fusion::FusionConfig model;  // task, use_eeg and use_ethr are set per run
  std::vector<fusion::Task> tasks = {fusion::Task::T1, fusion::Task::T2, fusion::Task::T3};
  std::vector<AblationConfig> configs = standard_ablation();
  std::size_t k = 5;
  std::uint64_t seed = 1;
  std::size_t n_bootstrap = 1000;
  double level = 0.95;
  /// Share of each training fold held out for checkpoint selection.
  double val_fraction = 0.2;
  bool harmonize = true;
  harmonize::HarmonizeOptions harmonize_options;
  std::size_t threads = 1;
};

struct MetricSummary {
  std::vector<double> per_fold;
  double mean = 0.0;
  double sd = 0.0;
  /// Percentile bootstrap over pooled out-of-fold predictions.
  Interval ci;
  double pooled = 0.0;
};

struct OofPrediction {
  std::string meme_id;
  std::size_t fold = 0;
  std::vector<double> targets;
  std::vector<double> logits;
};

struct ConfigResult {
  fusion::Task task = fusion::Task::T1;
  std::string config;
  MetricSummary macro_f1, f1_positive, auc;
  /// T3 only: per-category F1 across folds.
  std::vector<MetricSummary> per_class_f1;
  /// T3 only: categories absent from at least one test fold.
  std::vector<bool> class_absent;
  std::vector<OofPrediction> predictions;  // sorted by meme id
};

struct EvalReport {
  std::vector<fusion::Task> tasks;
  std::vector<std::string> configs;
  std::vector<ConfigResult> results;  // task-major, then config order

  const ConfigResult& at(fusion::Task task, const std::string& config) const;
};

/// Stratum per example for fold assignment: the T1/T2 target, or for T3
/// the lowest positive category.
int stratum_of(const fusion::MemeExample& ex, fusion::Task task);

EvalReport run_ablation_suite(const features::FeatureTable& table, const std::map<std::string, fusion::MemeText>& text,
                              const SuiteOptions& opts);

/// auc_by_task.csv, category_f1.csv (when T3 ran), metrics.csv, ci_chart.svg and
/// predictions.ndjson under `dir`.
void write_reports(const EvalReport& report, const std::filesystem::path& dir);

std::string emit_bar_chart(const EvalReport& report);

}  // namespace memephys::eval
