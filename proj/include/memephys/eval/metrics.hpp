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

#include <cstdint>
#include <span>
#include <vector>

#include "memephys/util/rng.hpp"

namespace memephys::eval {

/// Probability that a random positive outranks a random negative, ties
/// counting one half, via midranks. Throws SingleClass.
double auc(std::span<const double> scores, std::span<const int> labels);

struct F1Scores {
  double macro = 0.0;
  std::vector<double> per_class;
  double positive = 0.0;  // F1 of class 1 (binary) or macro (multi-label)
  /// Classes with no true and no predicted member (F1 reported as 0).
  std::vector<bool> absent;
};

/// Single-label predictions over classes 0..n_classes-1. 0/0 counts as 0.
F1Scores f1_scores(std::span<const int> preds, std::span<const int> labels, std::size_t n_classes = 2);

/// Per-class positive F1 for multi-label rows [n][C]; macro = mean.
F1Scores multilabel_f1(const std::vector<std::vector<int>>& preds, const std::vector<std::vector<int>>& labels);

/// Macro one-vs-rest AUC over the columns that have both classes.
double macro_auc(const std::vector<std::vector<double>>& scores, const std::vector<std::vector<int>>& labels);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap over example indices 0..n-1. `metric` maps a
/// resampled index list to a value; resamples where it throws (a class
/// missing from the draw) are redrawn.
template <typename Metric>
Interval bootstrap_ci(std::size_t n, Metric&& metric, std::size_t n_resamples, double level, Rng rng);

Interval percentile_interval(std::vector<double> values, double level);

}  // namespace memephys::eval

#include "memephys/eval/bootstrap_impl.hpp"
