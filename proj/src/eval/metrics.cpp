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

#include "memephys/eval/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "memephys/error.hpp"
#include "memephys/util/descriptive.hpp"

namespace memephys::eval {

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::ShapeMismatch, "auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Rank sums are multiples of 1/2 and stay exact in double.
  double rank_sum = 0.0, n_pos = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum += mid;
        n_pos += 1.0;
      }
    }
    i = j;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw Error(ErrorCode::SingleClass, "auc needs both classes");
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

namespace {

double f1_from(double tp, double fp, double fn) {
  const double denom = 2.0 * tp + fp + fn;
  return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

}  // namespace

F1Scores f1_scores(std::span<const int> preds, std::span<const int> labels, std::size_t n_classes) {
  if (preds.size() != labels.size()) throw Error(ErrorCode::ShapeMismatch, "f1: preds and labels differ in length");
  std::vector<double> tp(n_classes, 0.0), fp(n_classes, 0.0), fn(n_classes, 0.0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto p = static_cast<std::size_t>(preds[i]), y = static_cast<std::size_t>(labels[i]);
    if (p >= n_classes || y >= n_classes) throw Error(ErrorCode::ShapeMismatch, "f1: class index out of range");
    if (p == y) {
      tp[p] += 1.0;
    } else {
      fp[p] += 1.0;
      fn[y] += 1.0;
    }
  }
  F1Scores s;
  for (std::size_t c = 0; c < n_classes; ++c) {
    s.per_class.push_back(f1_from(tp[c], fp[c], fn[c]));
    s.absent.push_back(tp[c] + fp[c] + fn[c] == 0.0);
  }
  s.macro = mean(s.per_class);
  s.positive = n_classes > 1 ? s.per_class[1] : s.per_class[0];
  return s;
}

F1Scores multilabel_f1(const std::vector<std::vector<int>>& preds, const std::vector<std::vector<int>>& labels) {
  if (preds.size() != labels.size() || preds.empty()) {
    throw Error(ErrorCode::ShapeMismatch, "multilabel_f1: preds and labels differ in length");
  }
  const std::size_t C = labels[0].size();
  F1Scores s;
  for (std::size_t c = 0; c < C; ++c) {
    double tp = 0.0, fp = 0.0, fn = 0.0, pos = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i].size() != C || labels[i].size() != C) throw Error(ErrorCode::ShapeMismatch, "ragged multilabel rows");
      const bool p = preds[i][c] != 0, y = labels[i][c] != 0;
      tp += p && y;
      fp += p && !y;
      fn += !p && y;
      pos += y;
    }
    s.per_class.push_back(f1_from(tp, fp, fn));
    s.absent.push_back(pos == 0.0);
  }
  s.macro = mean(s.per_class);
  s.positive = s.macro;
  return s;
}

double macro_auc(const std::vector<std::vector<double>>& scores, const std::vector<std::vector<int>>& labels) {
  if (scores.size() != labels.size() || scores.empty()) throw Error(ErrorCode::ShapeMismatch, "macro_auc: size mismatch");
  const std::size_t C = labels[0].size();
  double total = 0.0;
  std::size_t used = 0;
  std::vector<double> s(scores.size());
  std::vector<int> y(scores.size());
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      s[i] = scores[i][c];
      y[i] = labels[i][c];
    }
    try {
      total += auc(s, y);
      ++used;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingleClass) throw;
    }
  }
  if (used == 0) throw Error(ErrorCode::SingleClass, "no class has both labels");
  return total / static_cast<double>(used);
}

Interval percentile_interval(std::vector<double> values, double level) {
  if (values.empty()) throw Error(ErrorCode::TooFew, "no bootstrap values");
  std::sort(values.begin(), values.end());
  const double a = (1.0 - level) / 2.0;
  return {quantile_sorted(values, a), quantile_sorted(values, 1.0 - a)};
}

}  // namespace memephys::eval
