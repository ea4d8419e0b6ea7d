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

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "memephys/autodiff/optim.hpp"
#include "memephys/fusion/model.hpp"

namespace memephys::fusion {

struct EpochLog {
  std::size_t epoch = 0;  // 1-based across both phases
  int phase = 1;
  std::string split;  // "train" or "val"
  double loss = 0.0;
  std::optional<double> macro_f1;
  std::optional<double> auc;
};

struct TrainResult {
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  std::optional<double> best_val_f1;
  std::vector<double> pos_weights;
};

struct TrainHooks {
  /// Called after the optimizer for a phase is built.
  std::function<void(int phase, const ad::AdamW& opt)> on_phase_start;
  std::function<void(int phase, std::size_t epoch)> on_epoch_end;
};

/// Inverse odds (negatives / positives) per output over `idx`; 1.0 for an
/// output with no positives or no negatives.
std::vector<double> inverse_odds_pos_weights(const FusionDataset& data, const std::vector<std::size_t>& idx);

struct SplitMetrics {
  double loss = 0.0;
  std::optional<double> macro_f1;
  std::optional<double> auc;
};

/// Loss, macro F1 (threshold 0.5 on probabilities) and AUC of logits
/// [n * outputs] against the targets. AUC is absent for a single-class split.
SplitMetrics evaluate_logits(const FusionDataset& data, const std::vector<std::size_t>& idx,
                             const std::vector<double>& logits, const std::vector<double>& pos_weights);

/// Phase 1 trains everything but the text adapter at phase1_lr. Phase 2
/// trains all parameters with lower/upper/head learning-rate groups. The
/// parameters of the epoch with the best validation macro F1 are kept
/// (the last epoch when `val` is empty).
TrainResult train(FusionModel& model, const FusionDataset& data, const std::vector<std::size_t>& train_idx,
                  const std::vector<std::size_t>& val_idx, const TrainHooks& hooks = {});

void write_training_log(std::ostream& out, const std::vector<EpochLog>& log);

}  // namespace memephys::fusion
