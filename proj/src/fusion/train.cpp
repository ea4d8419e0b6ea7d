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

#include "memephys/fusion/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "memephys/error.hpp"
#include "memephys/eval/metrics.hpp"

namespace memephys::fusion {

std::vector<double> inverse_odds_pos_weights(const FusionDataset& data, const std::vector<std::size_t>& idx) {
  const std::size_t C = num_outputs(data.task);
  std::vector<double> pos(C, 0.0), neg(C, 0.0), w(C, 1.0);
  for (std::size_t i : idx) {
    for (std::size_t c = 0; c < C; ++c) (data.examples.at(i).targets[c] > 0.5 ? pos : neg)[c] += 1.0;
  }
  for (std::size_t c = 0; c < C; ++c) {
    if (pos[c] > 0.0 && neg[c] > 0.0) w[c] = neg[c] / pos[c];
  }
  return w;
}

SplitMetrics evaluate_logits(const FusionDataset& data, const std::vector<std::size_t>& idx,
                             const std::vector<double>& logits, const std::vector<double>& pos_weights) {
  const std::size_t C = num_outputs(data.task);
  if (logits.size() != idx.size() * C) throw Error(ErrorCode::ShapeMismatch, "logits do not match the split");
  SplitMetrics m;
  double loss = 0.0;
  std::vector<std::vector<double>> scores(idx.size(), std::vector<double>(C));
  std::vector<std::vector<int>> labels(idx.size(), std::vector<int>(C)), preds = labels;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    for (std::size_t c = 0; c < C; ++c) {
      const double z = logits[k * C + c], y = data.examples.at(idx[k]).targets[c];
      loss += pos_weights[c] * y * ad::softplus(-z) + (1.0 - y) * ad::softplus(z);
      scores[k][c] = z;
      labels[k][c] = y > 0.5;
      preds[k][c] = ad::sigmoid(z) >= 0.5;
    }
  }
  m.loss = idx.empty() ? 0.0 : loss / static_cast<double>(idx.size() * C);
  if (idx.empty()) return m;
  if (C == 1) {
    std::vector<int> y(idx.size()), yhat(idx.size());
    std::vector<double> s(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      y[k] = labels[k][0];
      yhat[k] = preds[k][0];
      s[k] = scores[k][0];
    }
    m.macro_f1 = eval::f1_scores(yhat, y, 2).macro;
    try {
      m.auc = eval::auc(s, y);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingleClass) throw;
    }
  } else {
    m.macro_f1 = eval::multilabel_f1(preds, labels).macro;
    try {
      m.auc = eval::macro_auc(scores, labels);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingleClass) throw;
    }
  }
  return m;
}

TrainResult train(FusionModel& model, const FusionDataset& data, const std::vector<std::size_t>& train_idx,
                  const std::vector<std::size_t>& val_idx, const TrainHooks& hooks) {
  const auto& cfg = model.config();
  if (train_idx.empty()) throw Error(ErrorCode::TooFewExamples, "empty training split");
  TrainResult res;
  res.pos_weights = cfg.pos_weights.empty() ? inverse_odds_pos_weights(data, train_idx) : cfg.pos_weights;
  const auto params = model.parameters();
  if (cfg.precision == Precision::F32) ad::round_to_f32(params);

  const Rng root = Rng(cfg.seed).derive("fusion/train");
  std::size_t epoch = 0;
  std::optional<std::vector<std::vector<double>>> best;
  for (int phase = 1; phase <= 2; ++phase) {
    const std::size_t n_epochs = phase == 1 ? cfg.phase1_epochs : cfg.phase2_epochs;
    if (n_epochs == 0) continue;
    std::vector<ad::ParamGroup> groups;
    if (phase == 1) {
      groups.push_back({"fusion", model.group("fusion"), cfg.phase1_lr});
    } else {
      groups.push_back({"lower", model.group("lower"), cfg.lr_lower});
      groups.push_back({"upper", model.group("upper"), cfg.lr_upper});
      groups.push_back({"head", model.group("fusion"), cfg.lr_head});
    }
    ad::AdamWOptions opts;
    opts.weight_decay = cfg.weight_decay;
    ad::AdamW opt(std::move(groups), opts);
    if (hooks.on_phase_start) hooks.on_phase_start(phase, opt);

    for (std::size_t e = 0; e < n_epochs; ++e) {
      ++epoch;
      Rng er = root.derive("epoch", epoch);
      std::vector<std::size_t> order = train_idx;
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[er.uniform_index(i)]);
      double loss_sum = 0.0;
      for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), start + cfg.batch_size);
        const auto batch = make_batch(data, std::span(order).subspan(start, end - start));
        for (const auto& p : params) p.tensor.node()->grad.clear();
        ad::Tensor loss;
        try {
          const auto out = model.forward(batch, true, &er);
          loss = ad::weighted_bce_with_logits(out.logits, batch.targets, res.pos_weights);
        } catch (const Error& err) {
          if (err.code() != ErrorCode::NonFinite) throw;
          throw Error(ErrorCode::DivergedLoss, "phase " + std::to_string(phase) + " epoch " + std::to_string(epoch) +
                                                   " batch " + std::to_string(start / cfg.batch_size) + ": " +
                                                   err.what());
        }
        loss.backward();
        opt.step();
        if (cfg.precision == Precision::F32) ad::round_to_f32(params);
        loss_sum += loss.item() * static_cast<double>(end - start);
      }
      for (const auto& p : params) p.tensor.node()->grad.clear();
      res.log.push_back({epoch, phase, "train", loss_sum / static_cast<double>(order.size()), {}, {}});
      if (!val_idx.empty()) {
        const auto m = evaluate_logits(data, val_idx, model.predict_logits(data, val_idx), res.pos_weights);
        res.log.push_back({epoch, phase, "val", m.loss, m.macro_f1, m.auc});
        if (m.macro_f1 && (!res.best_val_f1 || *m.macro_f1 > *res.best_val_f1)) {
          res.best_val_f1 = m.macro_f1;
          res.best_epoch = epoch;
          best = model.snapshot();
        }
      }
      if (hooks.on_epoch_end) hooks.on_epoch_end(phase, epoch);
    }
  }
  if (best) {
    model.restore(*best);
  } else {
    res.best_epoch = epoch;
  }
  return res;
}

void write_training_log(std::ostream& out, const std::vector<EpochLog>& log) {
  for (const auto& e : log) {
    nlohmann::json j = {{"epoch", e.epoch}, {"phase", e.phase}, {"split", e.split}, {"loss", e.loss}};
    j["macro_f1"] = e.macro_f1 ? nlohmann::json(*e.macro_f1) : nlohmann::json();
    j["auc"] = e.auc ? nlohmann::json(*e.auc) : nlohmann::json();
    out << j.dump() << '\n';
  }
}

}  // namespace memephys::fusion
