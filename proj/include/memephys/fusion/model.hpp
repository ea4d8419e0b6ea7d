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

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memephys/autodiff/layers.hpp"
#include "memephys/autodiff/optim.hpp"
#include "memephys/fusion/config.hpp"
#include "memephys/fusion/dataset.hpp"

namespace memephys::fusion {

struct ModelDims {
  std::size_t text = 0;
  std::size_t eeg = 0;
  std::size_t ethr = 0;
};

ModelDims dims_of(const FusionDataset& d);

/// Padded tensors for a list of memes. Masks are 1 for real rows/tokens.
struct Batch {
  std::size_t size = 0;
  ad::Tensor cls;     // [B, Dt]
  ad::Tensor tokens;  // [B, T, Dt]
  std::vector<double> token_mask;
  ad::Tensor eeg;  // [B, S1, F1], undefined when S1 = 0
  std::vector<double> eeg_mask;
  ad::Tensor ethr;
  std::vector<double> ethr_mask;
  std::vector<double> targets;  // [B * outputs]
  std::vector<std::size_t> seq_len_eeg, seq_len_ethr;
};

Batch make_batch(const FusionDataset& data, std::span<const std::size_t> idx);

struct ForwardResult {
  ad::Tensor logits;  // [B, outputs]
  /// [B, heads, S, T] per modality; empty when the modality is off.
  std::vector<double> eeg_attn, ethr_attn;
  std::size_t eeg_rows = 0, ethr_rows = 0, n_tokens = 0;
};

class FusionModel {
 public:
  FusionModel(const FusionConfig& config, const ModelDims& dims);

  ForwardResult forward(const Batch& batch, bool training = false, Rng* rng = nullptr) const;

  /// Logits [n * outputs] for examples `idx`, in order. Dropout is off.
  std::vector<double> predict_logits(const FusionDataset& data, const std::vector<std::size_t>& idx) const;
  /// Sigmoid of predict_logits.
  std::vector<double> predict(const FusionDataset& data, const std::vector<std::size_t>& idx) const;

  std::vector<ad::NamedParam> parameters() const;
  /// "lower" and "upper" adapter layers; "fusion" is everything else.
  std::vector<ad::Tensor> group(const std::string& which) const;
  std::size_t parameter_count() const;
  static std::size_t expected_parameter_count(const FusionConfig& c, const ModelDims& d);

  const FusionConfig& config() const { return config_; }
  const ModelDims& dims() const { return dims_; }

  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

 private:
  struct Branch {
    ad::Tensor proj_w, proj_b, ln_q_g, ln_q_b, ln_kv_g, ln_kv_b, pool_w;
    ad::CrossAttentionParams attn;
  };
  struct PhysioOut {
    ad::Tensor pooled;
    std::vector<double> attn;
  };

  PhysioOut run_branch(const Branch& br, const ad::Tensor& seq, const std::vector<double>& seq_mask,
                       const ad::Tensor& tokens, const std::vector<double>& token_mask, std::size_t B) const;

  FusionConfig config_;
  ModelDims dims_;
  ad::Tensor a1_w, a1_b, a2_w, a2_b;
  std::vector<Branch> branches_;  // eeg first when enabled
  std::vector<std::string> branch_names_;
  ad::Tensor h1_w, h1_b, h2_w, h2_b;
};

/// JSON record of cross-attention weights for one meme: per modality, per
/// head, a subject-row x token matrix and the top-k tokens per row
/// of the head-averaged weights.
nlohmann::json export_attention(const FusionModel& model, const FusionDataset& data, std::size_t example,
                                const std::vector<std::string>& tokens, std::size_t top_k = 3);

}  // namespace memephys::fusion
