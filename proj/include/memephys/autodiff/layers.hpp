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

#include <string>
#include <vector>

#include "memephys/autodiff/ops.hpp"
#include "memephys/autodiff/tensor.hpp"

namespace memephys::ad {

struct NamedParam {
  std::string name;
  Tensor tensor;
};

/// Glorot-uniform [fan_in, fan_out] matrix from its own stream.
Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng rng);

struct CrossAttentionParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;

  static CrossAttentionParams init(std::size_t dq, std::size_t dk, std::size_t d, const Rng& rng,
                                   bool zero_output = false);
  void collect(const std::string& prefix, std::vector<NamedParam>& out) const;
  std::size_t model_dim() const { return wq.dim(1); }
};

struct AttentionOutput {
  Tensor out;                   // [B, S, D]
  std::vector<double> weights;  // [B, heads, S, T]
};

/// Scaled dot-product attention per head with queries from q_in [B,S,Dq]
/// and keys/values from kv_in [B,T,Dk]. key_mask is [B,T] (1 = valid).
AttentionOutput multihead_cross_attention(const Tensor& q_in, const Tensor& kv_in,
                                          const std::vector<double>& key_mask, const CrossAttentionParams& p,
                                          std::size_t heads);

/// softmax(x w) weighted sum over S of x [B,S,D]; seq_mask is [B,S]. With
/// `allow_empty` a row with no valid position pools to zeros.
Tensor attention_pool(const Tensor& x, const std::vector<double>& seq_mask, const Tensor& w_pool,
                      bool allow_empty = false, std::vector<double>* weights = nullptr);

}  // namespace memephys::ad
