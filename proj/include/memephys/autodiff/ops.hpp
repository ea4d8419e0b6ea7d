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

#include <vector>

#include "memephys/autodiff/tensor.hpp"
#include "memephys/util/rng.hpp"

namespace memephys::ad {

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor sum(const Tensor& a);

/// y = xW + b over the last axis of x. `b` may be undefined.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

/// [B,M,K] x [B,K,N] -> [B,M,N]
Tensor bmm(const Tensor& a, const Tensor& b);
/// [B,M,K] x [B,N,K]^T -> [B,M,N]
Tensor bmm_nt(const Tensor& a, const Tensor& b);

Tensor reshape(const Tensor& x, Shape shape);
Tensor slice_last(const Tensor& x, std::size_t start, std::size_t len);
Tensor concat_last(const std::vector<Tensor>& xs);

/// Softmax over the last axis. x is [B, ..., T]; mask is [B, T] with 1 for
/// valid and 0 for masked positions (empty = nothing masked). A row with
/// every position masked throws AllMasked, or yields zeros when
/// `allow_empty` is set.
Tensor masked_softmax(const Tensor& x, const std::vector<double>& mask, bool allow_empty = false);

inline constexpr double kLayerNormEps = 1e-5;
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = kLayerNormEps);

/// Exact (erf) GELU.
Tensor gelu(const Tensor& x);

/// Inverted dropout; identity when not training or rate is 0.
Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training);

/// Mean over elements of -[w y log s(z) + (1 - y) log(1 - s(z))], with
/// `pos_weight` indexed by the last axis.
Tensor weighted_bce_with_logits(const Tensor& logits, const std::vector<double>& targets,
                                const std::vector<double>& pos_weight);

double sigmoid(double z);
double softplus(double z);

}  // namespace memephys::ad
