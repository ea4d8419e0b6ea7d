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

#include "memephys/autodiff/layers.hpp"

#include <cmath>

#include "memephys/error.hpp"

namespace memephys::ad {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> v(fan_in * fan_out);
  for (auto& x : v) x = (2.0 * rng.uniform() - 1.0) * a;
  return Tensor::parameter({fan_in, fan_out}, std::move(v));
}

CrossAttentionParams CrossAttentionParams::init(std::size_t dq, std::size_t dk, std::size_t d, const Rng& rng,
                                                bool zero_output) {
  CrossAttentionParams p;
  p.wq = glorot(dq, d, rng.derive("wq"));
  p.wk = glorot(dk, d, rng.derive("wk"));
  p.wv = glorot(dk, d, rng.derive("wv"));
  p.wo = zero_output ? Tensor::zeros({d, d}, true) : glorot(d, d, rng.derive("wo"));
  p.bq = Tensor::zeros({d}, true);
  p.bk = Tensor::zeros({d}, true);
  p.bv = Tensor::zeros({d}, true);
  p.bo = Tensor::zeros({d}, true);
  return p;
}

void CrossAttentionParams::collect(const std::string& prefix, std::vector<NamedParam>& out) const {
  out.push_back({prefix + ".wq", wq});
  out.push_back({prefix + ".bq", bq});
  out.push_back({prefix + ".wk", wk});
  out.push_back({prefix + ".bk", bk});
  out.push_back({prefix + ".wv", wv});
  out.push_back({prefix + ".bv", bv});
  out.push_back({prefix + ".wo", wo});
  out.push_back({prefix + ".bo", bo});
}

AttentionOutput multihead_cross_attention(const Tensor& q_in, const Tensor& kv_in,
                                          const std::vector<double>& key_mask, const CrossAttentionParams& p,
                                          std::size_t heads) {
  if (q_in.rank() != 3 || kv_in.rank() != 3 || q_in.dim(0) != kv_in.dim(0)) {
    throw Error(ErrorCode::ShapeMismatch,
                "cross attention: q " + shape_string(q_in.shape()) + ", kv " + shape_string(kv_in.shape()));
  }
  const std::size_t B = q_in.dim(0), S = q_in.dim(1), T = kv_in.dim(1), D = p.model_dim();
  if (heads == 0 || D % heads != 0) {
    throw Error(ErrorCode::ShapeMismatch, "model dim " + std::to_string(D) + " not divisible by heads");
  }
  const std::size_t dh = D / heads;
  const Tensor q = linear(q_in, p.wq, p.bq);
  const Tensor k = linear(kv_in, p.wk, p.bk);
  const Tensor v = linear(kv_in, p.wv, p.bv);
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));

  AttentionOutput res;
  res.weights.assign(B * heads * S * T, 0.0);
  std::vector<Tensor> parts;
  for (std::size_t h = 0; h < heads; ++h) {
    const Tensor qh = slice_last(q, h * dh, dh);
    const Tensor kh = slice_last(k, h * dh, dh);
    const Tensor vh = slice_last(v, h * dh, dh);
    const Tensor a = masked_softmax(scale(bmm_nt(qh, kh), sc), key_mask);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t i = 0; i < S * T; ++i) res.weights[(b * heads + h) * S * T + i] = a.values()[b * S * T + i];
    }
    parts.push_back(bmm(a, vh));
  }
  res.out = linear(concat_last(parts), p.wo, p.bo);
  return res;
}

Tensor attention_pool(const Tensor& x, const std::vector<double>& seq_mask, const Tensor& w_pool, bool allow_empty,
                      std::vector<double>* weights) {
  if (x.rank() != 3 || w_pool.shape() != Shape{x.dim(2)}) {
    throw Error(ErrorCode::ShapeMismatch, "attention_pool: x " + shape_string(x.shape()) + ", w " +
                                              shape_string(w_pool.shape()));
  }
  const std::size_t B = x.dim(0), S = x.dim(1), D = x.dim(2);
  const Tensor scores = reshape(linear(x, reshape(w_pool, {D, 1}), Tensor()), {B, S});
  const Tensor a = masked_softmax(scores, seq_mask, allow_empty);
  if (weights) *weights = a.values();
  return reshape(bmm(reshape(a, {B, 1, S}), x), {B, D});
}

}  // namespace memephys::ad
