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

#include "memephys/fusion/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "memephys/error.hpp"

namespace memephys::fusion {

using ad::Tensor;

ModelDims dims_of(const FusionDataset& d) { return {d.text_dim, d.eeg_features.size(), d.ethr_features.size()}; }

Batch make_batch(const FusionDataset& data, std::span<const std::size_t> idx) {
  Batch b;
  const std::size_t B = idx.size(), Dt = data.text_dim, F1 = data.eeg_features.size(),
                    F2 = data.ethr_features.size();
  const std::size_t C = num_outputs(data.task);
  b.size = B;
  std::size_t T = 0, S1 = 0, S2 = 0;
  for (std::size_t i : idx) {
    const auto& ex = data.examples.at(i);
    T = std::max(T, ex.n_tokens);
    S1 = std::max(S1, ex.eeg.size());
    S2 = std::max(S2, ex.ethr.size());
  }
  std::vector<double> cls(B * Dt), tok(B * T * Dt, 0.0), eeg(B * S1 * F1, 0.0), ethr(B * S2 * F2, 0.0);
  b.token_mask.assign(B * T, 0.0);
  b.eeg_mask.assign(B * S1, 0.0);
  b.ethr_mask.assign(B * S2, 0.0);
  for (std::size_t k = 0; k < B; ++k) {
    const auto& ex = data.examples[idx[k]];
    std::copy(ex.cls.begin(), ex.cls.end(), cls.begin() + static_cast<std::ptrdiff_t>(k * Dt));
    std::copy(ex.tokens.begin(), ex.tokens.end(), tok.begin() + static_cast<std::ptrdiff_t>(k * T * Dt));
    for (std::size_t t = 0; t < ex.n_tokens; ++t) b.token_mask[k * T + t] = 1.0;
    for (std::size_t s = 0; s < ex.eeg.size(); ++s) {
      std::copy(ex.eeg[s].begin(), ex.eeg[s].end(), eeg.begin() + static_cast<std::ptrdiff_t>((k * S1 + s) * F1));
      b.eeg_mask[k * S1 + s] = 1.0;
    }
    for (std::size_t s = 0; s < ex.ethr.size(); ++s) {
      std::copy(ex.ethr[s].begin(), ex.ethr[s].end(), ethr.begin() + static_cast<std::ptrdiff_t>((k * S2 + s) * F2));
      b.ethr_mask[k * S2 + s] = 1.0;
    }
    b.seq_len_eeg.push_back(ex.eeg.size());
    b.seq_len_ethr.push_back(ex.ethr.size());
    if (ex.targets.size() != C) throw Error(ErrorCode::ShapeMismatch, "targets for " + ex.meme_id);
    b.targets.insert(b.targets.end(), ex.targets.begin(), ex.targets.end());
  }
  b.cls = Tensor::constant({B, Dt}, std::move(cls));
  b.tokens = Tensor::constant({B, T, Dt}, std::move(tok));
  if (S1 > 0) b.eeg = Tensor::constant({B, S1, F1}, std::move(eeg));
  if (S2 > 0) b.ethr = Tensor::constant({B, S2, F2}, std::move(ethr));
  return b;
}

namespace {

Tensor ones(std::size_t n) { return Tensor::parameter({n}, std::vector<double>(n, 1.0)); }

// First-layer head weights, initialized one D-row block at a time so the
// CLS block is the same whatever physio branches exist.
Tensor head_weights(std::size_t blocks, std::size_t D, std::size_t H, const Rng& rng) {
  std::vector<double> v;
  v.reserve(blocks * D * H);
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto blk = ad::glorot(D, H, rng.derive("block", b));
    v.insert(v.end(), blk.values().begin(), blk.values().end());
  }
  return Tensor::parameter({blocks * D, H}, std::move(v));
}

}  // namespace

FusionModel::FusionModel(const FusionConfig& config, const ModelDims& dims) : config_(config), dims_(dims) {
  config_.validate();
  if (dims.text == 0) throw Error(ErrorCode::ConfigError, "text embedding dim must be positive");
  const std::size_t D = config.model_dim, H = config.mlp_hidden, C = num_outputs(config.task);
  const Rng root = Rng(config.seed).derive("fusion/init");
  a1_w = ad::glorot(dims.text, D, root.derive("adapter.lower"));
  a1_b = Tensor::zeros({D}, true);
  a2_w = ad::glorot(D, D, root.derive("adapter.upper"));
  a2_b = Tensor::zeros({D}, true);
  auto add_branch = [&](const std::string& name, std::size_t F) {
    if (F == 0) throw Error(ErrorCode::ConfigError, name + " branch enabled but the data has no " + name + " features");
    Branch br;
    const Rng r = root.derive(name);
    br.proj_w = ad::glorot(F, D, r.derive("proj"));
    br.proj_b = Tensor::zeros({D}, true);
    br.ln_q_g = ones(D);
    br.ln_q_b = Tensor::zeros({D}, true);
    br.ln_kv_g = ones(D);
    br.ln_kv_b = Tensor::zeros({D}, true);
    br.pool_w = Tensor::zeros({D}, true);
    // Zero output projection: the branch contributes nothing at init.
    br.attn = ad::CrossAttentionParams::init(D, D, D, r.derive("attn"), true);
    branches_.push_back(std::move(br));
    branch_names_.push_back(name);
  };
  if (config.use_eeg) add_branch("eeg", dims.eeg);
  if (config.use_ethr) add_branch("ethr", dims.ethr);
  h1_w = head_weights(1 + branches_.size(), D, H, root.derive("head.w1"));
  h1_b = Tensor::zeros({H}, true);
  h2_w = ad::glorot(H, C, root.derive("head.w2"));
  h2_b = Tensor::zeros({C}, true);
}

FusionModel::PhysioOut FusionModel::run_branch(const Branch& br, const Tensor& seq, const std::vector<double>& seq_mask,
                                               const Tensor& tokens, const std::vector<double>& token_mask,
                                               std::size_t B) const {
  PhysioOut out;
  if (!seq.defined()) {
    out.pooled = Tensor::zeros({B, config_.model_dim});
    return out;
  }
  const Tensor q = ad::layer_norm(ad::linear(seq, br.proj_w, br.proj_b), br.ln_q_g, br.ln_q_b);
  const Tensor kv = ad::layer_norm(tokens, br.ln_kv_g, br.ln_kv_b);
  auto att = ad::multihead_cross_attention(q, kv, token_mask, br.attn, config_.heads);
  out.attn = std::move(att.weights);
  out.pooled = ad::attention_pool(att.out, seq_mask, br.pool_w, true);
  return out;
}

ForwardResult FusionModel::forward(const Batch& batch, bool training, Rng* rng) const {
  if (training && config_.dropout > 0.0 && !rng) throw Error(ErrorCode::ConfigError, "training forward needs an rng");
  const std::size_t B = batch.size;
  auto adapt = [&](const Tensor& x) { return ad::linear(ad::gelu(ad::linear(x, a1_w, a1_b)), a2_w, a2_b); };
  std::vector<Tensor> parts{adapt(batch.cls)};
  ForwardResult res;
  if (!branches_.empty()) {
    for (std::size_t k = 0; k < B; ++k) {
      std::size_t rows = 0;
      if (config_.use_eeg) rows += batch.seq_len_eeg[k];
      if (config_.use_ethr) rows += batch.seq_len_ethr[k];
      if (rows == 0) throw Error(ErrorCode::AllMasked, "a meme in the batch has no physiological rows");
    }
    const Tensor tok = adapt(batch.tokens);
    res.n_tokens = batch.tokens.dim(1);
    for (std::size_t i = 0; i < branches_.size(); ++i) {
      const bool eeg = branch_names_[i] == "eeg";
      auto out = run_branch(branches_[i], eeg ? batch.eeg : batch.ethr, eeg ? batch.eeg_mask : batch.ethr_mask, tok,
                            batch.token_mask, B);
      parts.push_back(out.pooled);
      if (eeg) {
        res.eeg_attn = std::move(out.attn);
        res.eeg_rows = batch.eeg.defined() ? batch.eeg.dim(1) : 0;
      } else {
        res.ethr_attn = std::move(out.attn);
        res.ethr_rows = batch.ethr.defined() ? batch.ethr.dim(1) : 0;
      }
    }
  }
  const Tensor h = ad::gelu(ad::linear(ad::concat_last(parts), h1_w, h1_b));
  Rng dummy(0);
  const Tensor hd = ad::dropout(h, config_.dropout, rng ? *rng : dummy, training);
  res.logits = ad::linear(hd, h2_w, h2_b);
  return res;
}

std::vector<double> FusionModel::predict(const FusionDataset& data, const std::vector<std::size_t>& idx) const {
  auto p = predict_logits(data, idx);
  for (auto& z : p) z = ad::sigmoid(z);
  return p;
}

std::vector<double> FusionModel::predict_logits(const FusionDataset& data,
                                                const std::vector<std::size_t>& idx) const {
  std::vector<double> logits;
  const std::size_t bs = std::max<std::size_t>(config_.batch_size, 32);
  for (std::size_t start = 0; start < idx.size(); start += bs) {
    const std::size_t end = std::min(idx.size(), start + bs);
    const auto batch = make_batch(data, std::span(idx).subspan(start, end - start));
    const auto res = forward(batch);
    logits.insert(logits.end(), res.logits.values().begin(), res.logits.values().end());
  }
  return logits;
}

std::vector<ad::NamedParam> FusionModel::parameters() const {
  std::vector<ad::NamedParam> p{{"adapter.lower.w", a1_w}, {"adapter.lower.b", a1_b},
                                {"adapter.upper.w", a2_w}, {"adapter.upper.b", a2_b}};
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    const auto& br = branches_[i];
    const auto& n = branch_names_[i];
    p.push_back({n + ".proj.w", br.proj_w});
    p.push_back({n + ".proj.b", br.proj_b});
    p.push_back({n + ".ln_q.g", br.ln_q_g});
    p.push_back({n + ".ln_q.b", br.ln_q_b});
    p.push_back({n + ".ln_kv.g", br.ln_kv_g});
    p.push_back({n + ".ln_kv.b", br.ln_kv_b});
    br.attn.collect(n + ".attn", p);
    p.push_back({n + ".pool.w", br.pool_w});
  }
  p.push_back({"head.w1", h1_w});
  p.push_back({"head.b1", h1_b});
  p.push_back({"head.w2", h2_w});
  p.push_back({"head.b2", h2_b});
  return p;
}

std::vector<Tensor> FusionModel::group(const std::string& which) const {
  if (which == "lower") return {a1_w, a1_b};
  if (which == "upper") return {a2_w, a2_b};
  if (which != "fusion") throw Error(ErrorCode::ConfigError, "unknown parameter group " + which);
  std::vector<Tensor> out;
  for (const auto& p : parameters()) {
    if (!p.name.starts_with("adapter.")) out.push_back(p.tensor);
  }
  return out;
}

std::size_t FusionModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.tensor.size();
  return n;
}

std::size_t FusionModel::expected_parameter_count(const FusionConfig& c, const ModelDims& d) {
  const std::size_t D = c.model_dim, H = c.mlp_hidden, C = num_outputs(c.task);
  std::size_t n = d.text * D + D + D * D + D;
  std::size_t branches = 0;
  for (auto [on, F] : {std::pair{c.use_eeg, d.eeg}, std::pair{c.use_ethr, d.ethr}}) {
    if (!on) continue;
    ++branches;
    n += F * D + D + 4 * D + 4 * (D * D + D) + D;
  }
  n += (1 + branches) * D * H + H + H * C + C;
  return n;
}

std::vector<std::vector<double>> FusionModel::snapshot() const {
  std::vector<std::vector<double>> out;
  for (const auto& p : parameters()) out.push_back(p.tensor.values());
  return out;
}

void FusionModel::restore(const std::vector<std::vector<double>>& values) {
  auto params = parameters();
  if (values.size() != params.size()) throw Error(ErrorCode::ShapeMismatch, "snapshot does not match the model");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (values[i].size() != params[i].tensor.size()) throw Error(ErrorCode::ShapeMismatch, "snapshot tensor size");
    params[i].tensor.mutable_values() = values[i];
  }
}

nlohmann::json export_attention(const FusionModel& model, const FusionDataset& data, std::size_t example,
                                const std::vector<std::string>& tokens, std::size_t top_k) {
  const auto& ex = data.examples.at(example);
  if (tokens.size() != ex.n_tokens) {
    throw Error(ErrorCode::TokenCountMismatch, "meme " + ex.meme_id + ": " + std::to_string(tokens.size()) +
                                                   " token strings for " + std::to_string(ex.n_tokens) + " embeddings");
  }
  const std::vector<std::size_t> idx{example};
  const auto res = model.forward(make_batch(data, idx));
  const std::size_t heads = model.config().heads, T = res.n_tokens;
  nlohmann::json rec = {{"meme_id", ex.meme_id}, {"tokens", tokens}, {"modalities", nlohmann::json::object()}};
  auto emit = [&](const char* name, const std::vector<double>& w, std::size_t S, std::size_t real_rows) {
    if (w.empty()) return;
    nlohmann::json m = {{"heads", nlohmann::json::array()}, {"top_tokens", nlohmann::json::array()}};
    for (std::size_t h = 0; h < heads; ++h) {
      nlohmann::json mat = nlohmann::json::array();
      for (std::size_t s = 0; s < real_rows; ++s) {
        std::vector<double> row(w.begin() + static_cast<std::ptrdiff_t>((h * S + s) * T),
                                w.begin() + static_cast<std::ptrdiff_t>((h * S + s) * T + T));
        mat.push_back(row);
      }
      m["heads"].push_back(mat);
    }
    // Top-k over the head-averaged row.
    for (std::size_t s = 0; s < real_rows; ++s) {
      std::vector<double> avg(T, 0.0);
      for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t t = 0; t < T; ++t) avg[t] += w[(h * S + s) * T + t] / static_cast<double>(heads);
      }
      std::vector<std::size_t> order(T);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return avg[a] > avg[b]; });
      nlohmann::json top = nlohmann::json::array();
      for (std::size_t k = 0; k < std::min(top_k, T); ++k) {
        top.push_back({{"token", tokens[order[k]]}, {"index", order[k]}, {"weight", avg[order[k]]}});
      }
      m["top_tokens"].push_back(top);
    }
    rec["modalities"][name] = m;
  };
  emit("eeg", res.eeg_attn, res.eeg_rows, ex.eeg.size());
  emit("ethr", res.ethr_attn, res.ethr_rows, ex.ethr.size());
  return rec;
}

}  // namespace memephys::fusion
