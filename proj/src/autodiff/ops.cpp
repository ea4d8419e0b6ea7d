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

#include "memephys/autodiff/ops.hpp"

#include <cmath>
#include <numbers>

#include "memephys/error.hpp"

namespace memephys::ad {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(op) + ": " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

void require_rank(const Tensor& a, std::size_t r, const char* op) {
  if (a.rank() != r) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(op) + ": expected rank " + std::to_string(r) + ", got " + shape_string(a.shape()));
  }
}

// Parent i's grad buffer, or nullptr when it does not need one.
std::vector<double>* pgrad(Node& n, std::size_t i) {
  auto& p = n.parents[i];
  return p->requires_grad ? &p->grad_buffer() : nullptr;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

Tensor add(const Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] + b.values()[i];
  return make_result(a.shape(), std::move(y), {a, b}, [](Node& n) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (auto* g = pgrad(n, k)) {
        for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i];
      }
    }
  }, "add");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same(a, b, "mul");
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.values()[i] * b.values()[i];
  return make_result(a.shape(), std::move(y), {a, b}, [](Node& n) {
    const auto& av = n.parents[0]->value;
    const auto& bv = n.parents[1]->value;
    if (auto* g = pgrad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i] * bv[i];
    }
    if (auto* g = pgrad(n, 1)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) (*g)[i] += n.grad[i] * av[i];
    }
  }, "mul");
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> y(a.values());
  for (auto& v : y) v *= c;
  return make_result(a.shape(), std::move(y), {a}, [c](Node& n) {
    auto& g = *pgrad(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += c * n.grad[i];
  }, "scale");
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return make_result({1}, {s}, {a}, [](Node& n) {
    auto& g = *pgrad(n, 0);
    for (auto& v : g) v += n.grad[0];
  }, "sum");
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank(w, 2, "linear weight");
  const std::size_t din = w.dim(0), dout = w.dim(1);
  if (x.rank() == 0 || x.shape().back() != din) {
    throw Error(ErrorCode::ShapeMismatch, "linear: x " + shape_string(x.shape()) + " vs W " + shape_string(w.shape()));
  }
  if (b.defined() && b.shape() != Shape{dout}) {
    throw Error(ErrorCode::ShapeMismatch, "linear: bias " + shape_string(b.shape()));
  }
  const std::size_t rows = x.size() / din;
  Shape out_shape = x.shape();
  out_shape.back() = dout;
  std::vector<double> y(rows * dout, 0.0);
  const auto& xv = x.values();
  const auto& wv = w.values();
  for (std::size_t r = 0; r < rows; ++r) {
    double* yr = &y[r * dout];
    if (b.defined()) {
      for (std::size_t o = 0; o < dout; ++o) yr[o] = b.values()[o];
    }
    for (std::size_t i = 0; i < din; ++i) {
      const double xi = xv[r * din + i];
      if (xi == 0.0) continue;
      const double* wi = &wv[i * dout];
      for (std::size_t o = 0; o < dout; ++o) yr[o] += xi * wi[o];
    }
  }
  std::vector<Tensor> parents{x, w};
  if (b.defined()) parents.push_back(b);
  return make_result(std::move(out_shape), std::move(y), std::move(parents), [rows, din, dout](Node& n) {
    const auto& xv = n.parents[0]->value;
    const auto& wv = n.parents[1]->value;
    const auto& gy = n.grad;
    if (auto* gx = pgrad(n, 0)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < din; ++i) {
          double s = 0.0;
          for (std::size_t o = 0; o < dout; ++o) s += gy[r * dout + o] * wv[i * dout + o];
          (*gx)[r * din + i] += s;
        }
      }
    }
    if (auto* gw = pgrad(n, 1)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < din; ++i) {
          const double xi = xv[r * din + i];
          if (xi == 0.0) continue;
          for (std::size_t o = 0; o < dout; ++o) (*gw)[i * dout + o] += xi * gy[r * dout + o];
        }
      }
    }
    if (n.parents.size() > 2) {
      if (auto* gb = pgrad(n, 2)) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t o = 0; o < dout; ++o) (*gb)[o] += gy[r * dout + o];
        }
      }
    }
  }, "linear");
}

Tensor bmm(const Tensor& a, const Tensor& b) {
  require_rank(a, 3, "bmm");
  require_rank(b, 3, "bmm");
  const std::size_t B = a.dim(0), M = a.dim(1), K = a.dim(2), N = b.dim(2);
  if (b.dim(0) != B || b.dim(1) != K) {
    throw Error(ErrorCode::ShapeMismatch, "bmm: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  std::vector<double> y(B * M * N, 0.0);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t s = 0; s < B; ++s) {
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t k = 0; k < K; ++k) {
        const double x = av[(s * M + m) * K + k];
        for (std::size_t j = 0; j < N; ++j) y[(s * M + m) * N + j] += x * bv[(s * K + k) * N + j];
      }
    }
  }
  return make_result({B, M, N}, std::move(y), {a, b}, [B, M, K, N](Node& n) {
    const auto& av = n.parents[0]->value;
    const auto& bv = n.parents[1]->value;
    const auto& gy = n.grad;
    auto* ga = pgrad(n, 0);
    auto* gb = pgrad(n, 1);
    for (std::size_t s = 0; s < B; ++s) {
      for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t k = 0; k < K; ++k) {
          double acc = 0.0;
          for (std::size_t j = 0; j < N; ++j) {
            const double g = gy[(s * M + m) * N + j];
            acc += g * bv[(s * K + k) * N + j];
            if (gb) (*gb)[(s * K + k) * N + j] += av[(s * M + m) * K + k] * g;
          }
          if (ga) (*ga)[(s * M + m) * K + k] += acc;
        }
      }
    }
  }, "bmm");
}

Tensor bmm_nt(const Tensor& a, const Tensor& b) {
  require_rank(a, 3, "bmm_nt");
  require_rank(b, 3, "bmm_nt");
  const std::size_t B = a.dim(0), M = a.dim(1), K = a.dim(2), N = b.dim(1);
  if (b.dim(0) != B || b.dim(2) != K) {
    throw Error(ErrorCode::ShapeMismatch, "bmm_nt: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  std::vector<double> y(B * M * N, 0.0);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t s = 0; s < B; ++s) {
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t j = 0; j < N; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) acc += av[(s * M + m) * K + k] * bv[(s * N + j) * K + k];
        y[(s * M + m) * N + j] = acc;
      }
    }
  }
  return make_result({B, M, N}, std::move(y), {a, b}, [B, M, K, N](Node& n) {
    const auto& av = n.parents[0]->value;
    const auto& bv = n.parents[1]->value;
    const auto& gy = n.grad;
    auto* ga = pgrad(n, 0);
    auto* gb = pgrad(n, 1);
    for (std::size_t s = 0; s < B; ++s) {
      for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t j = 0; j < N; ++j) {
          const double g = gy[(s * M + m) * N + j];
          if (g == 0.0) continue;
          for (std::size_t k = 0; k < K; ++k) {
            if (ga) (*ga)[(s * M + m) * K + k] += g * bv[(s * N + j) * K + k];
            if (gb) (*gb)[(s * N + j) * K + k] += g * av[(s * M + m) * K + k];
          }
        }
      }
    }
  }, "bmm_nt");
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_size(shape) != x.size()) {
    throw Error(ErrorCode::ShapeMismatch, "reshape " + shape_string(x.shape()) + " to " + shape_string(shape));
  }
  return make_result(std::move(shape), x.values(), {x}, [](Node& n) {
    auto& g = *pgrad(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
  }, "reshape");
}

Tensor slice_last(const Tensor& x, std::size_t start, std::size_t len) {
  const std::size_t d = x.shape().back();
  if (start + len > d) throw Error(ErrorCode::ShapeMismatch, "slice_last out of range");
  const std::size_t rows = x.size() / d;
  Shape shape = x.shape();
  shape.back() = len;
  std::vector<double> y(rows * len);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < len; ++j) y[r * len + j] = x.values()[r * d + start + j];
  }
  return make_result(std::move(shape), std::move(y), {x}, [rows, d, start, len](Node& n) {
    auto& g = *pgrad(n, 0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < len; ++j) g[r * d + start + j] += n.grad[r * len + j];
    }
  }, "slice_last");
}

Tensor concat_last(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw Error(ErrorCode::ShapeMismatch, "concat_last of nothing");
  Shape lead = xs[0].shape();
  lead.pop_back();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& x : xs) {
    Shape l = x.shape();
    const std::size_t w = l.back();
    l.pop_back();
    if (l != lead) throw Error(ErrorCode::ShapeMismatch, "concat_last leading shapes differ");
    widths.push_back(w);
    total += w;
  }
  const std::size_t rows = shape_size(lead);
  std::vector<double> y(rows * total);
  std::size_t off = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < widths[k]; ++j) y[r * total + off + j] = xs[k].values()[r * widths[k] + j];
    }
    off += widths[k];
  }
  Shape shape = lead;
  shape.push_back(total);
  return make_result(std::move(shape), std::move(y), xs, [rows, total, widths](Node& n) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      if (auto* g = pgrad(n, k)) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < widths[k]; ++j) (*g)[r * widths[k] + j] += n.grad[r * total + off + j];
        }
      }
      off += widths[k];
    }
  }, "concat_last");
}

Tensor masked_softmax(const Tensor& x, const std::vector<double>& mask, bool allow_empty) {
  if (x.rank() < 2) throw Error(ErrorCode::ShapeMismatch, "masked_softmax needs rank >= 2");
  const std::size_t T = x.shape().back(), B = x.dim(0);
  if (!mask.empty() && mask.size() != B * T) {
    throw Error(ErrorCode::ShapeMismatch, "masked_softmax: mask size " + std::to_string(mask.size()) + " for " +
                                              shape_string(x.shape()));
  }
  const std::size_t rows = T == 0 ? 0 : x.size() / T;
  const std::size_t rows_per_b = B == 0 ? 0 : rows / B;
  std::vector<double> y(x.size(), 0.0);
  const auto& xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* m = mask.empty() ? nullptr : &mask[(r / rows_per_b) * T];
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < T; ++t) {
      if (!m || m[t] != 0.0) mx = std::max(mx, xv[r * T + t]);
    }
    if (std::isinf(mx)) {
      if (allow_empty) continue;
      throw Error(ErrorCode::AllMasked, "softmax row " + std::to_string(r) + " has every position masked");
    }
    double s = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      if (!m || m[t] != 0.0) {
        y[r * T + t] = std::exp(xv[r * T + t] - mx);
        s += y[r * T + t];
      }
    }
    for (std::size_t t = 0; t < T; ++t) y[r * T + t] /= s;
  }
  return make_result(x.shape(), std::move(y), {x}, [rows, T](Node& n) {
    auto& g = *pgrad(n, 0);
    const auto& yv = n.value;
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t t = 0; t < T; ++t) dot += yv[r * T + t] * n.grad[r * T + t];
      for (std::size_t t = 0; t < T; ++t) g[r * T + t] += yv[r * T + t] * (n.grad[r * T + t] - dot);
    }
  }, "masked_softmax");
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const std::size_t D = x.shape().back();
  if (gamma.shape() != Shape{D} || beta.shape() != Shape{D}) {
    throw Error(ErrorCode::ShapeMismatch, "layer_norm: affine shape vs " + shape_string(x.shape()));
  }
  const std::size_t rows = x.size() / D;
  std::vector<double> y(x.size()), xhat(x.size()), inv_sd(rows);
  const auto& xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    double mu = 0.0;
    for (std::size_t j = 0; j < D; ++j) mu += xv[r * D + j];
    mu /= static_cast<double>(D);
    double var = 0.0;
    for (std::size_t j = 0; j < D; ++j) var += (xv[r * D + j] - mu) * (xv[r * D + j] - mu);
    var /= static_cast<double>(D);
    inv_sd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < D; ++j) {
      xhat[r * D + j] = (xv[r * D + j] - mu) * inv_sd[r];
      y[r * D + j] = xhat[r * D + j] * gamma.values()[j] + beta.values()[j];
    }
  }
  return make_result(x.shape(), std::move(y), {x, gamma, beta},
                     [rows, D, xhat = std::move(xhat), inv_sd = std::move(inv_sd)](Node& n) {
    const auto& gv = n.parents[1]->value;
    auto* gx = pgrad(n, 0);
    auto* gg = pgrad(n, 1);
    auto* gb = pgrad(n, 2);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* gy = &n.grad[r * D];
      const double* xh = &xhat[r * D];
      if (gx) {
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t j = 0; j < D; ++j) {
          const double gxh = gy[j] * gv[j];
          m1 += gxh;
          m2 += gxh * xh[j];
        }
        m1 /= static_cast<double>(D);
        m2 /= static_cast<double>(D);
        for (std::size_t j = 0; j < D; ++j) (*gx)[r * D + j] += inv_sd[r] * (gy[j] * gv[j] - m1 - xh[j] * m2);
      }
      for (std::size_t j = 0; j < D; ++j) {
        if (gg) (*gg)[j] += gy[j] * xh[j];
        if (gb) (*gb)[j] += gy[j];
      }
    }
  }, "layer_norm");
}

Tensor gelu(const Tensor& x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = x.values()[i];
    y[i] = 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2));
  }
  return make_result(x.shape(), std::move(y), {x}, [](Node& n) {
    auto& g = *pgrad(n, 0);
    const auto& xv = n.parents[0]->value;
    const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = xv[i];
      const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
      g[i] += n.grad[i] * (cdf + v * inv_sqrt_2pi * std::exp(-0.5 * v * v));
    }
  }, "gelu");
}

Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training) {
  if (!training || rate <= 0.0) return x;
  if (rate >= 1.0) throw Error(ErrorCode::ConfigError, "dropout rate must be < 1");
  std::vector<double> keep(x.size());
  const double s = 1.0 / (1.0 - rate);
  for (auto& k : keep) k = rng.uniform() < rate ? 0.0 : s;
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x.values()[i] * keep[i];
  return make_result(x.shape(), std::move(y), {x}, [keep = std::move(keep)](Node& n) {
    auto& g = *pgrad(n, 0);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * keep[i];
  }, "dropout");
}

Tensor weighted_bce_with_logits(const Tensor& logits, const std::vector<double>& targets,
                                const std::vector<double>& pos_weight) {
  const std::size_t C = logits.shape().back();
  if (targets.size() != logits.size() || pos_weight.size() != C || logits.size() == 0) {
    throw Error(ErrorCode::ShapeMismatch, "weighted_bce: logits " + shape_string(logits.shape()) + ", " +
                                              std::to_string(targets.size()) + " targets, " +
                                              std::to_string(pos_weight.size()) + " weights");
  }
  for (double w : pos_weight) {
    if (!(w > 0.0)) throw Error(ErrorCode::ConfigError, "pos_weight must be > 0");
  }
  const std::size_t N = logits.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double z = logits.values()[i], y = targets[i], w = pos_weight[i % C];
    // -log s(z) = softplus(-z); -log(1 - s(z)) = softplus(z)
    loss += w * y * softplus(-z) + (1.0 - y) * softplus(z);
  }
  loss /= static_cast<double>(N);
  return make_result({1}, {loss}, {logits}, [targets, pos_weight, N, C](Node& n) {
    auto& g = *pgrad(n, 0);
    const auto& zv = n.parents[0]->value;
    const double s = n.grad[0] / static_cast<double>(N);
    for (std::size_t i = 0; i < N; ++i) {
      const double p = sigmoid(zv[i]), y = targets[i], w = pos_weight[i % C];
      g[i] += s * (w * y * (p - 1.0) + (1.0 - y) * p);
    }
  }, "weighted_bce");
}

}  // namespace memephys::ad
