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


#include "memephys/harmonize/combat.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "memephys/error.hpp"

namespace memephys::harmonize {

namespace {

struct Prior {
  bool gamma = false;  // shrink gamma
  double gamma_bar = 0.0;
  double tau_sq = 0.0;
  bool delta = false;  // shrink delta^2
  double a = 0.0;
  double b = 0.0;
};

Prior method_of_moments(const std::vector<double>& gamma_hat, const std::vector<double>& delta_sq_hat) {
  Prior p;
  const std::size_t g = gamma_hat.size();
  if (g < 2) return p;
  auto mean_var = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::pair{m, s / static_cast<double>(v.size() - 1)};
  };
  const auto [gm, gv] = mean_var(gamma_hat);
  if (gv > 0.0) {
    p.gamma = true;
    p.gamma_bar = gm;
    p.tau_sq = gv;
  }
  const auto [dm, dv] = mean_var(delta_sq_hat);
  if (dv > 0.0) {
    p.delta = true;
    p.a = (2.0 * dv + dm * dm) / dv;
    p.b = (dm * dv + dm * dm * dm) / dv;
  }
  return p;
}

}  // namespace

std::ptrdiff_t ComBatParams::batch_index(const std::string& b) const {
  const auto it = std::lower_bound(batches.begin(), batches.end(), b);
  if (it == batches.end() || *it != b) return -1;
  return it - batches.begin();
}

ComBatParams combat_fit(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& batch,
                        const ComBatOptions& opts) {
  if (rows.size() != batch.size()) throw Error(ErrorCode::ShapeMismatch, "one batch label per row required");
  ComBatParams p;
  {
    std::set<std::string> uniq(batch.begin(), batch.end());
    p.batches.assign(uniq.begin(), uniq.end());
  }
  if (p.batches.size() < 2) throw Error(ErrorCode::SingletonBatch, "ComBat needs at least two batches");
  const std::size_t nb = p.batches.size();
  const std::size_t nf = rows.empty() ? 0 : rows[0].size();
  std::vector<std::size_t> bidx(rows.size());
  std::vector<std::size_t> rows_per_batch(nb, 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != nf) throw Error(ErrorCode::ShapeMismatch, "ragged feature matrix");
    bidx[r] = static_cast<std::size_t>(p.batch_index(batch[r]));
    ++rows_per_batch[bidx[r]];
  }
  if (!opts.skip_small_batches) {
    for (std::size_t i = 0; i < nb; ++i) {
      if (rows_per_batch[i] < 2) throw Error(ErrorCode::SingletonBatch, "batch '" + p.batches[i] + "' has one row");
    }
  }

  p.grand_mean.assign(nf, 0.0);
  p.pooled_sd.assign(nf, 1.0);
  p.gamma_star.assign(nb, std::vector<double>(nf, 0.0));
  p.delta_sq_star.assign(nb, std::vector<double>(nf, 1.0));
  p.fitted.assign(nb, std::vector<bool>(nf, false));

  // Standardized data per feature and batch; location/scale estimates.
  std::vector<std::vector<std::vector<double>>> z(nf, std::vector<std::vector<double>>(nb));
  std::vector<std::vector<double>> gamma_hat(nb, std::vector<double>(nf, 0.0));
  std::vector<std::vector<double>> delta_sq_hat(nb, std::vector<double>(nf, 1.0));
  for (std::size_t g = 0; g < nf; ++g) {
    std::vector<std::vector<double>> vals(nb);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (!std::isnan(rows[r][g])) vals[bidx[r]].push_back(rows[r][g]);
    }
    std::vector<bool> active(nb, false);
    std::size_t n_active = 0;
    for (std::size_t i = 0; i < nb; ++i) {
      if (vals[i].size() >= 2) {
        active[i] = true;
        ++n_active;
      } else if (!vals[i].empty() && !opts.skip_small_batches) {
        throw Error(ErrorCode::SingletonBatch, "batch '" + p.batches[i] + "' has one value for a feature");
      }
    }
    if (n_active < 2) continue;
    std::vector<double> bmean(nb, 0.0);
    double total = 0.0, n_total = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
      if (!active[i]) continue;
      for (double v : vals[i]) bmean[i] += v;
      total += bmean[i];
      n_total += static_cast<double>(vals[i].size());
      bmean[i] /= static_cast<double>(vals[i].size());
    }
    const double alpha = total / n_total;
    double ss = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
      if (!active[i]) continue;
      for (double v : vals[i]) ss += (v - bmean[i]) * (v - bmean[i]);
    }
    const double sd = std::sqrt(ss / n_total);
    if (!(sd > 0.0)) continue;
    p.grand_mean[g] = alpha;
    p.pooled_sd[g] = sd;
    for (std::size_t i = 0; i < nb; ++i) {
      if (!active[i]) continue;
      auto& zi = z[g][i];
      for (double v : vals[i]) zi.push_back((v - alpha) / sd);
      double m = 0.0;
      for (double v : zi) m += v;
      m /= static_cast<double>(zi.size());
      double s = 0.0;
      for (double v : zi) s += (v - m) * (v - m);
      gamma_hat[i][g] = m;
      delta_sq_hat[i][g] = s / static_cast<double>(zi.size() - 1);
      p.fitted[i][g] = true;
    }
  }

  // Empirical-Bayes shrinkage per batch, priors pooled across features.
  for (std::size_t i = 0; i < nb; ++i) {
    std::vector<double> gh, dh;
    for (std::size_t g = 0; g < nf; ++g) {
      if (p.fitted[i][g] && delta_sq_hat[i][g] > 0.0) {
        gh.push_back(gamma_hat[i][g]);
        dh.push_back(delta_sq_hat[i][g]);
      }
    }
    const Prior prior = method_of_moments(gh, dh);
    for (std::size_t g = 0; g < nf; ++g) {
      if (!p.fitted[i][g]) continue;
      const auto& zi = z[g][i];
      const double n = static_cast<double>(zi.size());
      double g_old = gamma_hat[i][g];
      double d_old = delta_sq_hat[i][g];
      if (!(d_old > 0.0)) {
        // No spread inside the batch: location shift only.
        p.gamma_star[i][g] = g_old;
        p.delta_sq_star[i][g] = 1.0;
        continue;
      }
      std::size_t it = 0;
      for (;;) {
        const double g_new = prior.gamma
                                 ? (n * prior.tau_sq * gamma_hat[i][g] + d_old * prior.gamma_bar) /
                                       (n * prior.tau_sq + d_old)
                                 : gamma_hat[i][g];
        double ss = 0.0;
        for (double v : zi) ss += (v - g_new) * (v - g_new);
        const double d_new = prior.delta ? (prior.b + 0.5 * ss) / (0.5 * n + prior.a - 1.0) : ss / (n - 1.0);
        ++it;
        const double change = std::max(std::fabs(g_new - g_old), std::fabs(d_new - d_old));
        g_old = g_new;
        d_old = d_new;
        if (change < opts.tolerance) break;
        if (it >= opts.max_iter) {
          throw Error(ErrorCode::NonConvergence,
                      "ComBat EB estimates did not settle after " + std::to_string(it) + " iterations");
        }
      }
      p.iterations = std::max(p.iterations, it);
      p.gamma_star[i][g] = g_old;
      p.delta_sq_star[i][g] = d_old;
    }
  }
  return p;
}

std::vector<std::vector<double>> combat_apply(const ComBatParams& p, const std::vector<std::vector<double>>& rows,
                                              const std::vector<std::string>& batch) {
  if (rows.size() != batch.size()) throw Error(ErrorCode::ShapeMismatch, "one batch label per row required");
  std::vector<std::vector<double>> out = rows;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto bi = p.batch_index(batch[r]);
    if (bi < 0) continue;
    const auto i = static_cast<std::size_t>(bi);
    if (rows[r].size() != p.grand_mean.size()) throw Error(ErrorCode::ShapeMismatch, "feature count differs from fit");
    for (std::size_t g = 0; g < rows[r].size(); ++g) {
      const double v = rows[r][g];
      if (!p.fitted[i][g] || std::isnan(v)) continue;
      const double zv = (v - p.grand_mean[g]) / p.pooled_sd[g];
      out[r][g] = p.pooled_sd[g] * (zv - p.gamma_star[i][g]) / std::sqrt(p.delta_sq_star[i][g]) + p.grand_mean[g];
    }
  }
  return out;
}

}  // namespace memephys::harmonize
