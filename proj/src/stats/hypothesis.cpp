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


#include "memephys/stats/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "memephys/error.hpp"
#include "memephys/stats/special.hpp"
#include "memephys/util/descriptive.hpp"

namespace memephys::stats {

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups, const std::vector<std::string>& names) {
  if (groups.size() < 2) throw Error(ErrorCode::InsufficientN, "ANOVA needs at least two groups");
  AnovaResult r;
  std::vector<std::vector<double>> g;
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    g.push_back(finite_values(groups[i]));
    if (g.back().size() < 2) throw Error(ErrorCode::InsufficientN, "ANOVA group with fewer than two values");
    GroupStats s;
    s.name = i < names.size() ? names[i] : std::to_string(i);
    s.n = g.back().size();
    s.mean = mean(g.back());
    s.sd = sample_sd(g.back());
    r.groups.push_back(s);
    for (double v : g.back()) total += v;
    n += s.n;
  }
  const double grand = total / static_cast<double>(n);
  double ssb = 0.0, ssw = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = r.groups[i].mean - grand;
    ssb += static_cast<double>(g[i].size()) * d * d;
    for (double v : g[i]) ssw += (v - r.groups[i].mean) * (v - r.groups[i].mean);
  }
  r.df_between = static_cast<double>(g.size() - 1);
  r.df_within = static_cast<double>(n - g.size());
  if (ssw == 0.0 && ssb == 0.0) throw Error(ErrorCode::DegenerateGroups, "no variance within or between groups");
  r.F = ssw == 0.0 ? std::numeric_limits<double>::infinity() : (ssb / r.df_between) / (ssw / r.df_within);
  r.p = f_sf(r.F, r.df_between, r.df_within);
  return r;
}

TTestResult welch_t_test(std::span<const double> a_in, std::span<const double> b_in) {
  const auto a = finite_values(a_in), b = finite_values(b_in);
  if (a.size() < 2 || b.size() < 2) throw Error(ErrorCode::InsufficientN, "t-test needs two values per side");
  TTestResult r;
  r.mean_a = mean(a);
  r.mean_b = mean(b);
  r.diff = r.mean_b - r.mean_a;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double sa = sample_variance(a) / na, sb = sample_variance(b) / nb;
  const double se2 = sa + sb;
  if (se2 == 0.0) {
    r.t = r.diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.diff);
    r.df = na + nb - 2.0;
    r.p = r.diff == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = r.diff / std::sqrt(se2);
  r.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
  r.p = t_two_sided_p(r.t, r.df);
  return r;
}

std::vector<double> benjamini_hochberg(std::span<const double> p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return p[i] < p[j]; });
  std::vector<double> q(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const std::size_t i = order[k];
    running = std::min(running, p[i] * static_cast<double>(m) / static_cast<double>(k + 1));
    q[i] = running;
  }
  return q;
}

}  // namespace memephys::stats
