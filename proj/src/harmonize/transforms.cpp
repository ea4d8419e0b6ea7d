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


#include "memephys/harmonize/transforms.hpp"

#include <algorithm>
#include <cmath>

#include "memephys/error.hpp"
#include "memephys/util/descriptive.hpp"

namespace memephys::harmonize {

double boxcox_value(double x, double lambda) {
  const double lx = std::log(x);
  if (std::fabs(lambda) < 1e-12) return lx;
  return std::expm1(lambda * lx) / lambda;
}

double boxcox_log_likelihood(std::span<const double> positive, double lambda) {
  const double n = static_cast<double>(positive.size());
  double sum_log = 0.0, m = 0.0;
  std::vector<double> y;
  y.reserve(positive.size());
  for (double v : positive) {
    sum_log += std::log(v);
    y.push_back(boxcox_value(v, lambda));
    m += y.back();
  }
  m /= n;
  double ss = 0.0;
  for (double v : y) ss += (v - m) * (v - m);
  return -0.5 * n * std::log(ss / n) + (lambda - 1.0) * sum_log;
}

BoxCox boxcox_fit(std::span<const double> x) {
  auto v = finite_values(x);
  if (v.size() < 2) throw Error(ErrorCode::DegenerateInput, "Box-Cox needs at least two finite values");
  const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
  const double lo = *lo_it, hi = *hi_it;
  if (lo == hi) throw Error(ErrorCode::DegenerateInput, "Box-Cox on a constant series");
  BoxCox p;
  p.shift = lo <= 0.0 ? 1.0 - lo : 0.0;
  for (double& e : v) e += p.shift;
  p.floor = lo + p.shift;

  auto nll = [&](double l) { return -boxcox_log_likelihood(v, l); };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = -5.0, b = 5.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = nll(c), fd = nll(d);
  while (b - a > 1e-5) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = nll(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = nll(d);
    }
  }
  p.lambda = 0.5 * (a + b);
  return p;
}

std::vector<double> boxcox_apply(std::span<const double> x, const BoxCox& p) {
  std::vector<double> out;
  out.reserve(x.size());
  for (double v : x) {
    if (std::isnan(v)) {
      out.push_back(v);
      continue;
    }
    double s = v + p.shift;
    if (!(s > 0.0)) s = p.floor;
    out.push_back(boxcox_value(s, p.lambda));
  }
  return out;
}

WinsorLimits winsor_fit(std::span<const double> x, double p_lo, double p_hi) {
  if (!(p_lo >= 0.0 && p_lo < p_hi && p_hi <= 1.0)) {
    throw Error(ErrorCode::ConfigError, "winsor limits must satisfy 0 <= lo < hi <= 1");
  }
  auto v = finite_values(x);
  if (v.empty()) throw Error(ErrorCode::DegenerateInput, "winsor limits of an all-missing series");
  std::sort(v.begin(), v.end());
  return {quantile_sorted(v, p_lo), quantile_sorted(v, p_hi)};
}

std::vector<double> winsor_apply(std::span<const double> x, const WinsorLimits& w) {
  std::vector<double> out;
  out.reserve(x.size());
  for (double v : x) out.push_back(std::isnan(v) ? v : std::clamp(v, w.lo, w.hi));
  return out;
}

std::vector<double> winsorize(std::span<const double> x, double p_lo, double p_hi) {
  return winsor_apply(x, winsor_fit(x, p_lo, p_hi));
}

RobustScale robust_fit(std::span<const double> x) {
  const auto v = finite_values(x);
  if (v.empty()) throw Error(ErrorCode::ZeroMAD, "no finite values");
  const double m = mad(v);
  if (!(m > 0.0)) throw Error(ErrorCode::ZeroMAD, "median absolute deviation is zero");
  return {median(v), kMadToSd * m};
}

std::vector<double> robust_apply(std::span<const double> x, const RobustScale& r) {
  std::vector<double> out;
  out.reserve(x.size());
  for (double v : x) out.push_back((v - r.center) / r.scale);
  return out;
}

std::vector<double> robust_z(std::span<const double> x) { return robust_apply(x, robust_fit(x)); }

}  // namespace memephys::harmonize
