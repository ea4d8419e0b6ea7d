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
#include <vector>

namespace memephys::harmonize {

/// Box-Cox parameters. `shift` is added before the power transform so the
/// fitted series is positive; `floor` is the smallest shifted training
/// value, used for held-out values that would otherwise be non-positive.
struct BoxCox {
  double lambda = 1.0;
  double shift = 0.0;
  double floor = 1.0;
};

double boxcox_value(double x, double lambda);
/// Profile log-likelihood of lambda for positive data.
double boxcox_log_likelihood(std::span<const double> positive, double lambda);

/// Maximum-likelihood lambda by golden-section search on [-5, 5]. NaN
/// entries are ignored. Throws DegenerateInput on a constant series or
/// fewer than two finite values.
BoxCox boxcox_fit(std::span<const double> x);
std::vector<double> boxcox_apply(std::span<const double> x, const BoxCox& p);

struct WinsorLimits {
  double lo = 0.0;
  double hi = 0.0;
};

/// Type-7 quantiles at p_lo and p_hi of the finite values.
WinsorLimits winsor_fit(std::span<const double> x, double p_lo, double p_hi);
std::vector<double> winsor_apply(std::span<const double> x, const WinsorLimits& w);
std::vector<double> winsorize(std::span<const double> x, double p_lo, double p_hi);

inline constexpr double kMadToSd = 1.4826;

struct RobustScale {
  double center = 0.0;
  double scale = 1.0;  // 1.4826 * MAD
};

/// Throws ZeroMAD when the MAD of the finite values is zero.
RobustScale robust_fit(std::span<const double> x);
std::vector<double> robust_apply(std::span<const double> x, const RobustScale& r);
std::vector<double> robust_z(std::span<const double> x);

}  // namespace memephys::harmonize
