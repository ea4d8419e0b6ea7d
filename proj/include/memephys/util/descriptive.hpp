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

#include <optional>
#include <span>
#include <vector>

namespace memephys {

double mean(std::span<const double> x);
/// Sample variance (n - 1 denominator); requires n >= 2.
double sample_variance(std::span<const double> x);
double sample_sd(std::span<const double> x);

/// Linear-interpolation quantile (Hyndman-Fan type 7) on a copy of x.
double quantile(std::span<const double> x, double p);
/// Same, on data already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double p);
double median(std::span<const double> x);
/// Median absolute deviation (unscaled).
double mad(std::span<const double> x);

/// mean/sd/min/max/count of a sample with the empty-set convention:
/// all statistics missing when empty, sd missing below two values.
struct Summary {
  std::size_t count = 0;
  std::optional<double> mean;
  std::optional<double> sd;
  std::optional<double> min;
  std::optional<double> max;
};

Summary summarize(std::span<const double> x);

/// Values of x that are not NaN.
std::vector<double> finite_values(std::span<const double> x);

}  // namespace memephys
