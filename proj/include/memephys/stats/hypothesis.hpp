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
#include <string>
#include <vector>

namespace memephys::stats {

struct GroupStats {
  std::string name;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
};

struct AnovaResult {
  std::string metric;
  std::vector<GroupStats> groups;
  double F = 0.0;
  double df_between = 0.0;
  double df_within = 0.0;
  double p = 1.0;
};

/// Classic one-way ANOVA. NaN entries are ignored. Needs two or more
/// groups of at least two values (InsufficientN); all-constant data raises
/// DegenerateGroups.
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups,
                          const std::vector<std::string>& names = {});

struct TTestResult {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double diff = 0.0;  // mean_b - mean_a
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Welch's unequal-variance t-test of b against a, two-sided, with the
/// Welch-Satterthwaite df. NaN entries are ignored; fewer than two values
/// on a side raises InsufficientN.
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Benjamini-Hochberg adjusted p-values, in input order.
std::vector<double> benjamini_hochberg(std::span<const double> p);

}  // namespace memephys::stats
