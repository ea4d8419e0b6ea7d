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

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "memephys/core/types.hpp"
#include "memephys/features/table.hpp"
#include "memephys/stats/hypothesis.hpp"

namespace memephys::stats {

/// Row indices per group of a grouping. `by` is one of task1, task2,
/// level, task3:<category>, emotion. Rows outside every group (ties for
/// task1, non-sexist rows for task2/task3, rows without an emotion label)
/// are left out.
struct RowGroups {
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> rows;
};

RowGroups group_rows(const features::FeatureTable& table, const std::string& by);

AnovaResult anova_for(const features::FeatureTable& table, const RowGroups& groups, const std::string& metric);

struct ChannelContrast {
  std::string channel;
  Band band = Band::Alpha;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double diff = 0.0;  // mean_b - mean_a
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double p_adjusted = 1.0;  // Benjamini-Hochberg when requested, else p
  bool significant = false;
};

inline constexpr std::size_t kNumContrasts = kNumChannels * kNumBands;
inline constexpr double kAlpha = 0.05;

/// Welch t-test per (channel, band) on eeg_<ch>_<band>_power, channel-major
/// in layout order. Significance uses p (or the BH-adjusted p with `fdr`).
std::vector<ChannelContrast> channel_band_contrast(const features::FeatureTable& table,
                                                   const std::vector<std::size_t>& rows_a,
                                                   const std::vector<std::size_t>& rows_b, bool fdr = false);

/// Same on bare matrices: [row][channel * 5 + band].
std::vector<ChannelContrast> channel_band_contrast(const std::vector<std::vector<double>>& a,
                                                   const std::vector<std::vector<double>>& b, bool fdr = false);

void write_anova_csv(const std::filesystem::path& path, const std::vector<AnovaResult>& results);
void write_contrast_csv(const std::filesystem::path& path, const std::vector<ChannelContrast>& contrasts);

struct TopomapLabels {
  std::string condition_a = "Condition 1";
  std::string condition_b = "Condition 2";
};

/// Diverging colour for a difference scaled to [-1, 1]: neutral #f7f7f7 at
/// 0, red for increases, blue for decreases (blue is red with R and B
/// swapped, so opposite differences mirror exactly).
std::array<int, 3> diverging_color(double scaled);

/// Three rows of head panels (condition a, condition b, difference) by five
/// bands. Difference disks use a symmetric scale per band; significant
/// channels get a star glyph (class "star") in the difference row only.
std::string emit_topomap(const std::vector<ChannelContrast>& contrasts, const ChannelLayout& layout,
                         const TopomapLabels& labels = {});

}  // namespace memephys::stats
