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
#include <string>
#include <vector>

#include "memephys/core/types.hpp"
#include "memephys/eeg/filter.hpp"

namespace memephys::eeg {

inline constexpr double kBaselineSeconds = 2.0;
inline constexpr std::size_t kEegStatsPerChannel = 4;
inline constexpr std::size_t kEegFeatureCount = kNumChannels * (kNumBands + kEegStatsPerChannel);

struct EegFeatures {
  std::array<std::array<double, kNumBands>, kNumChannels> band_power{};  // uV^2
  std::array<double, kNumChannels> mean{};
  std::array<double, kNumChannels> sd{};
  std::array<double, kNumChannels> min{};
  std::array<double, kNumChannels> max{};
  /// Stimulus window shorter than one Welch segment: band powers are NaN.
  bool spectral_missing = false;

  /// Flattened in the order of eeg_feature_names().
  std::vector<double> values() const;
};

/// Per channel: eeg_<ch>_<band>_power for the five bands, then
/// eeg_<ch>_mean, _sd, _min, _max.
const std::vector<std::string>& eeg_feature_names();
std::string eeg_power_feature_name(std::size_t channel, Band band);

/// Subtracts each channel's pre-stimulus mean from the post-onset samples.
/// The baseline must span exactly 2 s at fs.
std::vector<std::vector<double>> baseline_correct(const std::vector<std::vector<double>>& trial_signal,
                                                  const std::vector<std::vector<double>>& pre_stimulus,
                                                  double fs);

/// Filter -> baseline correction -> time statistics and band powers over
/// [onset, response). Only the 2 s before onset through the response is
/// read, so samples after the response never influence the result.
EegFeatures extract_eeg_features(const Trial& trial, const EegRecording& rec, const FilterSpec& spec = {});

}  // namespace memephys::eeg
