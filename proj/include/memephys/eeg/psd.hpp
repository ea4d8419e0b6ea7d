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

#include "memephys/core/types.hpp"

namespace memephys::eeg {

inline constexpr std::size_t kWelchWindow = 256;

struct PsdEstimate {
  std::vector<double> freqs_hz;              // k * fs / window_len, k = 0..window_len/2
  std::vector<std::vector<double>> density;  // [channel][bin], power per Hz
  std::size_t window_len = kWelchWindow;
  double overlap = 0.5;
  std::string window_fn = "hann";
  double fs = 0.0;
  std::size_t n_segments = 0;
};

/// Welch estimate: periodic Hann window, 50% overlap, per-segment mean
/// removal, density scaling 1/(fs * sum(w^2)), one-sided with interior bins
/// doubled. A trailing partial segment is discarded. Throws TooShort below
/// one full window.
PsdEstimate welch_psd(std::span<const double> signal, double fs);
PsdEstimate welch_psd(const std::vector<std::vector<double>>& channels, double fs);

/// Exact integral of the linearly interpolated density over [lo, hi],
/// one value per channel. Throws BandOutOfRange outside [0, fs/2].
std::vector<double> integrate_density(const PsdEstimate& psd, double lo_hz, double hi_hz);

/// Power within a canonical band, per channel.
std::vector<double> band_power(const PsdEstimate& psd, const FrequencyBand& band);

}  // namespace memephys::eeg
