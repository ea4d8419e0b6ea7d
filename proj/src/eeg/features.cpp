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

#include "memephys/eeg/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "memephys/eeg/psd.hpp"
#include "memephys/error.hpp"
#include "memephys/util/descriptive.hpp"

namespace memephys::eeg {

std::vector<double> EegFeatures::values() const {
  std::vector<double> out;
  out.reserve(kEegFeatureCount);
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    for (double p : band_power[c]) out.push_back(p);
    out.push_back(mean[c]);
    out.push_back(sd[c]);
    out.push_back(min[c]);
    out.push_back(max[c]);
  }
  return out;
}

std::string eeg_power_feature_name(std::size_t channel, Band band) {
  return "eeg_" + ChannelLayout::standard16().names()[channel] + "_" + std::string(band_name(band)) + "_power";
}

const std::vector<std::string>& eeg_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    const auto& layout = ChannelLayout::standard16();
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      for (const auto& b : canonical_bands()) n.push_back(eeg_power_feature_name(c, b.band));
      for (const char* stat : {"mean", "sd", "min", "max"}) {
        n.push_back("eeg_" + layout.names()[c] + "_" + stat);
      }
    }
    return n;
  }();
  return names;
}

std::vector<std::vector<double>> baseline_correct(const std::vector<std::vector<double>>& trial_signal,
                                                  const std::vector<std::vector<double>>& pre_stimulus,
                                                  double fs) {
  const auto expected = static_cast<std::size_t>(std::lround(kBaselineSeconds * fs));
  if (pre_stimulus.size() != trial_signal.size()) {
    throw Error(ErrorCode::BaselineLengthMismatch, "baseline and trial channel counts differ");
  }
  std::vector<std::vector<double>> out(trial_signal.size());
  for (std::size_t c = 0; c < trial_signal.size(); ++c) {
    if (pre_stimulus[c].size() != expected) {
      throw Error(ErrorCode::BaselineLengthMismatch,
                  "baseline has " + std::to_string(pre_stimulus[c].size()) + " samples, expected " +
                      std::to_string(expected));
    }
    const double m = mean(pre_stimulus[c]);
    out[c].reserve(trial_signal[c].size());
    for (double v : trial_signal[c]) out[c].push_back(v - m);
  }
  return out;
}

EegFeatures extract_eeg_features(const Trial& trial, const EegRecording& rec, const FilterSpec& spec) {
  if (rec.n_channels != kNumChannels) {
    throw Error(ErrorCode::ValidationError,
                "trial '" + trial.trial_id + "': EEG has " + std::to_string(rec.n_channels) + " channels");
  }
  const double fs = rec.sample_rate_hz;
  const auto to_index = [&](double ms) {
    return static_cast<std::int64_t>(std::llround((ms - trial.eeg_t0_ms) * fs / 1000.0));
  };
  const std::int64_t onset = to_index(trial.stimulus_onset_ms);
  const std::int64_t response = to_index(trial.response_ms);
  const auto base_len = static_cast<std::int64_t>(std::lround(kBaselineSeconds * fs));
  if (onset - base_len < 0 || response > static_cast<std::int64_t>(rec.n_samples) || response <= onset) {
    throw Error(ErrorCode::WindowOutOfBounds,
                "trial '" + trial.trial_id + "': stimulus window plus 2 s baseline not inside recording");
  }
  const auto first = static_cast<std::size_t>(onset - base_len);
  const auto stim_len = static_cast<std::size_t>(response - onset);
  const auto seg_len = static_cast<std::size_t>(base_len) + stim_len;

  const BandpassFilter filter = BandpassFilter::design(spec, fs);
  std::vector<std::vector<double>> baseline(kNumChannels), stimulus(kNumChannels);
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const float* src = rec.channel(c) + first;
    std::vector<double> seg(seg_len);
    for (std::size_t i = 0; i < seg_len; ++i) seg[i] = static_cast<double>(src[i]) * trial.uv_scale;
    auto filtered = filter.filtfilt(seg);
    baseline[c].assign(filtered.begin(), filtered.begin() + base_len);
    stimulus[c].assign(filtered.begin() + base_len, filtered.end());
  }
  const auto corrected = baseline_correct(stimulus, baseline, fs);

  EegFeatures f;
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const auto& x = corrected[c];
    const Summary s = summarize(x);
    f.mean[c] = *s.mean;
    f.sd[c] = s.sd.value_or(0.0);
    f.min[c] = *s.min;
    f.max[c] = *s.max;
  }
  if (stim_len < kWelchWindow) {
    f.spectral_missing = true;
    for (auto& row : f.band_power) row.fill(std::numeric_limits<double>::quiet_NaN());
    return f;
  }
  const PsdEstimate psd = welch_psd(corrected, fs);
  for (std::size_t b = 0; b < kNumBands; ++b) {
    const auto power = band_power(psd, canonical_bands()[b]);
    for (std::size_t c = 0; c < kNumChannels; ++c) f.band_power[c][b] = power[c];
  }
  return f;
}

}  // namespace memephys::eeg
