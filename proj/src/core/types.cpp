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

#include "memephys/core/types.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "memephys/error.hpp"

namespace memephys {

namespace {

constexpr std::array<std::string_view, kNumBands> kBandNames = {"delta", "theta", "alpha", "beta",
                                                                "gamma"};

constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "ideological_inequality", "stereotyping_dominance", "objectification", "sexual_violence",
    "misogyny_nsv"};

// Ring electrodes sit at 18 degree steps from Fpz on a circle of radius 0.9;
// inner electrodes use the usual azimuthal-equidistant approximations.
ChannelPosition ring(double deg_from_front, double radius = 0.9) {
  const double a = deg_from_front * std::numbers::pi / 180.0;
  return {radius * std::sin(a), radius * std::cos(a)};
}

}  // namespace

std::string_view FrequencyBand::name() const { return band_name(band); }

const std::array<FrequencyBand, kNumBands>& canonical_bands() {
  static const std::array<FrequencyBand, kNumBands> bands = {{
      {Band::Delta, 0.5, 4.0},
      {Band::Theta, 4.0, 8.0},
      {Band::Alpha, 8.0, 13.0},
      {Band::Beta, 13.0, 30.0},
      {Band::Gamma, 30.0, 40.0},
  }};
  return bands;
}

std::optional<Band> band_for_frequency(double hz) {
  const auto& bands = canonical_bands();
  for (const auto& b : bands) {
    if (hz >= b.lo_hz && hz < b.hi_hz) return b.band;
  }
  if (hz == bands.back().hi_hz) return bands.back().band;
  return std::nullopt;
}

std::string_view band_name(Band b) { return kBandNames[static_cast<std::size_t>(b)]; }

std::optional<Band> parse_band(std::string_view name) {
  for (std::size_t i = 0; i < kNumBands; ++i) {
    if (kBandNames[i] == name) return static_cast<Band>(i);
  }
  return std::nullopt;
}

const ChannelLayout& ChannelLayout::standard16() {
  static const ChannelLayout layout(
      {"Fp1", "Fp2", "C3", "C4", "P7", "P8", "O1", "O2", "F7", "F8", "F3", "F4", "T7", "T8", "P3",
       "P4"},
      {
          ring(-18), ring(18),                  // Fp1 Fp2
          {-0.45, 0.0}, {0.45, 0.0},            // C3 C4
          ring(-126), ring(126),                // P7 P8
          ring(-162), ring(162),                // O1 O2
          ring(-54), ring(54),                  // F7 F8
          {-0.37, 0.47}, {0.37, 0.47},          // F3 F4
          ring(-90), ring(90),                  // T7 T8
          {-0.37, -0.47}, {0.37, -0.47},        // P3 P4
      });
  return layout;
}

ChannelLayout::ChannelLayout(std::vector<std::string> names, std::vector<ChannelPosition> positions)
    : names_(std::move(names)), positions_(std::move(positions)) {
  if (names_.size() != kNumChannels || positions_.size() != kNumChannels) {
    throw Error(ErrorCode::ValidationError, "channel layout must have exactly 16 channels");
  }
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != names_.size()) {
    throw Error(ErrorCode::ValidationError, "channel names must be unique");
  }
  for (const auto& p : positions_) {
    if (std::hypot(p.x, p.y) >= 1.0) {
      throw Error(ErrorCode::ValidationError, "channel position outside unit head circle");
    }
  }
}

std::optional<std::size_t> ChannelLayout::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::string_view task1_name(Task1 t) {
  switch (t) {
    case Task1::NonSexist: return "non_sexist";
    case Task1::Sexist: return "sexist";
    case Task1::Tie: return "tie";
  }
  return "";
}

std::string_view task2_name(Task2 t) { return t == Task2::Direct ? "direct" : "judgmental"; }

std::string_view category_name(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<Task1> parse_task1(std::string_view s) {
  if (s == "non_sexist") return Task1::NonSexist;
  if (s == "sexist") return Task1::Sexist;
  if (s == "tie") return Task1::Tie;
  return std::nullopt;
}

std::optional<Task2> parse_task2(std::string_view s) {
  if (s == "direct") return Task2::Direct;
  if (s == "judgmental") return Task2::Judgmental;
  return std::nullopt;
}

std::optional<Category> parse_category(std::string_view s) {
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (kCategoryNames[i] == s) return static_cast<Category>(i);
  }
  return std::nullopt;
}

bool SexismLabels::valid() const {
  if (task1 != Task1::Sexist) return !task2.has_value() && task3.none();
  return true;
}

std::optional<SexismLevel> sexism_level(const SexismLabels& labels) {
  if (labels.task1 == Task1::NonSexist) return SexismLevel::NonSexist;
  if (labels.task1 == Task1::Sexist && labels.task2) {
    return *labels.task2 == Task2::Direct ? SexismLevel::Direct : SexismLevel::Judgmental;
  }
  return std::nullopt;
}

std::string_view level_name(SexismLevel l) {
  switch (l) {
    case SexismLevel::NonSexist: return "non_sexist";
    case SexismLevel::Direct: return "direct";
    case SexismLevel::Judgmental: return "judgmental";
  }
  return "";
}

std::string_view experiment_name(Experiment e) {
  return e == Experiment::ET_HR ? "ET_HR" : "EEG_HR";
}

std::optional<Experiment> parse_experiment(std::string_view s) {
  if (s == "ET_HR") return Experiment::ET_HR;
  if (s == "EEG_HR") return Experiment::EEG_HR;
  return std::nullopt;
}

void validate_trial(const Trial& trial) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ValidationError, "trial '" + trial.trial_id + "': " + what);
  };
  if (trial.trial_id.empty()) fail("empty trial_id");
  if (trial.meme_id.empty()) fail("empty meme_id");
  if (trial.subject_id.empty()) fail("empty subject_id");
  if (!(trial.response_ms > trial.stimulus_onset_ms)) fail("response_ms must exceed stimulus_onset_ms");
  if (!trial.labels.valid()) fail("task2/task3 set on a non-sexist item");
  if (!std::isfinite(trial.uv_scale) || trial.uv_scale == 0.0) fail("uv_scale must be finite and non-zero");
  if (trial.experiment == Experiment::EEG_HR && trial.paths.et) fail("EEG_HR trial carries an ET stream");
  if (trial.experiment == Experiment::ET_HR && trial.paths.eeg) fail("ET_HR trial carries an EEG stream");
}

}  // namespace memephys
