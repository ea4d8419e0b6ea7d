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
#include <string>
#include <vector>

#include "memephys/core/types.hpp"
#include "memephys/util/descriptive.hpp"

namespace memephys::behavior {

struct TimeWindow {
  double onset_ms;
  double response_ms;
};

struct EtFeatures {
  Summary fixation;      // clipped durations, ms
  Summary blink;         // clipped durations, ms
  Summary pupil_left;    // mm
  Summary pupil_right;   // mm
};

enum class HrUnit { Bpm, IbiMs };

double reaction_time(const Trial& trial);

/// Events must be sorted by start time. Fixations and blinks overlapping
/// the window are clipped to it; pupil samples count when their timestamp
/// falls inside [onset, response).
EtFeatures et_features(const std::vector<EtEvent>& events, TimeWindow window);

/// Beats with onset <= t < response. Rates are 60000/ibi in Bpm mode, raw
/// IBIs otherwise. No beats in the window gives an all-missing summary.
Summary hr_features(const std::vector<HeartBeat>& beats, TimeWindow window, HrUnit unit = HrUnit::Bpm);

/// et_fixation_*, et_blink_*, et_pupil_left_*, et_pupil_right_* with
/// {mean, sd, min, max, count}; hr_{mean, sd, min, max}; rt_s.
const std::vector<std::string>& behavioral_feature_names();
const std::vector<std::string>& et_feature_names();
const std::vector<std::string>& hr_feature_names();

/// Values in behavioral_feature_names() order, NaN for missing. Absent
/// streams yield all-missing blocks.
std::vector<double> behavioral_values(const std::optional<EtFeatures>& et, const std::optional<Summary>& hr,
                                      double rt_s);

}  // namespace memephys::behavior
