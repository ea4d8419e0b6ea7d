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

#include "memephys/behavior/features.hpp"

#include <algorithm>
#include <limits>

#include "memephys/error.hpp"

namespace memephys::behavior {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void push_summary(std::vector<double>& out, const Summary& s, bool with_count) {
  out.push_back(s.mean.value_or(kNaN));
  out.push_back(s.sd.value_or(kNaN));
  out.push_back(s.min.value_or(kNaN));
  out.push_back(s.max.value_or(kNaN));
  if (with_count) out.push_back(static_cast<double>(s.count));
}

}  // namespace

double reaction_time(const Trial& trial) {
  if (!(trial.response_ms > trial.stimulus_onset_ms)) {
    throw Error(ErrorCode::NonPositiveRT, "trial '" + trial.trial_id + "'");
  }
  return (trial.response_ms - trial.stimulus_onset_ms) / 1000.0;
}

EtFeatures et_features(const std::vector<EtEvent>& events, TimeWindow w) {
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].start_ms < events[i - 1].start_ms) {
      throw Error(ErrorCode::UnsortedEvents, "event " + std::to_string(i) + " starts before its predecessor");
    }
  }
  std::vector<double> fix, blink, left, right;
  for (const auto& e : events) {
    if (e.type == EtEventType::Pupil) {
      if (e.start_ms >= w.onset_ms && e.start_ms < w.response_ms) {
        if (e.pupil_left_mm) left.push_back(*e.pupil_left_mm);
        if (e.pupil_right_mm) right.push_back(*e.pupil_right_mm);
      }
      continue;
    }
    const double lo = std::max(e.start_ms, w.onset_ms);
    const double hi = std::min(e.end_ms, w.response_ms);
    const bool inside = lo < hi || (e.start_ms == e.end_ms && e.start_ms >= w.onset_ms && e.start_ms < w.response_ms);
    if (!inside) continue;
    (e.type == EtEventType::Fixation ? fix : blink).push_back(hi - lo);
  }
  return {summarize(fix), summarize(blink), summarize(left), summarize(right)};
}

Summary hr_features(const std::vector<HeartBeat>& beats, TimeWindow w, HrUnit unit) {
  std::vector<double> rates;
  for (const auto& b : beats) {
    if (b.t_ms >= w.onset_ms && b.t_ms < w.response_ms) {
      rates.push_back(unit == HrUnit::Bpm ? 60000.0 / b.ibi_ms : b.ibi_ms);
    }
  }
  return summarize(rates);
}

const std::vector<std::string>& et_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const char* fam : {"fixation", "blink", "pupil_left", "pupil_right"}) {
      for (const char* stat : {"mean", "sd", "min", "max", "count"}) {
        n.push_back(std::string("et_") + fam + "_" + stat);
      }
    }
    return n;
  }();
  return names;
}

const std::vector<std::string>& hr_feature_names() {
  static const std::vector<std::string> names = {"hr_mean", "hr_sd", "hr_min", "hr_max"};
  return names;
}

const std::vector<std::string>& behavioral_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = et_feature_names();
    n.insert(n.end(), hr_feature_names().begin(), hr_feature_names().end());
    n.push_back("rt_s");
    return n;
  }();
  return names;
}

std::vector<double> behavioral_values(const std::optional<EtFeatures>& et, const std::optional<Summary>& hr,
                                      double rt_s) {
  std::vector<double> out;
  out.reserve(behavioral_feature_names().size());
  if (et) {
    push_summary(out, et->fixation, true);
    push_summary(out, et->blink, true);
    push_summary(out, et->pupil_left, true);
    push_summary(out, et->pupil_right, true);
  } else {
    out.insert(out.end(), et_feature_names().size(), kNaN);
  }
  if (hr) push_summary(out, *hr, false);
  else out.insert(out.end(), hr_feature_names().size(), kNaN);
  out.push_back(rt_s);
  return out;
}

}  // namespace memephys::behavior
