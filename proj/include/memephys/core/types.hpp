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
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memephys {

// ---------------------------------------------------------------------------
// Frequency bands
// ---------------------------------------------------------------------------

enum class Band : std::uint8_t { Delta, Theta, Alpha, Beta, Gamma };

inline constexpr std::size_t kNumBands = 5;

struct FrequencyBand {
  Band band;
  double lo_hz;
  double hi_hz;

  std::string_view name() const;
};

/// Delta..Gamma in ascending order; contiguous over [0.5, 40] Hz.
const std::array<FrequencyBand, kNumBands>& canonical_bands();

/// Half-open lookup [lo, hi); 40 Hz itself belongs to Gamma. Returns
/// nullopt outside [0.5, 40].
std::optional<Band> band_for_frequency(double hz);

std::string_view band_name(Band b);
std::optional<Band> parse_band(std::string_view name);

// ---------------------------------------------------------------------------
// Channel layout
// ---------------------------------------------------------------------------

inline constexpr std::size_t kNumChannels = 16;
inline constexpr double kEegSampleRateHz = 250.0;

struct ChannelPosition {
  double x;  // right-positive
  double y;  // nose-positive
};

class ChannelLayout {
 public:
  /// The 16-electrode montage used by all recordings, with planar
  /// azimuthal-equidistant positions in the unit head circle.
  static const ChannelLayout& standard16();

  ChannelLayout(std::vector<std::string> names, std::vector<ChannelPosition> positions);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<ChannelPosition>& positions() const { return positions_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

 private:
  std::vector<std::string> names_;
  std::vector<ChannelPosition> positions_;
};

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

enum class Task1 : std::uint8_t { NonSexist, Sexist, Tie };
enum class Task2 : std::uint8_t { Direct, Judgmental };

enum class Category : std::uint8_t {
  IdeologicalInequality,
  StereotypingDominance,
  Objectification,
  SexualViolence,
  MisogynyNSV,
};
inline constexpr std::size_t kNumCategories = 5;

std::string_view task1_name(Task1 t);
std::string_view task2_name(Task2 t);
std::string_view category_name(Category c);
std::optional<Task1> parse_task1(std::string_view s);
std::optional<Task2> parse_task2(std::string_view s);
std::optional<Category> parse_category(std::string_view s);

struct SexismLabels {
  Task1 task1 = Task1::NonSexist;
  std::optional<Task2> task2;
  std::bitset<kNumCategories> task3;

  bool has(Category c) const { return task3.test(static_cast<std::size_t>(c)); }
  /// task2/task3 are only allowed on sexist items.
  bool valid() const;
};

/// Three-level grouping used for the cognitive-load comparisons.
enum class SexismLevel : std::uint8_t { NonSexist, Direct, Judgmental };
std::optional<SexismLevel> sexism_level(const SexismLabels& labels);
std::string_view level_name(SexismLevel l);

// ---------------------------------------------------------------------------
// Trials and recordings
// ---------------------------------------------------------------------------

enum class Experiment : std::uint8_t { ET_HR, EEG_HR };
std::string_view experiment_name(Experiment e);
std::optional<Experiment> parse_experiment(std::string_view s);

struct TrialPaths {
  std::optional<std::string> eeg;
  std::optional<std::string> et;
  std::optional<std::string> hr;
  std::optional<std::string> emb;
};

struct Trial {
  std::string trial_id;
  std::string meme_id;
  std::string subject_id;
  std::string session_id;
  Experiment experiment = Experiment::ET_HR;
  double stimulus_onset_ms = 0.0;
  double response_ms = 0.0;
  SexismLabels labels;
  TrialPaths paths;
  /// Time of EEG sample 0 on the trial clock.
  double eeg_t0_ms = 0.0;
  /// Linear factor applied to EEG samples on load (files are expected in uV).
  double uv_scale = 1.0;
  /// Optional externally supplied emotion label for emotion contrasts.
  std::optional<std::string> emotion;
};

/// Throws ValidationError naming the trial when an invariant is broken.
void validate_trial(const Trial& trial);

struct EegRecording {
  float sample_rate_hz = static_cast<float>(kEegSampleRateHz);
  std::uint16_t n_channels = 0;
  std::uint64_t n_samples = 0;
  std::vector<float> samples;  // channel-major

  const float* channel(std::size_t c) const { return samples.data() + c * n_samples; }
  float* channel(std::size_t c) { return samples.data() + c * n_samples; }
};

enum class EtEventType : std::uint8_t { Fixation, Blink, Pupil };

struct EtEvent {
  EtEventType type = EtEventType::Fixation;
  double start_ms = 0.0;
  double end_ms = 0.0;
  std::optional<double> pupil_left_mm;
  std::optional<double> pupil_right_mm;

  double duration_ms() const { return end_ms - start_ms; }
};

struct HeartBeat {
  double t_ms = 0.0;
  double ibi_ms = 0.0;
};

}  // namespace memephys
