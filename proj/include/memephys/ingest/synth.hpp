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
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memephys/core/types.hpp"
#include "memephys/ingest/formats.hpp"
#include "memephys/ingest/manifest.hpp"
#include "memephys/util/rng.hpp"

namespace memephys::ingest {

struct MeanSd {
  double mean = 0.0;
  double sd = 1.0;
};

/// Per-level parameters for one behavioral measure.
struct LevelParams {
  MeanSd non_sexist;
  MeanSd direct;
  MeanSd judgmental;

  const MeanSd& at(SexismLevel l) const;
};

/// Condition selector used by effects: "non_sexist", "sexist", "direct",
/// "judgmental", "tie", or a task3 category name.
bool condition_matches(const std::string& condition, const SexismLabels& labels);

struct EegEffect {
  std::string condition;
  std::string channel;
  Band band = Band::Alpha;
  /// Added band power as a fraction of the baseline power (+0.5 = +50%).
  double rel_offset = 0.0;
};

struct PupilEffect {
  std::string condition;
  bool right_eye = true;
  double offset_mm = 0.0;
};

struct EmbeddingSpec {
  std::uint32_t dim = 16;
  std::uint32_t min_tokens = 6;
  std::uint32_t max_tokens = 12;
  std::uint32_t vocab = 200;
  /// Magnitude of the label direction added to CLS and token embeddings.
  double label_signal = 0.0;
};

struct SynthSpec {
  std::size_t n_memes = 100;
  std::size_t subjects_per_meme = 2;
  std::size_t n_subjects = 16;
  /// "both" alternates ET_HR / EEG_HR across a meme's viewers.
  std::string experiments = "both";
  double p_non_sexist = 0.5;
  double p_direct = 0.25;
  double p_judgmental = 0.25;
  double p_tie = 0.0;
  std::array<double, kNumCategories> category_probs{0.3, 0.3, 0.3, 0.2, 0.2};

  std::array<double, kNumBands> eeg_baseline_power{20.0, 10.0, 12.0, 6.0, 2.0};  // uV^2
  std::vector<EegEffect> eeg_effect;
  /// Log-normal per-subject amplitude gain (headset placement); 0 disables.
  double subject_gain_sd = 0.0;

  LevelParams rt_s{{13.68, 9.10}, {15.84, 11.40}, {17.58, 12.08}};
  LevelParams fixation_count{{40.31, 28.37}, {44.42, 33.67}, {50.34, 37.61}};
  LevelParams blink_duration_ms{{267.36, 57.65}, {261.13, 55.27}, {263.05, 50.58}};
  MeanSd fixation_duration_ms{250.0, 80.0};
  double blinks_per_s = 0.3;
  double pupil_rate_hz = 5.0;
  MeanSd pupil_mm{3.5, 0.4};
  std::vector<PupilEffect> pupil_effect;
  MeanSd ibi_ms{800.0, 60.0};

  EmbeddingSpec embedding;
  std::uint64_t seed = 1;

  /// Throws ValidationError on an invalid spec.
  void validate() const;
};

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);

/// In-memory synthetic dataset. Paths in `trials` are relative and match
/// the layout write_dataset produces.
struct SyntheticDataset {
  std::vector<Trial> trials;
  std::vector<std::optional<EegRecording>> eeg;
  std::vector<std::optional<std::vector<EtEvent>>> et;
  std::vector<std::optional<std::vector<HeartBeat>>> hr;
  std::vector<std::string> meme_ids;
  std::vector<TokenEmbeddings> embeddings;        // per meme
  std::vector<std::vector<std::string>> tokens;   // per meme
};

/// Deterministic in (spec, seed); each trial draws from its own derived
/// stream so `threads` never changes the output.
SyntheticDataset synthesize(const SynthSpec& spec, std::size_t threads = 1);

/// Writes manifest.ndjson, eeg/, et/, hr/, emb/ (with index.ndjson) and
/// synth_spec.json under out_dir; returns the loaded manifest.
Manifest write_dataset(const SyntheticDataset& data, const SynthSpec& spec, const std::filesystem::path& out_dir);

Manifest generate_synthetic(const SynthSpec& spec, const std::filesystem::path& out_dir, std::size_t threads = 1);

/// Band-limited Gaussian noise: white noise through the zero-phase
/// Butterworth band-pass for `band`, scaled so its expected variance equals
/// `power`.
std::vector<double> band_limited_noise(std::size_t n, double fs, const FrequencyBand& band, double power,
                                       Rng& rng);

}  // namespace memephys::ingest
