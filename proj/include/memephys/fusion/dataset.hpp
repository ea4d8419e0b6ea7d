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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "memephys/features/table.hpp"
#include "memephys/fusion/config.hpp"
#include "memephys/ingest/formats.hpp"
#include "memephys/ingest/manifest.hpp"

namespace memephys::fusion {

struct MemeExample {
  std::string meme_id;
  std::vector<double> cls;     // text_dim
  std::vector<double> tokens;  // n_tokens * text_dim
  std::size_t n_tokens = 0;
  std::vector<std::string> token_strings;
  std::vector<std::vector<double>> eeg;   // one row per EEG reaction
  std::vector<std::vector<double>> ethr;  // one row per ET/HR reaction
  std::vector<double> targets;            // one per output
};

struct FusionDataset {
  Task task = Task::T1;
  std::size_t text_dim = 0;
  std::vector<std::string> eeg_features;
  std::vector<std::string> ethr_features;
  std::vector<MemeExample> examples;

  std::size_t size() const { return examples.size(); }
};

/// Targets for a task, or nullopt when the meme is out of scope (ties;
/// non-sexist memes for T2 and T3).
std::optional<std::vector<double>> task_targets(const SexismLabels& labels, Task task);

struct MemeText {
  ingest::TokenEmbeddings embeddings;
  std::vector<std::string> tokens;
};

/// Embeddings per meme from the manifest's emb paths. Token strings come
/// from emb/index.ndjson next to the first file when it exists.
std::map<std::string, MemeText> load_text(const ingest::Manifest& manifest);

/// EEG rows come from EEG_HR trials (eeg_* columns); ET/HR rows from ET_HR
/// trials (et_*, hr_* and rt_s). Memes are ordered by id.
FusionDataset build_dataset(const features::FeatureTable& table, const std::map<std::string, MemeText>& text,
                            Task task);

FusionDataset subset(const FusionDataset& data, const std::vector<std::size_t>& idx);

/// Per-column mean/sd standardization of physio rows; missing values
/// become 0 after scaling.
struct PhysioScaler {
  std::vector<double> eeg_mean, eeg_sd, ethr_mean, ethr_sd;
};

PhysioScaler fit_scaler(const FusionDataset& data, const std::vector<std::size_t>& idx);
void apply_scaler(const PhysioScaler& s, FusionDataset& data);

}  // namespace memephys::fusion
