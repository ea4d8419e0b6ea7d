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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "memephys/behavior/features.hpp"
#include "memephys/core/types.hpp"
#include "memephys/eeg/filter.hpp"
#include "memephys/ingest/manifest.hpp"

namespace memephys::features {

/// Trial metadata carried alongside each feature row so downstream
/// analyses can group without re-reading the manifest.
struct RowMeta {
  std::string trial_id;
  std::string meme_id;
  std::string subject_id;
  std::string session_id;
  Experiment experiment = Experiment::ET_HR;
  SexismLabels labels;
  std::optional<std::string> emotion;
};

RowMeta meta_of(const Trial& t);

/// Rows of per-trial features; NaN marks a missing value.
struct FeatureTable {
  std::vector<std::string> columns;
  std::vector<RowMeta> rows;
  std::vector<std::vector<double>> values;  // [row][column]

  std::optional<std::size_t> column_index(const std::string& name) const;
  std::size_t require_column(const std::string& name) const;
  std::vector<double> column(std::size_t c) const;
  std::size_t size() const { return rows.size(); }
};

/// Canonical column order: the 144 EEG features, then behavioral ones.
const std::vector<std::string>& all_feature_names();

struct ExtractOptions {
  eeg::FilterSpec filter;
  behavior::HrUnit hr_unit = behavior::HrUnit::Bpm;
  std::size_t threads = 1;
};

/// Features of one trial from already-loaded streams.
std::vector<double> extract_trial_features(const Trial& trial, const EegRecording* eeg,
                                           const std::vector<EtEvent>* et, const std::vector<HeartBeat>* hr,
                                           const ExtractOptions& opts);

/// Loads each trial's streams and extracts features; parallel over trials
/// with output identical to the sequential order.
FeatureTable extract_features(const ingest::Manifest& manifest, const ExtractOptions& opts = {});

/// Header: metadata columns (trial_id, meme_id, subject_id, session_id,
/// experiment, task1, task2, task3, emotion), then feature names. Missing
/// values are empty cells; numbers use shortest round-trip formatting.
void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_feature_csv(const std::filesystem::path& path);

/// Shortest decimal that round-trips to the same double.
std::string format_number(double v);

}  // namespace memephys::features
