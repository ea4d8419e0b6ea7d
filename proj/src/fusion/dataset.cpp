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

#include "memephys/fusion/dataset.hpp"

#include <cmath>

#include "memephys/error.hpp"

namespace memephys::fusion {

std::optional<std::vector<double>> task_targets(const SexismLabels& labels, Task task) {
  if (labels.task1 == Task1::Tie) return std::nullopt;
  const bool sexist = labels.task1 == Task1::Sexist;
  switch (task) {
    case Task::T1: return std::vector<double>{sexist ? 1.0 : 0.0};
    case Task::T2:
      if (!sexist || !labels.task2) return std::nullopt;
      return std::vector<double>{*labels.task2 == Task2::Direct ? 1.0 : 0.0};
    case Task::T3: {
      if (!sexist) return std::nullopt;
      std::vector<double> y(kNumCategories);
      for (std::size_t c = 0; c < kNumCategories; ++c) y[c] = labels.task3.test(c) ? 1.0 : 0.0;
      return y;
    }
  }
  return std::nullopt;
}

std::map<std::string, MemeText> load_text(const ingest::Manifest& manifest) {
  std::map<std::string, MemeText> out;
  std::map<std::string, std::vector<std::string>> token_strings;
  bool index_read = false;
  for (const auto& t : manifest.trials) {
    if (!t.paths.emb || out.count(t.meme_id)) continue;
    const auto path = manifest.resolve(*t.paths.emb);
    if (!index_read) {
      index_read = true;
      const auto index_path = path.parent_path() / "index.ndjson";
      if (std::filesystem::exists(index_path)) {
        for (auto& e : ingest::read_embedding_index(index_path)) token_strings[e.meme_id] = std::move(e.tokens);
      }
    }
    MemeText mt;
    mt.embeddings = ingest::read_embeddings(path);
    if (auto it = token_strings.find(t.meme_id); it != token_strings.end()) {
      if (it->second.size() != mt.embeddings.n_tokens) {
        throw Error(ErrorCode::TokenCountMismatch, "meme " + t.meme_id + ": index lists " +
                                                       std::to_string(it->second.size()) + " tokens, file has " +
                                                       std::to_string(mt.embeddings.n_tokens));
      }
      mt.tokens = it->second;
    }
    out.emplace(t.meme_id, std::move(mt));
  }
  return out;
}

FusionDataset build_dataset(const features::FeatureTable& table, const std::map<std::string, MemeText>& text,
                            Task task) {
  FusionDataset d;
  d.task = task;
  std::vector<std::size_t> eeg_cols, ethr_cols;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto& name = table.columns[c];
    if (name.starts_with("eeg_")) {
      eeg_cols.push_back(c);
      d.eeg_features.push_back(name);
    } else if (name.starts_with("et_") || name.starts_with("hr_") || name == "rt_s") {
      ethr_cols.push_back(c);
      d.ethr_features.push_back(name);
    }
  }
  std::map<std::string, std::vector<std::size_t>> by_meme;
  for (std::size_t r = 0; r < table.size(); ++r) by_meme[table.rows[r].meme_id].push_back(r);

  for (const auto& [meme, rows] : by_meme) {
    auto targets = task_targets(table.rows[rows.front()].labels, task);
    if (!targets) continue;
    auto it = text.find(meme);
    if (it == text.end()) throw Error(ErrorCode::MissingFile, "no embeddings for meme " + meme);
    const auto& emb = it->second.embeddings;
    if (d.text_dim == 0) d.text_dim = emb.dim;
    if (emb.dim != d.text_dim) {
      throw Error(ErrorCode::HeaderMismatch, "meme " + meme + " has embedding dim " + std::to_string(emb.dim) +
                                                 ", expected " + std::to_string(d.text_dim));
    }
    MemeExample ex;
    ex.meme_id = meme;
    ex.cls.assign(emb.cls.begin(), emb.cls.end());
    ex.tokens.assign(emb.tokens.begin(), emb.tokens.end());
    ex.n_tokens = emb.n_tokens;
    ex.token_strings = it->second.tokens;
    ex.targets = std::move(*targets);
    for (std::size_t r : rows) {
      const bool is_eeg = table.rows[r].experiment == Experiment::EEG_HR;
      const auto& cols = is_eeg ? eeg_cols : ethr_cols;
      std::vector<double> row;
      row.reserve(cols.size());
      for (std::size_t c : cols) row.push_back(table.values[r][c]);
      (is_eeg ? ex.eeg : ex.ethr).push_back(std::move(row));
    }
    d.examples.push_back(std::move(ex));
  }
  return d;
}

FusionDataset subset(const FusionDataset& data, const std::vector<std::size_t>& idx) {
  FusionDataset s = data;
  s.examples.clear();
  for (std::size_t i : idx) s.examples.push_back(data.examples.at(i));
  return s;
}

namespace {

void fit_columns(const std::vector<const std::vector<std::vector<double>>*>& blocks, std::size_t n_cols,
                 std::vector<double>& mean, std::vector<double>& sd) {
  mean.assign(n_cols, 0.0);
  sd.assign(n_cols, 1.0);
  for (std::size_t c = 0; c < n_cols; ++c) {
    double s = 0.0, ss = 0.0, n = 0.0;
    for (const auto* rows : blocks) {
      for (const auto& row : *rows) {
        if (std::isfinite(row[c])) {
          s += row[c];
          n += 1.0;
        }
      }
    }
    if (n == 0.0) continue;
    mean[c] = s / n;
    for (const auto* rows : blocks) {
      for (const auto& row : *rows) {
        if (std::isfinite(row[c])) ss += (row[c] - mean[c]) * (row[c] - mean[c]);
      }
    }
    const double v = n > 1.0 ? ss / (n - 1.0) : 0.0;
    sd[c] = v > 0.0 ? std::sqrt(v) : 1.0;
  }
}

void scale_rows(std::vector<std::vector<double>>& rows, const std::vector<double>& mean,
                const std::vector<double>& sd) {
  for (auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = std::isfinite(row[c]) ? (row[c] - mean[c]) / sd[c] : 0.0;
  }
}

}  // namespace

PhysioScaler fit_scaler(const FusionDataset& data, const std::vector<std::size_t>& idx) {
  std::vector<const std::vector<std::vector<double>>*> eeg, ethr;
  for (std::size_t i : idx) {
    eeg.push_back(&data.examples.at(i).eeg);
    ethr.push_back(&data.examples.at(i).ethr);
  }
  PhysioScaler s;
  fit_columns(eeg, data.eeg_features.size(), s.eeg_mean, s.eeg_sd);
  fit_columns(ethr, data.ethr_features.size(), s.ethr_mean, s.ethr_sd);
  return s;
}

void apply_scaler(const PhysioScaler& s, FusionDataset& data) {
  for (auto& ex : data.examples) {
    scale_rows(ex.eeg, s.eeg_mean, s.eeg_sd);
    scale_rows(ex.ethr, s.ethr_mean, s.ethr_sd);
  }
}

}  // namespace memephys::fusion
