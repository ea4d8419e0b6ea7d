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

#include "memephys/features/table.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "memephys/eeg/features.hpp"
#include "memephys/error.hpp"
#include "memephys/ingest/formats.hpp"
#include "memephys/util/parallel.hpp"

namespace memephys::features {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const std::vector<std::string> kMetaColumns = {"trial_id", "meme_id", "subject_id", "session_id", "experiment",
                                               "task1",    "task2",   "task3",      "emotion"};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

RowMeta meta_of(const Trial& t) {
  return {t.trial_id, t.meme_id, t.subject_id, t.session_id, t.experiment, t.labels, t.emotion};
}

std::optional<std::size_t> FeatureTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t FeatureTable::require_column(const std::string& name) const {
  auto idx = column_index(name);
  if (!idx) throw Error(ErrorCode::ValidationError, "feature table has no column '" + name + "'");
  return *idx;
}

std::vector<double> FeatureTable::column(std::size_t c) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& row : values) out.push_back(row[c]);
  return out;
}

const std::vector<std::string>& all_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = eeg::eeg_feature_names();
    const auto& b = behavior::behavioral_feature_names();
    n.insert(n.end(), b.begin(), b.end());
    return n;
  }();
  return names;
}

std::vector<double> extract_trial_features(const Trial& trial, const EegRecording* eeg,
                                           const std::vector<EtEvent>* et, const std::vector<HeartBeat>* hr,
                                           const ExtractOptions& opts) {
  std::vector<double> row;
  row.reserve(all_feature_names().size());
  if (eeg) {
    const auto v = eeg::extract_eeg_features(trial, *eeg, opts.filter).values();
    row.insert(row.end(), v.begin(), v.end());
  } else {
    row.insert(row.end(), eeg::kEegFeatureCount, kNaN);
  }
  const behavior::TimeWindow window{trial.stimulus_onset_ms, trial.response_ms};
  std::optional<behavior::EtFeatures> etf;
  if (et) etf = behavior::et_features(*et, window);
  std::optional<Summary> hrf;
  if (hr) hrf = behavior::hr_features(*hr, window, opts.hr_unit);
  const auto b = behavior::behavioral_values(etf, hrf, behavior::reaction_time(trial));
  row.insert(row.end(), b.begin(), b.end());
  return row;
}

FeatureTable extract_features(const ingest::Manifest& manifest, const ExtractOptions& opts) {
  FeatureTable table;
  table.columns = all_feature_names();
  for (const auto& t : manifest.trials) table.rows.push_back(meta_of(t));
  table.values = parallel_map<std::vector<double>>(manifest.trials.size(), opts.threads, [&](std::size_t i) {
    const Trial& t = manifest.trials[i];
    std::optional<EegRecording> eeg;
    std::optional<std::vector<EtEvent>> et;
    std::optional<std::vector<HeartBeat>> hr;
    if (t.paths.eeg) eeg = ingest::read_eeg_recording(manifest.resolve(*t.paths.eeg));
    if (t.paths.et) et = ingest::read_et_events(manifest.resolve(*t.paths.et));
    if (t.paths.hr) hr = ingest::read_heart_ibis(manifest.resolve(*t.paths.hr));
    return extract_trial_features(t, eeg ? &*eeg : nullptr, et ? &*et : nullptr, hr ? &*hr : nullptr, opts);
  });
  return table;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  return fmt::format("{}", v);
}

void write_feature_csv(const fs::path& path, const FeatureTable& table) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  for (std::size_t i = 0; i < kMetaColumns.size(); ++i) out << (i ? "," : "") << kMetaColumns[i];
  for (const auto& c : table.columns) out << ',' << c;
  out << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& m = table.rows[r];
    for (const auto* id : {&m.trial_id, &m.meme_id, &m.subject_id, &m.session_id}) {
      if (id->find(',') != std::string::npos) {
        throw Error(ErrorCode::ValidationError, "identifier contains a comma: " + *id);
      }
    }
    std::string task3;
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      if (m.labels.task3.test(c)) {
        if (!task3.empty()) task3 += ';';
        task3 += category_name(static_cast<Category>(c));
      }
    }
    out << m.trial_id << ',' << m.meme_id << ',' << m.subject_id << ',' << m.session_id << ','
        << experiment_name(m.experiment) << ',' << task1_name(m.labels.task1) << ','
        << (m.labels.task2 ? task2_name(*m.labels.task2) : "") << ',' << task3 << ','
        << m.emotion.value_or("");
    for (double v : table.values[r]) out << ',' << format_number(v);
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

FeatureTable read_feature_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path.string() + ": empty file");
  const auto header = split(line, ',');
  if (header.size() < kMetaColumns.size() ||
      !std::equal(kMetaColumns.begin(), kMetaColumns.end(), header.begin())) {
    throw Error(ErrorCode::ParseError, path.string() + ": unexpected header");
  }
  FeatureTable table;
  table.columns.assign(header.begin() + static_cast<std::ptrdiff_t>(kMetaColumns.size()), header.end());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line, ',');
    auto fail = [&](const std::string& what) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": " + what);
    };
    if (cells.size() != header.size()) fail("expected " + std::to_string(header.size()) + " cells");
    RowMeta m;
    m.trial_id = cells[0];
    m.meme_id = cells[1];
    m.subject_id = cells[2];
    m.session_id = cells[3];
    const auto exp = parse_experiment(cells[4]);
    const auto t1 = parse_task1(cells[5]);
    if (!exp || !t1) fail("bad experiment or task1");
    m.experiment = *exp;
    m.labels.task1 = *t1;
    if (!cells[6].empty()) {
      const auto t2 = parse_task2(cells[6]);
      if (!t2) fail("bad task2");
      m.labels.task2 = *t2;
    }
    if (!cells[7].empty()) {
      for (const auto& c : split(cells[7], ';')) {
        const auto cat = parse_category(c);
        if (!cat) fail("bad task3 category '" + c + "'");
        m.labels.task3.set(static_cast<std::size_t>(*cat));
      }
    }
    if (!cells[8].empty()) m.emotion = cells[8];
    std::vector<double> vals;
    vals.reserve(table.columns.size());
    for (std::size_t i = kMetaColumns.size(); i < cells.size(); ++i) {
      if (cells[i].empty()) {
        vals.push_back(kNaN);
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (end != cells[i].c_str() + cells[i].size()) fail("not a number: '" + cells[i] + "'");
      vals.push_back(v);
    }
    table.rows.push_back(std::move(m));
    table.values.push_back(std::move(vals));
  }
  return table;
}

}  // namespace memephys::features
