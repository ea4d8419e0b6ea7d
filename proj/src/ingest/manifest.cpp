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

#include "memephys/ingest/manifest.hpp"

#include <fstream>
#include <set>

#include "memephys/error.hpp"

namespace memephys::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json trial_to_json(const Trial& t) {
  json j;
  j["trial_id"] = t.trial_id;
  j["meme_id"] = t.meme_id;
  j["subject_id"] = t.subject_id;
  j["session_id"] = t.session_id;
  j["experiment"] = std::string(experiment_name(t.experiment));
  j["stimulus_onset_ms"] = t.stimulus_onset_ms;
  j["response_ms"] = t.response_ms;
  json labels;
  labels["task1"] = std::string(task1_name(t.labels.task1));
  if (t.labels.task2) labels["task2"] = std::string(task2_name(*t.labels.task2));
  json cats = json::array();
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    if (t.labels.task3.test(c)) cats.push_back(std::string(category_name(static_cast<Category>(c))));
  }
  labels["task3"] = cats;
  j["labels"] = labels;
  json paths = json::object();
  if (t.paths.eeg) paths["eeg"] = *t.paths.eeg;
  if (t.paths.et) paths["et"] = *t.paths.et;
  if (t.paths.hr) paths["hr"] = *t.paths.hr;
  if (t.paths.emb) paths["emb"] = *t.paths.emb;
  j["paths"] = paths;
  if (t.eeg_t0_ms != 0.0) j["eeg_t0_ms"] = t.eeg_t0_ms;
  if (t.uv_scale != 1.0) j["uv_scale"] = t.uv_scale;
  if (t.emotion) j["emotion"] = *t.emotion;
  return j;
}

Trial trial_from_json(const nlohmann::json& j) {
  Trial t;
  t.trial_id = j.at("trial_id").get<std::string>();
  t.meme_id = j.at("meme_id").get<std::string>();
  t.subject_id = j.at("subject_id").get<std::string>();
  t.session_id = j.value("session_id", std::string("1"));
  const auto exp = parse_experiment(j.at("experiment").get<std::string>());
  if (!exp) throw Error(ErrorCode::ParseError, "unknown experiment for trial '" + t.trial_id + "'");
  t.experiment = *exp;
  t.stimulus_onset_ms = j.at("stimulus_onset_ms").get<double>();
  t.response_ms = j.at("response_ms").get<double>();
  const auto& labels = j.at("labels");
  const auto t1 = parse_task1(labels.at("task1").get<std::string>());
  if (!t1) throw Error(ErrorCode::ParseError, "unknown task1 label for trial '" + t.trial_id + "'");
  t.labels.task1 = *t1;
  if (auto it = labels.find("task2"); it != labels.end() && !it->is_null()) {
    const auto t2 = parse_task2(it->get<std::string>());
    if (!t2) throw Error(ErrorCode::ParseError, "unknown task2 label for trial '" + t.trial_id + "'");
    t.labels.task2 = *t2;
  }
  if (auto it = labels.find("task3"); it != labels.end()) {
    for (const auto& c : *it) {
      const auto cat = parse_category(c.get<std::string>());
      if (!cat) throw Error(ErrorCode::ParseError, "unknown task3 category for trial '" + t.trial_id + "'");
      t.labels.task3.set(static_cast<std::size_t>(*cat));
    }
  }
  if (auto it = j.find("paths"); it != j.end()) {
    if (it->contains("eeg")) t.paths.eeg = it->at("eeg").get<std::string>();
    if (it->contains("et")) t.paths.et = it->at("et").get<std::string>();
    if (it->contains("hr")) t.paths.hr = it->at("hr").get<std::string>();
    if (it->contains("emb")) t.paths.emb = it->at("emb").get<std::string>();
  }
  t.eeg_t0_ms = j.value("eeg_t0_ms", 0.0);
  t.uv_scale = j.value("uv_scale", 1.0);
  if (auto it = j.find("emotion"); it != j.end() && it->is_string()) t.emotion = it->get<std::string>();
  return t;
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  Manifest m;
  m.base_dir = path.parent_path();
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Trial t;
    try {
      t = trial_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ParseError) throw;
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    validate_trial(t);
    if (!ids.insert(t.trial_id).second) {
      throw Error(ErrorCode::ValidationError, "trial '" + t.trial_id + "': duplicate trial_id");
    }
    for (const auto* p : {&t.paths.eeg, &t.paths.et, &t.paths.hr, &t.paths.emb}) {
      if (*p && !fs::exists(m.resolve(**p))) {
        throw Error(ErrorCode::MissingFile, "trial '" + t.trial_id + "': " + m.resolve(**p).string());
      }
    }
    m.trials.push_back(std::move(t));
  }
  return m;
}

void write_manifest(const fs::path& path, const std::vector<Trial>& trials) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  for (const auto& t : trials) out << trial_to_json(t).dump() << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace memephys::ingest
