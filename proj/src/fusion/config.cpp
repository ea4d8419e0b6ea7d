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

#include "memephys/fusion/config.hpp"

#include <set>

#include "memephys/error.hpp"

namespace memephys::fusion {

std::string_view task_name(Task t) {
  switch (t) {
    case Task::T1: return "T1";
    case Task::T2: return "T2";
    case Task::T3: return "T3";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view s) {
  if (s == "T1" || s == "task1") return Task::T1;
  if (s == "T2" || s == "task2") return Task::T2;
  if (s == "T3" || s == "task3") return Task::T3;
  return std::nullopt;
}

std::size_t num_outputs(Task t) { return t == Task::T3 ? kNumCategories : 1; }

void FusionConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
  if (heads == 0 || model_dim == 0 || mlp_hidden == 0) fail("heads, model_dim and mlp_hidden must be positive");
  if (model_dim % heads != 0) fail("model_dim must be divisible by heads");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  for (double lr : {phase1_lr, lr_lower, lr_upper, lr_head}) {
    if (!(lr > 0.0)) fail("learning rates must be > 0");
  }
  if (phase1_epochs + phase2_epochs == 0) fail("no training epochs");
  if (batch_size == 0) fail("batch_size must be positive");
  if (weight_decay < 0.0) fail("weight_decay must be >= 0");
  if (!pos_weights.empty()) {
    if (pos_weights.size() != num_outputs(task)) fail("pos_weights needs one value per output");
    for (double w : pos_weights) {
      if (!(w > 0.0)) fail("pos_weights must be > 0");
    }
  }
}

nlohmann::json config_to_json(const FusionConfig& c) {
  return {{"heads", c.heads},
          {"model_dim", c.model_dim},
          {"mlp_hidden", c.mlp_hidden},
          {"dropout", c.dropout},
          {"phase1_epochs", c.phase1_epochs},
          {"phase1_lr", c.phase1_lr},
          {"phase2_epochs", c.phase2_epochs},
          {"phase2_lrs", {{"lower", c.lr_lower}, {"upper", c.lr_upper}, {"head", c.lr_head}}},
          {"task", std::string(task_name(c.task))},
          {"pos_weights", c.pos_weights},
          {"use_eeg", c.use_eeg},
          {"use_ethr", c.use_ethr},
          {"batch_size", c.batch_size},
          {"weight_decay", c.weight_decay},
          {"seed", c.seed},
          {"precision", c.precision == Precision::F32 ? "f32" : "f64"}};
}

FusionConfig config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"heads",        "model_dim",  "mlp_hidden", "dropout",
                                              "phase1_epochs", "phase1_lr",  "phase2_epochs", "phase2_lrs",
                                              "task",         "pos_weights", "use_eeg",    "use_ethr",
                                              "batch_size",   "weight_decay", "seed",      "precision"};
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "fusion config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw Error(ErrorCode::ConfigError, "unknown fusion config key: " + k);
  }
  FusionConfig c;
  try {
    c.heads = j.value("heads", c.heads);
    c.model_dim = j.value("model_dim", c.model_dim);
    c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
    c.dropout = j.value("dropout", c.dropout);
    c.phase1_epochs = j.value("phase1_epochs", c.phase1_epochs);
    c.phase1_lr = j.value("phase1_lr", c.phase1_lr);
    c.phase2_epochs = j.value("phase2_epochs", c.phase2_epochs);
    if (auto it = j.find("phase2_lrs"); it != j.end()) {
      c.lr_lower = it->value("lower", c.lr_lower);
      c.lr_upper = it->value("upper", c.lr_upper);
      c.lr_head = it->value("head", c.lr_head);
    }
    if (auto it = j.find("task"); it != j.end()) {
      const auto t = parse_task(it->get<std::string>());
      if (!t) throw Error(ErrorCode::ConfigError, "unknown task " + it->get<std::string>());
      c.task = *t;
    }
    c.pos_weights = j.value("pos_weights", c.pos_weights);
    c.use_eeg = j.value("use_eeg", c.use_eeg);
    c.use_ethr = j.value("use_ethr", c.use_ethr);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.seed = j.value("seed", c.seed);
    const auto prec = j.value("precision", std::string("f64"));
    if (prec != "f32" && prec != "f64") throw Error(ErrorCode::ConfigError, "precision must be f32 or f64");
    c.precision = prec == "f32" ? Precision::F32 : Precision::F64;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("fusion config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace memephys::fusion
