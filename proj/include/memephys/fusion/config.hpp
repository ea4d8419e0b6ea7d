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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memephys/core/types.hpp"

namespace memephys::fusion {

enum class Task { T1, T2, T3 };

std::string_view task_name(Task t);
std::optional<Task> parse_task(std::string_view s);
std::size_t num_outputs(Task t);

enum class Precision { F64, F32 };

struct FusionConfig {
  std::size_t heads = 4;
  std::size_t model_dim = 256;
  std::size_t mlp_hidden = 128;
  double dropout = 0.1;
  std::size_t phase1_epochs = 5;
  double phase1_lr = 5e-5;
  std::size_t phase2_epochs = 10;
  double lr_lower = 2e-6;
  double lr_upper = 1e-5;
  double lr_head = 5e-5;
  Task task = Task::T1;
  /// Empty: inverse odds (neg/pos) from the training labels.
  std::vector<double> pos_weights;
  bool use_eeg = true;
  bool use_ethr = true;
  std::size_t batch_size = 8;
  double weight_decay = 0.01;
  std::uint64_t seed = 1;
  Precision precision = Precision::F64;

  /// Throws ConfigError.
  void validate() const;
  bool uses_physio() const { return use_eeg || use_ethr; }
};

nlohmann::json config_to_json(const FusionConfig& c);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
FusionConfig config_from_json(const nlohmann::json& j);

}  // namespace memephys::fusion
