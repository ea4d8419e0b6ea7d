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
#include <filesystem>
#include <string>
#include <vector>

#include "memephys/autodiff/layers.hpp"
#include "memephys/autodiff/tensor.hpp"

namespace memephys::ad {

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct ParamGroup {
  std::string name;
  std::vector<Tensor> params;
  double lr = 1e-3;
};

class AdamW {
 public:
  AdamW(std::vector<ParamGroup> groups, AdamWOptions opts = {});

  /// One update from the current grads. Parameters without a grad (not
  /// reached by the last backward) still decay and advance their moments
  /// with a zero gradient.
  void step();
  void zero_grad();

  const std::vector<ParamGroup>& groups() const { return groups_; }
  std::uint64_t steps() const { return t_; }

 private:
  std::vector<ParamGroup> groups_;
  AdamWOptions opts_;
  std::vector<std::vector<std::vector<double>>> m_, v_;
  std::uint64_t t_ = 0;
};

/// Rounds every value to the nearest float.
void round_to_f32(const std::vector<NamedParam>& params);

/// Writes `<path>.bin` (f32 LE payloads, back to back) and `<path>.json`
/// (name, shape, offset per tensor).
void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedParam>& params);

/// Loads into existing tensors by name; shapes must agree.
void load_checkpoint(const std::filesystem::path& path, const std::vector<NamedParam>& params);

}  // namespace memephys::ad
