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

#include "memephys/autodiff/optim.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "memephys/error.hpp"
#include "memephys/ingest/formats.hpp"

namespace memephys::ad {

AdamW::AdamW(std::vector<ParamGroup> groups, AdamWOptions opts) : groups_(std::move(groups)), opts_(opts) {
  for (const auto& g : groups_) {
    if (!(g.lr > 0.0)) throw Error(ErrorCode::ConfigError, "learning rate for group " + g.name + " must be > 0");
    auto& mg = m_.emplace_back();
    auto& vg = v_.emplace_back();
    for (const auto& p : g.params) {
      mg.emplace_back(p.size(), 0.0);
      vg.emplace_back(p.size(), 0.0);
    }
  }
}

void AdamW::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(t_));
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const double lr = groups_[gi].lr;
    for (std::size_t pi = 0; pi < groups_[gi].params.size(); ++pi) {
      Tensor& p = groups_[gi].params[pi];
      auto& val = p.mutable_values();
      const auto& g = p.grad();
      if (!g.empty() && g.size() != val.size()) throw Error(ErrorCode::ShapeMismatch, "grad/param size mismatch");
      auto& m = m_[gi][pi];
      auto& v = v_[gi][pi];
      for (std::size_t i = 0; i < val.size(); ++i) {
        const double gr = g.empty() ? 0.0 : g[i];
        val[i] -= lr * opts_.weight_decay * val[i];
        m[i] = opts_.beta1 * m[i] + (1.0 - opts_.beta1) * gr;
        v[i] = opts_.beta2 * v[i] + (1.0 - opts_.beta2) * gr * gr;
        val[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + opts_.eps);
      }
    }
  }
}

void AdamW::zero_grad() {
  for (auto& g : groups_) {
    for (auto& p : g.params) p.zero_grad();
  }
}

void round_to_f32(const std::vector<NamedParam>& params) {
  for (auto p : params) {
    for (auto& v : p.tensor.mutable_values()) v = static_cast<double>(static_cast<float>(v));
  }
}

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& p, const char* ext) {
  auto q = p;
  q += ext;
  return q;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedParam>& params) {
  std::vector<std::uint8_t> bytes;
  nlohmann::json index = nlohmann::json::array();
  for (const auto& p : params) {
    index.push_back({{"name", p.name}, {"shape", p.tensor.shape()}, {"offset", bytes.size()}, {"dtype", "f32"}});
    for (double v : p.tensor.values()) {
      const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(u >> (8 * b)));
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  ingest::write_file_bytes(with_suffix(path, ".bin"), bytes);
  std::ofstream out(with_suffix(path, ".json"));
  out << nlohmann::json{{"format", "memephys-checkpoint"}, {"version", 1}, {"tensors", index}}.dump(1) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + with_suffix(path, ".json").string());
}

void load_checkpoint(const std::filesystem::path& path, const std::vector<NamedParam>& params) {
  const auto jpath = with_suffix(path, ".json");
  std::ifstream in(jpath);
  if (!in) throw Error(ErrorCode::MissingFile, "checkpoint index not found: " + jpath.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, jpath.string() + ": " + e.what());
  }
  const auto bytes = ingest::read_file_bytes(with_suffix(path, ".bin"));
  std::map<std::string, nlohmann::json> entries;
  for (const auto& e : j.at("tensors")) entries[e.at("name").get<std::string>()] = e;
  for (auto p : params) {
    auto it = entries.find(p.name);
    if (it == entries.end()) throw Error(ErrorCode::HeaderMismatch, "checkpoint has no tensor " + p.name);
    const auto shape = it->second.at("shape").get<Shape>();
    if (shape != p.tensor.shape()) {
      throw Error(ErrorCode::HeaderMismatch, "checkpoint shape " + shape_string(shape) + " for " + p.name +
                                                 ", model expects " + shape_string(p.tensor.shape()));
    }
    const auto off = it->second.at("offset").get<std::size_t>();
    if (off + 4 * p.tensor.size() > bytes.size()) throw Error(ErrorCode::HeaderMismatch, "checkpoint payload short");
    auto& vals = p.tensor.mutable_values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(bytes[off + 4 * i + b]) << (8 * b);
      vals[i] = static_cast<double>(std::bit_cast<float>(u));
    }
  }
}

}  // namespace memephys::ad
