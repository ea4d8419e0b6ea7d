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
#include <optional>
#include <string>
#include <vector>

#include "memephys/core/types.hpp"

namespace memephys::ingest {

// EEG binary layout (little-endian):
//   "PHYS" | u16 version=1 | u8 kind=0 | u8 reserved | u16 n_channels |
//   f32 sample_rate_hz | u64 n_samples | f32 payload, channel-major
inline constexpr std::size_t kEegHeaderBytes = 22;
inline constexpr std::uint16_t kEegVersion = 1;

EegRecording read_eeg_recording(const std::filesystem::path& path);
void write_eeg_recording(const std::filesystem::path& path, const EegRecording& rec);
/// Decoding half of read_eeg_recording, for in-memory buffers.
EegRecording decode_eeg_recording(const std::vector<std::uint8_t>& bytes, const std::string& origin);
std::vector<std::uint8_t> encode_eeg_recording(const EegRecording& rec);

std::vector<EtEvent> read_et_events(const std::filesystem::path& path);
void write_et_events(const std::filesystem::path& path, const std::vector<EtEvent>& events);

std::vector<HeartBeat> read_heart_ibis(const std::filesystem::path& path);
void write_heart_ibis(const std::filesystem::path& path, const std::vector<HeartBeat>& beats);

// Embedding binary layout (little-endian):
//   "EMBD" | u16 version=1 | u32 dim | u32 n_tokens | f32 cls[dim] |
//   f32 tokens[n_tokens][dim]
inline constexpr std::size_t kEmbHeaderBytes = 14;

struct TokenEmbeddings {
  std::uint32_t dim = 0;
  std::uint32_t n_tokens = 0;
  std::vector<float> cls;     // dim
  std::vector<float> tokens;  // n_tokens * dim, row-major by token
};

/// When expected_dim is set, a differing header dim raises HeaderMismatch.
TokenEmbeddings read_embeddings(const std::filesystem::path& path,
                                std::optional<std::uint32_t> expected_dim = std::nullopt);
void write_embeddings(const std::filesystem::path& path, const TokenEmbeddings& emb);

/// One line of the exporter's NDJSON index.
struct EmbeddingIndexEntry {
  std::string meme_id;
  std::string path;
  std::uint32_t dim = 0;
  std::vector<std::string> tokens;
};

std::vector<EmbeddingIndexEntry> read_embedding_index(const std::filesystem::path& path);
void write_embedding_index(const std::filesystem::path& path,
                           const std::vector<EmbeddingIndexEntry>& entries);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace memephys::ingest
