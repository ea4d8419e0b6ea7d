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

#include "memephys/ingest/formats.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <nlohmann/json.hpp>

#include "memephys/error.hpp"

namespace memephys::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class ByteWriter {
 public:
  void raw(const char* s, std::size_t n) { out_.insert(out_.end(), s, s + n); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, std::size_t pos = 0) : b_(bytes), pos_(pos) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  float f32() { return std::bit_cast<float>(u32()); }

 private:
  std::uint64_t le(int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(b_[pos_ + i]) << (8 * i);
    pos_ += n;
    return v;
  }
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_;
};

std::vector<json> read_ndjson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::vector<json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

double number_field(const json& j, const char* key, const fs::path& path) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw Error(ErrorCode::ParseError, path.string() + ": missing numeric field '" + key + "'");
  }
  return it->get<double>();
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

// --- EEG ---------------------------------------------------------------------

std::vector<std::uint8_t> encode_eeg_recording(const EegRecording& rec) {
  if (rec.samples.size() != static_cast<std::size_t>(rec.n_channels) * rec.n_samples) {
    throw Error(ErrorCode::HeaderMismatch, "sample buffer does not match n_channels x n_samples");
  }
  ByteWriter w;
  w.raw("PHYS", 4);
  w.u16(kEegVersion);
  w.u8(0);
  w.u8(0);
  w.u16(rec.n_channels);
  w.f32(rec.sample_rate_hz);
  w.u64(rec.n_samples);
  for (float v : rec.samples) w.f32(v);
  return w.take();
}

EegRecording decode_eeg_recording(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "PHYS", 4) != 0) {
    throw Error(ErrorCode::BadMagic, origin);
  }
  if (bytes.size() < kEegHeaderBytes) throw Error(ErrorCode::HeaderMismatch, origin + ": truncated header");
  ByteReader r(bytes, 4);
  const std::uint16_t version = r.u16();
  const std::uint8_t kind = r.u8();
  r.u8();
  if (version != kEegVersion || kind != 0) {
    throw Error(ErrorCode::HeaderMismatch, origin + ": unsupported version/kind");
  }
  EegRecording rec;
  rec.n_channels = r.u16();
  rec.sample_rate_hz = r.f32();
  rec.n_samples = r.u64();
  const std::uint64_t expected = kEegHeaderBytes + 4ULL * rec.n_channels * rec.n_samples;
  if (bytes.size() != expected) {
    std::ostringstream msg;
    msg << origin << ": header declares " << expected << " bytes, file has " << bytes.size();
    throw Error(ErrorCode::HeaderMismatch, msg.str());
  }
  rec.samples.resize(static_cast<std::size_t>(rec.n_channels) * rec.n_samples);
  for (std::size_t i = 0; i < rec.samples.size(); ++i) {
    const float v = r.f32();
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::NonFiniteSample, origin + ": sample " + std::to_string(i));
    }
    rec.samples[i] = v;
  }
  return rec;
}

EegRecording read_eeg_recording(const fs::path& path) {
  return decode_eeg_recording(read_file_bytes(path), path.string());
}

void write_eeg_recording(const fs::path& path, const EegRecording& rec) {
  write_file_bytes(path, encode_eeg_recording(rec));
}

// --- ET / HR -----------------------------------------------------------------

std::vector<EtEvent> read_et_events(const fs::path& path) {
  std::vector<EtEvent> events;
  for (const auto& j : read_ndjson(path)) {
    EtEvent e;
    const std::string t = j.value("t", "");
    if (t == "fixation") e.type = EtEventType::Fixation;
    else if (t == "blink") e.type = EtEventType::Blink;
    else if (t == "pupil") e.type = EtEventType::Pupil;
    else throw Error(ErrorCode::ParseError, path.string() + ": unknown event type '" + t + "'");
    e.start_ms = number_field(j, "start_ms", path);
    e.end_ms = number_field(j, "end_ms", path);
    if (e.end_ms < e.start_ms) {
      throw Error(ErrorCode::ValidationError, path.string() + ": event ends before it starts");
    }
    if (auto it = j.find("pupil_left_mm"); it != j.end() && it->is_number()) e.pupil_left_mm = it->get<double>();
    if (auto it = j.find("pupil_right_mm"); it != j.end() && it->is_number()) e.pupil_right_mm = it->get<double>();
    events.push_back(e);
  }
  return events;
}

void write_et_events(const fs::path& path, const std::vector<EtEvent>& events) {
  std::string text;
  for (const auto& e : events) {
    json j;
    j["t"] = e.type == EtEventType::Fixation ? "fixation" : e.type == EtEventType::Blink ? "blink" : "pupil";
    j["start_ms"] = e.start_ms;
    j["end_ms"] = e.end_ms;
    if (e.pupil_left_mm) j["pupil_left_mm"] = *e.pupil_left_mm;
    if (e.pupil_right_mm) j["pupil_right_mm"] = *e.pupil_right_mm;
    text += j.dump();
    text += '\n';
  }
  write_text(path, text);
}

std::vector<HeartBeat> read_heart_ibis(const fs::path& path) {
  std::vector<HeartBeat> beats;
  for (const auto& j : read_ndjson(path)) {
    HeartBeat b{number_field(j, "t_ms", path), number_field(j, "ibi_ms", path)};
    if (!(b.ibi_ms > 0.0)) throw Error(ErrorCode::ValidationError, path.string() + ": non-positive IBI");
    if (!beats.empty() && !(b.t_ms > beats.back().t_ms)) {
      throw Error(ErrorCode::ValidationError, path.string() + ": beat timestamps not increasing");
    }
    beats.push_back(b);
  }
  return beats;
}

void write_heart_ibis(const fs::path& path, const std::vector<HeartBeat>& beats) {
  std::string text;
  for (const auto& b : beats) {
    json j;
    j["t_ms"] = b.t_ms;
    j["ibi_ms"] = b.ibi_ms;
    text += j.dump();
    text += '\n';
  }
  write_text(path, text);
}

// --- Embeddings --------------------------------------------------------------

TokenEmbeddings read_embeddings(const fs::path& path, std::optional<std::uint32_t> expected_dim) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "EMBD", 4) != 0) {
    throw Error(ErrorCode::BadMagic, path.string());
  }
  if (bytes.size() < kEmbHeaderBytes) throw Error(ErrorCode::HeaderMismatch, path.string() + ": truncated header");
  ByteReader r(bytes, 4);
  if (r.u16() != 1) throw Error(ErrorCode::HeaderMismatch, path.string() + ": unsupported version");
  TokenEmbeddings emb;
  emb.dim = r.u32();
  emb.n_tokens = r.u32();
  if (expected_dim && *expected_dim != emb.dim) {
    throw Error(ErrorCode::HeaderMismatch, path.string() + ": dim " + std::to_string(emb.dim) +
                                               " but index says " + std::to_string(*expected_dim));
  }
  const std::uint64_t expected =
      kEmbHeaderBytes + 4ULL * emb.dim * (1ULL + static_cast<std::uint64_t>(emb.n_tokens));
  if (bytes.size() != expected) {
    throw Error(ErrorCode::HeaderMismatch, path.string() + ": payload length disagrees with header");
  }
  emb.cls.resize(emb.dim);
  for (auto& v : emb.cls) v = r.f32();
  emb.tokens.resize(static_cast<std::size_t>(emb.dim) * emb.n_tokens);
  for (auto& v : emb.tokens) v = r.f32();
  for (float v : emb.cls) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteSample, path.string());
  }
  for (float v : emb.tokens) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteSample, path.string());
  }
  return emb;
}

void write_embeddings(const fs::path& path, const TokenEmbeddings& emb) {
  if (emb.cls.size() != emb.dim || emb.tokens.size() != static_cast<std::size_t>(emb.dim) * emb.n_tokens) {
    throw Error(ErrorCode::HeaderMismatch, "embedding buffers do not match dim/n_tokens");
  }
  ByteWriter w;
  w.raw("EMBD", 4);
  w.u16(1);
  w.u32(emb.dim);
  w.u32(emb.n_tokens);
  for (float v : emb.cls) w.f32(v);
  for (float v : emb.tokens) w.f32(v);
  write_file_bytes(path, w.take());
}

std::vector<EmbeddingIndexEntry> read_embedding_index(const fs::path& path) {
  std::vector<EmbeddingIndexEntry> out;
  for (const auto& j : read_ndjson(path)) {
    try {
      EmbeddingIndexEntry e;
      e.meme_id = j.at("meme_id").get<std::string>();
      e.path = j.at("path").get<std::string>();
      e.dim = j.at("dim").get<std::uint32_t>();
      e.tokens = j.at("tokens").get<std::vector<std::string>>();
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::ParseError, path.string() + ": " + ex.what());
    }
  }
  return out;
}

void write_embedding_index(const fs::path& path, const std::vector<EmbeddingIndexEntry>& entries) {
  std::string text;
  for (const auto& e : entries) {
    json j;
    j["meme_id"] = e.meme_id;
    j["path"] = e.path;
    j["dim"] = e.dim;
    j["tokens"] = e.tokens;
    text += j.dump();
    text += '\n';
  }
  write_text(path, text);
}

}  // namespace memephys::ingest
