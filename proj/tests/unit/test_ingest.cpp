#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>

#include "memephys/error.hpp"
#include "memephys/ingest/formats.hpp"
#include "memephys/ingest/manifest.hpp"
#include "memephys/ingest/synth.hpp"

using namespace memephys;
using namespace memephys::ingest;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("memephys_test_ingest_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::IoError;
}

const char* kTrialLine =
    R"({"trial_id":"t1","meme_id":"m1","subject_id":"s1","experiment":"EEG_HR","stimulus_onset_ms":2000,)"
    R"("response_ms":5000,"labels":{"task1":"sexist","task2":"direct","task3":["objectification"]},)"
    R"("paths":{"eeg":"eeg/t1.phys"}})";

EegRecording small_recording() {
  EegRecording rec;
  rec.n_channels = 3;
  rec.n_samples = 5;
  for (int i = 0; i < 15; ++i) rec.samples.push_back(0.25f * static_cast<float>(i) - 1.0f);
  return rec;
}

}  // namespace

TEST_CASE("manifest loads labels, paths and defaults") {
  const auto dir = scratch_dir("manifest_ok");
  write_text(dir / "eeg" / "t1.phys", "");
  write_text(dir / "manifest.ndjson", std::string(kTrialLine) + "\n\n");
  const auto m = load_manifest(dir / "manifest.ndjson");
  REQUIRE(m.trials.size() == 1);
  const auto& t = m.trials[0];
  CHECK(t.trial_id == "t1");
  CHECK(t.experiment == Experiment::EEG_HR);
  CHECK(t.labels.task1 == Task1::Sexist);
  CHECK(t.labels.task2 == Task2::Direct);
  CHECK(t.labels.has(Category::Objectification));
  CHECK(t.session_id == "1");
  CHECK(t.uv_scale == 1.0);
  CHECK(m.resolve(*t.paths.eeg) == dir / "eeg" / "t1.phys");

  // Round trip through the writer.
  write_manifest(dir / "again.ndjson", m.trials);
  const auto m2 = load_manifest(dir / "again.ndjson");
  CHECK(trial_to_json(m2.trials[0]) == trial_to_json(t));
}

TEST_CASE("manifest errors carry the right code and location") {
  const auto dir = scratch_dir("manifest_err");
  write_text(dir / "eeg" / "t1.phys", "");

  write_text(dir / "bad.ndjson", std::string(kTrialLine) + "\n{not json\n");
  try {
    load_manifest(dir / "bad.ndjson");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  std::string early = kTrialLine;
  early.replace(early.find("\"response_ms\":5000"), 18, "\"response_ms\":1000");
  write_text(dir / "early.ndjson", early + "\n");
  CHECK(code_of([&] { load_manifest(dir / "early.ndjson"); }) == ErrorCode::ValidationError);

  write_text(dir / "dup.ndjson", std::string(kTrialLine) + "\n" + kTrialLine + "\n");
  CHECK(code_of([&] { load_manifest(dir / "dup.ndjson"); }) == ErrorCode::ValidationError);

  std::string missing = kTrialLine;
  missing.replace(missing.find("t1.phys"), 7, "zz.phys");
  write_text(dir / "missing.ndjson", missing + "\n");
  CHECK(code_of([&] { load_manifest(dir / "missing.ndjson"); }) == ErrorCode::MissingFile);

  std::string label = kTrialLine;
  label.replace(label.find("\"task1\":\"sexist\""), 16, "\"task1\":\"nonsexist\"");
  write_text(dir / "label.ndjson", label + "\n");
  CHECK(code_of([&] { load_manifest(dir / "label.ndjson"); }) == ErrorCode::ParseError);

  CHECK(code_of([&] { load_manifest(dir / "nope.ndjson"); }) == ErrorCode::MissingFile);
}

TEST_CASE("EEG binary round trip is byte identical") {
  const auto rec = small_recording();
  const auto bytes = encode_eeg_recording(rec);
  CHECK(bytes.size() == kEegHeaderBytes + 4 * 15);
  CHECK(std::memcmp(bytes.data(), "PHYS", 4) == 0);
  const auto back = decode_eeg_recording(bytes, "mem");
  CHECK(back.n_channels == 3);
  CHECK(back.n_samples == 5);
  CHECK(back.samples == rec.samples);
  CHECK(encode_eeg_recording(back) == bytes);

  const auto dir = scratch_dir("eeg_rt");
  write_eeg_recording(dir / "x.phys", rec);
  CHECK(read_file_bytes(dir / "x.phys") == bytes);
  CHECK(read_eeg_recording(dir / "x.phys").samples == rec.samples);
}

TEST_CASE("EEG binary rejects corrupt input") {
  const auto bytes = encode_eeg_recording(small_recording());

  auto truncated = bytes;
  truncated.pop_back();
  CHECK(code_of([&] { decode_eeg_recording(truncated, "t"); }) == ErrorCode::HeaderMismatch);
  auto extended = bytes;
  extended.push_back(0);
  CHECK(code_of([&] { decode_eeg_recording(extended, "t"); }) == ErrorCode::HeaderMismatch);
  std::vector<std::uint8_t> stub(bytes.begin(), bytes.begin() + 10);
  CHECK(code_of([&] { decode_eeg_recording(stub, "t"); }) == ErrorCode::HeaderMismatch);

  auto magic = bytes;
  magic[0] = 'X';
  CHECK(code_of([&] { decode_eeg_recording(magic, "t"); }) == ErrorCode::BadMagic);

  auto nan = small_recording();
  nan.samples[7] = std::numeric_limits<float>::quiet_NaN();
  const auto nan_bytes = encode_eeg_recording(nan);
  CHECK(code_of([&] { decode_eeg_recording(nan_bytes, "t"); }) == ErrorCode::NonFiniteSample);
}

TEST_CASE("EEG binary round trip on random payloads") {
  std::mt19937 gen(3);
  std::normal_distribution<float> nd(0.0f, 30.0f);
  for (int trial = 0; trial < 5; ++trial) {
    EegRecording rec;
    rec.n_channels = 16;
    rec.n_samples = 100 + static_cast<std::uint64_t>(trial) * 37;
    rec.samples.resize(rec.n_channels * rec.n_samples);
    for (auto& v : rec.samples) v = nd(gen);
    const auto bytes = encode_eeg_recording(rec);
    CHECK(encode_eeg_recording(decode_eeg_recording(bytes, "r")) == bytes);
  }
}

TEST_CASE("ET and HR NDJSON round trip") {
  const auto dir = scratch_dir("et_hr");
  std::vector<EtEvent> ev = {{EtEventType::Fixation, 100.0, 350.5, std::nullopt, std::nullopt},
                             {EtEventType::Blink, 400.0, 650.0, std::nullopt, std::nullopt},
                             {EtEventType::Pupil, 700.0, 700.0, 3.25, 3.5}};
  write_et_events(dir / "et.ndjson", ev);
  const auto back = read_et_events(dir / "et.ndjson");
  REQUIRE(back.size() == 3);
  CHECK(back[0].type == EtEventType::Fixation);
  CHECK(back[0].end_ms == 350.5);
  CHECK(back[1].type == EtEventType::Blink);
  CHECK(back[2].pupil_left_mm == 3.25);
  CHECK(back[2].pupil_right_mm == 3.5);

  std::vector<HeartBeat> hb = {{812.5, 812.5}, {1600.0, 787.5}};
  write_heart_ibis(dir / "hr.ndjson", hb);
  const auto hb2 = read_heart_ibis(dir / "hr.ndjson");
  REQUIRE(hb2.size() == 2);
  CHECK(hb2[1].t_ms == 1600.0);
  CHECK(hb2[1].ibi_ms == 787.5);

  write_text(dir / "broken.ndjson", "{\"type\":\"fixation\"\n");
  CHECK(code_of([&] { read_et_events(dir / "broken.ndjson"); }) == ErrorCode::ParseError);
}

TEST_CASE("EMBD fixtures written by an independent writer decode exactly") {
  const fs::path dir = fs::path(MEMEPHYS_FIXTURE_DIR) / "emb";
  const auto index = read_embedding_index(dir / "index.ndjson");
  REQUIRE(index.size() == 2);
  CHECK(index[0].meme_id == "m_small");
  CHECK(index[0].tokens == std::vector<std::string>{"a", "b", "c"});

  const auto emb = read_embeddings(dir / index[0].path, index[0].dim);
  CHECK(emb.dim == 4);
  CHECK(emb.n_tokens == 3);
  CHECK(emb.cls == std::vector<float>{0.5f, -1.0f, 2.25f, 0.0f});
  REQUIRE(emb.tokens.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) CHECK(emb.tokens[i] == static_cast<float>(i) / 8.0f);
  CHECK(emb.n_tokens == index[0].tokens.size());

  const auto empty = read_embeddings(dir / "m_empty.embd", 4);
  CHECK(empty.n_tokens == 0);
  CHECK(empty.tokens.empty());

  CHECK(code_of([&] { read_embeddings(dir / "m_small.embd", 8); }) == ErrorCode::HeaderMismatch);

  // The C++ writer reproduces the fixture bytes.
  const auto scratch = scratch_dir("embd");
  write_embeddings(scratch / "copy.embd", emb);
  CHECK(read_file_bytes(scratch / "copy.embd") == read_file_bytes(dir / "m_small.embd"));

  auto bytes = read_file_bytes(dir / "m_small.embd");
  bytes.resize(bytes.size() - 2);
  write_file_bytes(scratch / "short.embd", bytes);
  CHECK(code_of([&] { read_embeddings(scratch / "short.embd"); }) == ErrorCode::HeaderMismatch);
  bytes[0] = 'Z';
  write_file_bytes(scratch / "magic.embd", bytes);
  CHECK(code_of([&] { read_embeddings(scratch / "magic.embd"); }) == ErrorCode::BadMagic);
}

TEST_CASE("synthetic generator is deterministic and thread-count independent") {
  SynthSpec spec;
  spec.n_memes = 6;
  spec.rt_s = {{3.0, 0.5}, {3.0, 0.5}, {3.0, 0.5}};
  spec.seed = 11;
  const auto a = synthesize(spec, 1);
  const auto b = synthesize(spec, 3);
  REQUIRE(a.trials.size() == 12);
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    CHECK(trial_to_json(a.trials[i]) == trial_to_json(b.trials[i]));
    CHECK(a.eeg[i].has_value() == b.eeg[i].has_value());
    if (a.eeg[i]) CHECK(a.eeg[i]->samples == b.eeg[i]->samples);
    if (a.hr[i]) CHECK(a.hr[i]->size() == b.hr[i]->size());
  }
  // Each meme has one ET/HR viewer and one EEG/HR viewer.
  for (std::size_t m = 0; m < 6; ++m) {
    CHECK(a.trials[2 * m].experiment == Experiment::ET_HR);
    CHECK(a.trials[2 * m + 1].experiment == Experiment::EEG_HR);
    CHECK(a.trials[2 * m].subject_id != a.trials[2 * m + 1].subject_id);
  }

  spec.seed = 12;
  const auto c = synthesize(spec, 1);
  CHECK(c.trials[0].response_ms != a.trials[0].response_ms);

  const auto dir = scratch_dir("synth");
  const auto m = write_dataset(a, spec, dir);
  CHECK(m.trials.size() == 12);
  const auto idx = read_embedding_index(dir / "emb" / "index.ndjson");
  CHECK(idx.size() == 6);
  for (const auto& e : idx) {
    const auto emb = read_embeddings(dir / "emb" / e.path, e.dim);
    CHECK(emb.n_tokens == e.tokens.size());
  }
  const auto rec = read_eeg_recording(m.resolve(*m.trials[1].paths.eeg));
  CHECK(rec.samples == a.eeg[1]->samples);
}

TEST_CASE("synth spec JSON round trip and validation") {
  SynthSpec spec;
  spec.eeg_effect.push_back({"sexist", "C4", Band::Alpha, 0.5});
  spec.pupil_effect.push_back({"judgmental", true, 0.3});
  const auto j = synth_spec_to_json(spec);
  CHECK(synth_spec_to_json(synth_spec_from_json(j)) == j);

  auto bad = j;
  bad["eeg_effect"][0]["channel"] = "Cz";
  CHECK(code_of([&] { synth_spec_from_json(bad).validate(); }) == ErrorCode::ValidationError);
  bad = j;
  bad["condition_mix"] = {{"non_sexist", 0.7}, {"direct", 0.7}};
  CHECK(code_of([&] { synth_spec_from_json(bad).validate(); }) == ErrorCode::ValidationError);
}
