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

#include "memephys/ingest/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "memephys/eeg/filter.hpp"
#include "memephys/error.hpp"
#include "memephys/util/parallel.hpp"

namespace memephys::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kOnsetMs = 2000.0;
constexpr double kTailMs = 500.0;

/// Zero-phase band filter plus the factor that maps unit white noise to
/// unit expected output variance.
struct BandSynth {
  eeg::BandpassFilter filter;
  double unit_scale;
};

BandSynth make_band_synth(const FrequencyBand& band, double fs) {
  auto filter = eeg::BandpassFilter::design({4, band.lo_hz, band.hi_hz}, fs);
  // Output variance of filtfilt(white, var 1) = (2/fs) * int_0^{fs/2} |H|^4 df
  // (Simpson's rule on a dense grid).
  const std::size_t n = 40000;
  const double h = (fs / 2.0) / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double m2 = std::pow(filter.magnitude(static_cast<double>(i) * h), 2);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * m2 * m2;
  }
  const double var = (2.0 / fs) * acc * h / 3.0;
  return {std::move(filter), 1.0 / std::sqrt(var)};
}

std::vector<double> noise_through(const BandSynth& bs, std::size_t n, double power, Rng& rng) {
  std::vector<double> white(n);
  for (auto& v : white) v = rng.normal();
  auto out = bs.filter.filtfilt(white);
  const double s = bs.unit_scale * std::sqrt(power);
  for (auto& v : out) v *= s;
  return out;
}

double gamma_draw(Rng& rng, const MeanSd& p) {
  const double shape = (p.mean / p.sd) * (p.mean / p.sd);
  const double scale = p.sd * p.sd / p.mean;
  return rng.gamma(shape, scale);
}

/// Non-negative integer count with the requested mean and variance:
/// gamma-Poisson mixture when over-dispersed, plain Poisson otherwise.
std::uint64_t count_draw(Rng& rng, const MeanSd& p) {
  const double var = p.sd * p.sd;
  if (var <= p.mean) return rng.poisson(p.mean);
  const double scale = (var - p.mean) / p.mean;
  const double shape = p.mean / scale;
  return rng.poisson(rng.gamma(shape, scale));
}

MeanSd mean_sd_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::ParseError, "expected [mean, sd] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

json mean_sd_to_json(const MeanSd& m) { return json::array({m.mean, m.sd}); }

LevelParams level_params_from_json(const json& j, LevelParams def) {
  if (j.contains("non_sexist")) def.non_sexist = mean_sd_from_json(j["non_sexist"]);
  if (j.contains("direct")) def.direct = mean_sd_from_json(j["direct"]);
  if (j.contains("judgmental")) def.judgmental = mean_sd_from_json(j["judgmental"]);
  return def;
}

json level_params_to_json(const LevelParams& p) {
  return {{"non_sexist", mean_sd_to_json(p.non_sexist)},
          {"direct", mean_sd_to_json(p.direct)},
          {"judgmental", mean_sd_to_json(p.judgmental)}};
}

std::string meme_name(std::size_t m) { return fmt::format("m{:05d}", m); }
std::string subject_name(std::size_t s) { return fmt::format("s{:02d}", s); }

}  // namespace

const MeanSd& LevelParams::at(SexismLevel l) const {
  switch (l) {
    case SexismLevel::NonSexist: return non_sexist;
    case SexismLevel::Direct: return direct;
    case SexismLevel::Judgmental: return judgmental;
  }
  return non_sexist;
}

bool condition_matches(const std::string& condition, const SexismLabels& labels) {
  if (condition == "non_sexist") return labels.task1 == Task1::NonSexist;
  if (condition == "sexist") return labels.task1 == Task1::Sexist;
  if (condition == "tie") return labels.task1 == Task1::Tie;
  if (condition == "direct") return labels.task2 == Task2::Direct;
  if (condition == "judgmental") return labels.task2 == Task2::Judgmental;
  if (auto cat = parse_category(condition)) return labels.has(*cat);
  throw Error(ErrorCode::ValidationError, "unknown condition '" + condition + "'");
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ValidationError, "synth spec: " + what); };
  if (n_memes == 0) fail("n_memes must be positive");
  if (subjects_per_meme < 2) fail("subjects_per_meme must be >= 2");
  if (subjects_per_meme > n_subjects) fail("subjects_per_meme exceeds n_subjects");
  if (experiments != "both" && experiments != "et_hr" && experiments != "eeg_hr") {
    fail("experiments must be both, et_hr or eeg_hr");
  }
  const double total = p_non_sexist + p_direct + p_judgmental + p_tie;
  if (std::fabs(total - 1.0) > 1e-9) fail("condition proportions must sum to 1");
  for (double p : {p_non_sexist, p_direct, p_judgmental, p_tie}) {
    if (p < 0.0) fail("negative condition proportion");
  }
  for (double p : category_probs) {
    if (p < 0.0 || p > 1.0) fail("category probability outside [0, 1]");
  }
  for (double p : eeg_baseline_power) {
    if (!(p > 0.0)) fail("baseline band power must be positive");
  }
  for (const auto& e : eeg_effect) {
    SexismLabels probe;
    condition_matches(e.condition, probe);
    if (!ChannelLayout::standard16().index_of(e.channel)) fail("unknown channel '" + e.channel + "'");
    if (e.rel_offset < 0.0) fail("EEG effects add power; rel_offset must be >= 0");
  }
  for (const auto* lp : {&rt_s, &fixation_count, &blink_duration_ms}) {
    for (const auto* ms : {&lp->non_sexist, &lp->direct, &lp->judgmental}) {
      if (!(ms->sd > 0.0) || !(ms->mean > 0.0)) fail("behavioral means and SDs must be positive");
    }
  }
  for (const auto* ms : {&fixation_duration_ms, &pupil_mm, &ibi_ms}) {
    if (!(ms->sd > 0.0) || !(ms->mean > 0.0)) fail("means and SDs must be positive");
  }
  if (blinks_per_s < 0.0 || !(pupil_rate_hz > 0.0)) fail("event rates out of range");
  if (subject_gain_sd < 0.0) fail("subject_gain_sd must be >= 0");
  if (embedding.dim == 0 || embedding.min_tokens == 0 || embedding.min_tokens > embedding.max_tokens ||
      embedding.vocab == 0) {
    fail("embedding shape invalid");
  }
}

SynthSpec synth_spec_from_json(const json& j) {
  SynthSpec s;
  try {
    s.n_memes = j.value("n_memes", s.n_memes);
    s.subjects_per_meme = j.value("subjects_per_meme", s.subjects_per_meme);
    s.n_subjects = j.value("n_subjects", s.n_subjects);
    s.experiments = j.value("experiments", s.experiments);
    if (auto it = j.find("condition_mix"); it != j.end()) {
      s.p_non_sexist = it->value("non_sexist", 0.0);
      s.p_direct = it->value("direct", 0.0);
      s.p_judgmental = it->value("judgmental", 0.0);
      s.p_tie = it->value("tie", 0.0);
    }
    if (auto it = j.find("category_probs"); it != j.end()) {
      for (auto kv = it->begin(); kv != it->end(); ++kv) {
        const auto cat = parse_category(kv.key());
        if (!cat) throw Error(ErrorCode::ValidationError, "unknown category '" + kv.key() + "'");
        s.category_probs[static_cast<std::size_t>(*cat)] = kv.value().get<double>();
      }
    }
    if (auto it = j.find("eeg_baseline_power"); it != j.end()) {
      for (auto kv = it->begin(); kv != it->end(); ++kv) {
        const auto b = parse_band(kv.key());
        if (!b) throw Error(ErrorCode::ValidationError, "unknown band '" + kv.key() + "'");
        s.eeg_baseline_power[static_cast<std::size_t>(*b)] = kv.value().get<double>();
      }
    }
    if (auto it = j.find("eeg_effect"); it != j.end()) {
      for (const auto& e : *it) {
        const auto b = parse_band(e.at("band").get<std::string>());
        if (!b) throw Error(ErrorCode::ValidationError, "unknown band in eeg_effect");
        s.eeg_effect.push_back({e.at("condition").get<std::string>(), e.at("channel").get<std::string>(), *b,
                                e.at("rel_offset").get<double>()});
      }
    }
    s.subject_gain_sd = j.value("subject_gain_sd", s.subject_gain_sd);
    if (auto it = j.find("behavior_effect"); it != j.end()) {
      if (it->contains("rt_s")) s.rt_s = level_params_from_json(it->at("rt_s"), s.rt_s);
      if (it->contains("fixation_count")) s.fixation_count = level_params_from_json(it->at("fixation_count"), s.fixation_count);
      if (it->contains("blink_duration_ms")) {
        s.blink_duration_ms = level_params_from_json(it->at("blink_duration_ms"), s.blink_duration_ms);
      }
    }
    if (j.contains("fixation_duration_ms")) s.fixation_duration_ms = mean_sd_from_json(j["fixation_duration_ms"]);
    s.blinks_per_s = j.value("blinks_per_s", s.blinks_per_s);
    s.pupil_rate_hz = j.value("pupil_rate_hz", s.pupil_rate_hz);
    if (j.contains("pupil_mm")) s.pupil_mm = mean_sd_from_json(j["pupil_mm"]);
    if (auto it = j.find("pupil_effect"); it != j.end()) {
      for (const auto& e : *it) {
        s.pupil_effect.push_back({e.at("condition").get<std::string>(), e.value("eye", std::string("right")) == "right",
                                  e.at("offset_mm").get<double>()});
      }
    }
    if (j.contains("ibi_ms")) s.ibi_ms = mean_sd_from_json(j["ibi_ms"]);
    if (auto it = j.find("embedding"); it != j.end()) {
      s.embedding.dim = it->value("dim", s.embedding.dim);
      s.embedding.min_tokens = it->value("min_tokens", s.embedding.min_tokens);
      s.embedding.max_tokens = it->value("max_tokens", s.embedding.max_tokens);
      s.embedding.vocab = it->value("vocab", s.embedding.vocab);
      s.embedding.label_signal = it->value("label_signal", s.embedding.label_signal);
    }
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("synth spec: ") + e.what());
  }
  s.validate();
  return s;
}

json synth_spec_to_json(const SynthSpec& s) {
  json j;
  j["n_memes"] = s.n_memes;
  j["subjects_per_meme"] = s.subjects_per_meme;
  j["n_subjects"] = s.n_subjects;
  j["experiments"] = s.experiments;
  j["condition_mix"] = {{"non_sexist", s.p_non_sexist}, {"direct", s.p_direct}, {"judgmental", s.p_judgmental},
                        {"tie", s.p_tie}};
  json cats;
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    cats[std::string(category_name(static_cast<Category>(c)))] = s.category_probs[c];
  }
  j["category_probs"] = cats;
  json base;
  for (std::size_t b = 0; b < kNumBands; ++b) base[std::string(band_name(static_cast<Band>(b)))] = s.eeg_baseline_power[b];
  j["eeg_baseline_power"] = base;
  json effects = json::array();
  for (const auto& e : s.eeg_effect) {
    effects.push_back({{"condition", e.condition}, {"channel", e.channel}, {"band", std::string(band_name(e.band))},
                       {"rel_offset", e.rel_offset}});
  }
  j["eeg_effect"] = effects;
  j["subject_gain_sd"] = s.subject_gain_sd;
  j["behavior_effect"] = {{"rt_s", level_params_to_json(s.rt_s)},
                          {"fixation_count", level_params_to_json(s.fixation_count)},
                          {"blink_duration_ms", level_params_to_json(s.blink_duration_ms)}};
  j["fixation_duration_ms"] = mean_sd_to_json(s.fixation_duration_ms);
  j["blinks_per_s"] = s.blinks_per_s;
  j["pupil_rate_hz"] = s.pupil_rate_hz;
  j["pupil_mm"] = mean_sd_to_json(s.pupil_mm);
  json pe = json::array();
  for (const auto& e : s.pupil_effect) {
    pe.push_back({{"condition", e.condition}, {"eye", e.right_eye ? "right" : "left"}, {"offset_mm", e.offset_mm}});
  }
  j["pupil_effect"] = pe;
  j["ibi_ms"] = mean_sd_to_json(s.ibi_ms);
  j["embedding"] = {{"dim", s.embedding.dim},
                    {"min_tokens", s.embedding.min_tokens},
                    {"max_tokens", s.embedding.max_tokens},
                    {"vocab", s.embedding.vocab},
                    {"label_signal", s.embedding.label_signal}};
  j["seed"] = s.seed;
  return j;
}

std::vector<double> band_limited_noise(std::size_t n, double fs, const FrequencyBand& band, double power, Rng& rng) {
  return noise_through(make_band_synth(band, fs), n, power, rng);
}

SyntheticDataset synthesize(const SynthSpec& spec, std::size_t threads) {
  spec.validate();
  const Rng root(spec.seed);
  const double fs = kEegSampleRateHz;
  const auto& layout = ChannelLayout::standard16();

  SyntheticDataset data;

  // Memes: labels and token sequences.
  std::vector<SexismLabels> meme_labels(spec.n_memes);
  std::vector<std::vector<std::size_t>> viewers(spec.n_memes);
  for (std::size_t m = 0; m < spec.n_memes; ++m) {
    Rng r = root.derive("meme", m);
    SexismLabels lab;
    const double u = r.uniform();
    if (u < spec.p_non_sexist) {
      lab.task1 = Task1::NonSexist;
    } else if (u < spec.p_non_sexist + spec.p_direct) {
      lab.task1 = Task1::Sexist;
      lab.task2 = Task2::Direct;
    } else if (u < spec.p_non_sexist + spec.p_direct + spec.p_judgmental) {
      lab.task1 = Task1::Sexist;
      lab.task2 = Task2::Judgmental;
    } else {
      lab.task1 = Task1::Tie;
    }
    if (lab.task1 == Task1::Sexist) {
      for (std::size_t c = 0; c < kNumCategories; ++c) {
        if (r.uniform() < spec.category_probs[c]) lab.task3.set(c);
      }
      if (lab.task3.none()) lab.task3.set(r.uniform_index(kNumCategories));
    }
    meme_labels[m] = lab;
    std::vector<std::size_t> subjects(spec.n_subjects);
    std::iota(subjects.begin(), subjects.end(), 0);
    for (std::size_t i = 0; i < spec.subjects_per_meme; ++i) {
      std::swap(subjects[i], subjects[i + r.uniform_index(spec.n_subjects - i)]);
    }
    viewers[m].assign(subjects.begin(), subjects.begin() + static_cast<std::ptrdiff_t>(spec.subjects_per_meme));
    data.meme_ids.push_back(meme_name(m));
  }

  // Embeddings: hash-seeded token vectors plus an optional label direction.
  {
    const auto& es = spec.embedding;
    const Rng emb_root = root.derive("embedding");
    auto unit_direction = [&](std::string_view label) {
      Rng r = emb_root.derive(label);
      std::vector<double> v(es.dim);
      double norm = 0.0;
      for (auto& x : v) {
        x = r.normal();
        norm += x * x;
      }
      for (auto& x : v) x /= std::sqrt(norm);
      return v;
    };
    const auto dir_t1 = unit_direction("dir/task1");
    const auto dir_t2 = unit_direction("dir/task2");
    std::vector<std::vector<double>> dir_cat;
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      dir_cat.push_back(unit_direction("dir/" + std::string(category_name(static_cast<Category>(c)))));
    }
    for (std::size_t m = 0; m < spec.n_memes; ++m) {
      Rng r = emb_root.derive("meme", m);
      const auto n_tok = es.min_tokens + static_cast<std::uint32_t>(r.uniform_index(es.max_tokens - es.min_tokens + 1));
      std::vector<double> signal(es.dim, 0.0);
      const auto& lab = meme_labels[m];
      if (lab.task1 != Task1::Tie) {
        const double y1 = lab.task1 == Task1::Sexist ? 1.0 : -1.0;
        for (std::size_t d = 0; d < es.dim; ++d) signal[d] += y1 * dir_t1[d];
      }
      if (lab.task2) {
        const double y2 = *lab.task2 == Task2::Direct ? 1.0 : -1.0;
        for (std::size_t d = 0; d < es.dim; ++d) signal[d] += y2 * dir_t2[d];
      }
      if (lab.task1 == Task1::Sexist) {
        for (std::size_t c = 0; c < kNumCategories; ++c) {
          const double yc = lab.task3.test(c) ? 1.0 : -1.0;
          for (std::size_t d = 0; d < es.dim; ++d) signal[d] += yc * dir_cat[c][d];
        }
      }
      TokenEmbeddings emb;
      emb.dim = es.dim;
      emb.n_tokens = n_tok;
      emb.cls.assign(es.dim, 0.0f);
      std::vector<std::string> toks;
      std::vector<double> cls(es.dim, 0.0);
      for (std::uint32_t t = 0; t < n_tok; ++t) {
        const auto word = r.uniform_index(es.vocab);
        toks.push_back(fmt::format("w{}", word));
        Rng wr = emb_root.derive("token", word);
        for (std::size_t d = 0; d < es.dim; ++d) {
          const double v = wr.normal() + es.label_signal * signal[d];
          emb.tokens.push_back(static_cast<float>(v));
          cls[d] += v / n_tok;
        }
      }
      for (std::size_t d = 0; d < es.dim; ++d) {
        emb.cls[d] = static_cast<float>(cls[d] + es.label_signal * signal[d]);
      }
      data.embeddings.push_back(std::move(emb));
      data.tokens.push_back(std::move(toks));
    }
  }

  // Trials.
  for (std::size_t m = 0; m < spec.n_memes; ++m) {
    for (std::size_t slot = 0; slot < spec.subjects_per_meme; ++slot) {
      Trial t;
      const std::size_t subj = viewers[m][slot];
      t.meme_id = meme_name(m);
      t.subject_id = subject_name(subj);
      t.session_id = "1";
      t.trial_id = t.meme_id + "_" + t.subject_id;
      if (spec.experiments == "both") t.experiment = slot % 2 == 0 ? Experiment::ET_HR : Experiment::EEG_HR;
      else t.experiment = spec.experiments == "et_hr" ? Experiment::ET_HR : Experiment::EEG_HR;
      t.labels = meme_labels[m];
      data.trials.push_back(std::move(t));
    }
  }

  std::vector<BandSynth> band_synth;
  for (const auto& b : canonical_bands()) band_synth.push_back(make_band_synth(b, fs));
  std::vector<std::array<double, kNumChannels>> subject_gain(spec.n_subjects);
  for (std::size_t s = 0; s < spec.n_subjects; ++s) {
    Rng r = root.derive("subject_gain", s);
    for (auto& g : subject_gain[s]) g = spec.subject_gain_sd > 0.0 ? std::exp(r.normal(0.0, spec.subject_gain_sd)) : 1.0;
  }

  const std::size_t n = data.trials.size();
  data.eeg.resize(n);
  data.et.resize(n);
  data.hr.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    Trial& t = data.trials[i];
    const Rng tr = root.derive("trial", i);
    const SexismLevel level = sexism_level(t.labels).value_or(SexismLevel::NonSexist);

    Rng rb = tr.derive("behavior");
    const double rt = std::max(0.001, std::round(gamma_draw(rb, spec.rt_s.at(level)) * 1000.0) / 1000.0);
    const auto n_fix = count_draw(rb, spec.fixation_count.at(level));
    const double blink_ms = gamma_draw(rb, spec.blink_duration_ms.at(level));

    t.stimulus_onset_ms = kOnsetMs;
    t.response_ms = kOnsetMs + rt * 1000.0;
    const double rt_ms = rt * 1000.0;
    const std::size_t subj = viewers[i / spec.subjects_per_meme][i % spec.subjects_per_meme];

    // Heart: beats from 2 s before onset to 1 s after response.
    {
      Rng rh = tr.derive("hr");
      const double trial_ibi = std::max(350.0, rh.normal(spec.ibi_ms.mean, spec.ibi_ms.sd));
      std::vector<HeartBeat> beats;
      double clock = rh.uniform() * trial_ibi;
      while (clock < t.response_ms + 1000.0) {
        const double ibi = std::max(300.0, rh.normal(trial_ibi, 0.05 * trial_ibi));
        clock += ibi;
        beats.push_back({std::round(clock * 1000.0) / 1000.0, std::round(ibi * 1000.0) / 1000.0});
      }
      data.hr[i] = std::move(beats);
      t.paths.hr = "hr/" + t.trial_id + ".ndjson";
    }

    if (t.experiment == Experiment::ET_HR) {
      Rng re = tr.derive("et");
      std::vector<EtEvent> events;
      const double slot = rt_ms / static_cast<double>(std::max<std::uint64_t>(n_fix, 1));
      for (std::uint64_t k = 0; k < n_fix; ++k) {
        const double dur = std::min(0.9 * slot, gamma_draw(re, spec.fixation_duration_ms));
        const double start = t.stimulus_onset_ms + static_cast<double>(k) * slot;
        events.push_back({EtEventType::Fixation, start, start + dur, std::nullopt, std::nullopt});
      }
      if (rt_ms > blink_ms) {
        const auto n_blink = re.poisson(spec.blinks_per_s * rt);
        for (std::uint64_t k = 0; k < n_blink; ++k) {
          const double start = t.stimulus_onset_ms + re.uniform() * (rt_ms - blink_ms);
          events.push_back({EtEventType::Blink, start, start + blink_ms, std::nullopt, std::nullopt});
        }
      }
      double left = re.normal(spec.pupil_mm.mean, spec.pupil_mm.sd);
      double right = left + re.normal(0.0, 0.05);
      for (const auto& pe : spec.pupil_effect) {
        if (condition_matches(pe.condition, t.labels)) (pe.right_eye ? right : left) += pe.offset_mm;
      }
      const double step = 1000.0 / spec.pupil_rate_hz;
      for (double ts = t.stimulus_onset_ms - 500.0; ts < t.response_ms + 500.0; ts += step) {
        events.push_back({EtEventType::Pupil, ts, ts, left + re.normal(0.0, 0.05), right + re.normal(0.0, 0.05)});
      }
      std::stable_sort(events.begin(), events.end(),
                       [](const EtEvent& a, const EtEvent& b) { return a.start_ms < b.start_ms; });
      data.et[i] = std::move(events);
      t.paths.et = "et/" + t.trial_id + ".ndjson";
    } else {
      Rng rg = tr.derive("eeg");
      const auto n_samples = static_cast<std::size_t>(std::ceil((t.response_ms + kTailMs) * fs / 1000.0));
      const auto onset_idx = static_cast<std::size_t>(std::llround(t.stimulus_onset_ms * fs / 1000.0));
      EegRecording rec;
      rec.n_channels = static_cast<std::uint16_t>(kNumChannels);
      rec.n_samples = n_samples;
      rec.samples.resize(kNumChannels * n_samples);
      for (std::size_t c = 0; c < kNumChannels; ++c) {
        std::vector<double> x(n_samples, 0.0);
        for (std::size_t b = 0; b < kNumBands; ++b) {
          const auto comp = noise_through(band_synth[b], n_samples, spec.eeg_baseline_power[b], rg);
          for (std::size_t s = 0; s < n_samples; ++s) x[s] += comp[s];
          double extra = 0.0;
          for (const auto& e : spec.eeg_effect) {
            if (static_cast<std::size_t>(e.band) == b && layout.names()[c] == e.channel &&
                condition_matches(e.condition, t.labels)) {
              extra += e.rel_offset * spec.eeg_baseline_power[b];
            }
          }
          if (extra > 0.0) {
            // Separate stream so the baseline noise is identical with and
            // without the effect (matched controls).
            Rng rx = tr.derive("eeg_effect", c * kNumBands + b);
            const auto eff = noise_through(band_synth[b], n_samples - onset_idx, extra, rx);
            for (std::size_t s = onset_idx; s < n_samples; ++s) x[s] += eff[s - onset_idx];
          }
        }
        const double g = subject_gain[subj][c];
        float* dst = rec.channel(c);
        for (std::size_t s = 0; s < n_samples; ++s) dst[s] = static_cast<float>(g * x[s]);
      }
      data.eeg[i] = std::move(rec);
      t.paths.eeg = "eeg/" + t.trial_id + ".phys";
    }
    t.paths.emb = "emb/" + t.meme_id + ".embd";
  });
  return data;
}

Manifest write_dataset(const SyntheticDataset& data, const SynthSpec& spec, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < data.trials.size(); ++i) {
    const Trial& t = data.trials[i];
    if (data.eeg[i]) write_eeg_recording(out_dir / *t.paths.eeg, *data.eeg[i]);
    if (data.et[i]) write_et_events(out_dir / *t.paths.et, *data.et[i]);
    if (data.hr[i]) write_heart_ibis(out_dir / *t.paths.hr, *data.hr[i]);
  }
  std::vector<EmbeddingIndexEntry> index;
  for (std::size_t m = 0; m < data.meme_ids.size(); ++m) {
    const std::string rel = data.meme_ids[m] + ".embd";
    write_embeddings(out_dir / "emb" / rel, data.embeddings[m]);
    index.push_back({data.meme_ids[m], rel, data.embeddings[m].dim, data.tokens[m]});
  }
  write_embedding_index(out_dir / "emb" / "index.ndjson", index);
  write_manifest(out_dir / "manifest.ndjson", data.trials);
  {
    std::ofstream out(out_dir / "synth_spec.json", std::ios::binary);
    out << synth_spec_to_json(spec).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "cannot write synth_spec.json");
  }
  return load_manifest(out_dir / "manifest.ndjson");
}

Manifest generate_synthetic(const SynthSpec& spec, const fs::path& out_dir, std::size_t threads) {
  return write_dataset(synthesize(spec, threads), spec, out_dir);
}

}  // namespace memephys::ingest
