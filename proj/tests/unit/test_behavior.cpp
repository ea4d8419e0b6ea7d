#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "memephys/behavior/features.hpp"
#include "memephys/error.hpp"
#include "memephys/features/table.hpp"
#include "memephys/ingest/synth.hpp"

using namespace memephys;
using namespace memephys::behavior;

namespace {

EtEvent fixation(double a, double b) { return {EtEventType::Fixation, a, b, std::nullopt, std::nullopt}; }
EtEvent blink(double a, double b) { return {EtEventType::Blink, a, b, std::nullopt, std::nullopt}; }
EtEvent pupil(double t, double l, double r) { return {EtEventType::Pupil, t, t, l, r}; }

}  // namespace

TEST_CASE("fixation durations summarize to mean, sd, min, max and count") {
  const std::vector<EtEvent> ev = {fixation(1000, 1200), fixation(1300, 1600), fixation(1700, 2100)};
  const auto f = et_features(ev, {1000, 3000});
  CHECK(f.fixation.count == 3);
  CHECK(*f.fixation.mean == 300.0);
  CHECK(*f.fixation.sd == doctest::Approx(100.0));
  CHECK(*f.fixation.min == 200.0);
  CHECK(*f.fixation.max == 400.0);
  CHECK(f.blink.count == 0);
  CHECK_FALSE(f.blink.mean.has_value());
}

TEST_CASE("events overlapping the window are clipped") {
  const std::vector<EtEvent> ev = {fixation(800, 1100), blink(1500, 1800), fixation(2900, 3300), fixation(3300, 3500)};
  const auto f = et_features(ev, {1000, 3000});
  CHECK(f.fixation.count == 2);
  CHECK(*f.fixation.min == 100.0);
  CHECK(*f.fixation.max == 100.0);
  CHECK(f.blink.count == 1);
  CHECK(*f.blink.mean == 300.0);
  CHECK_FALSE(f.blink.sd.has_value());  // single event: sd undefined
}

TEST_CASE("pupil samples use the half-open window") {
  const std::vector<EtEvent> ev = {pupil(999, 9, 9), pupil(1000, 3.0, 3.5), pupil(2000, 4.0, 4.5), pupil(3000, 9, 9)};
  const auto f = et_features(ev, {1000, 3000});
  CHECK(f.pupil_left.count == 2);
  CHECK(*f.pupil_left.mean == 3.5);
  CHECK(*f.pupil_right.max == 4.5);
}

TEST_CASE("unsorted events are rejected") {
  const std::vector<EtEvent> ev = {fixation(2000, 2100), fixation(1000, 1100)};
  try {
    et_features(ev, {0, 5000});
    FAIL("expected UnsortedEvents");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsortedEvents);
  }
}

TEST_CASE("heart rate from inter-beat intervals") {
  const std::vector<HeartBeat> beats = {{900, 800}, {1700, 800}, {2450, 750}, {3300, 850}};
  const auto bpm = hr_features(beats, {1000, 3000});
  CHECK(bpm.count == 2);
  CHECK(*bpm.min == doctest::Approx(60000.0 / 800.0));
  CHECK(*bpm.max == doctest::Approx(60000.0 / 750.0));
  const auto ibi = hr_features(beats, {1000, 3000}, HrUnit::IbiMs);
  CHECK(*ibi.mean == 775.0);

  const auto none = hr_features(beats, {1000, 1500});
  CHECK(none.count == 0);
  CHECK_FALSE(none.mean.has_value());
}

TEST_CASE("reaction time") {
  Trial t;
  t.trial_id = "x";
  t.stimulus_onset_ms = 2000;
  t.response_ms = 15680;
  CHECK(reaction_time(t) == doctest::Approx(13.68));
  t.response_ms = 2000;
  CHECK_THROWS_AS(reaction_time(t), Error);
}

TEST_CASE("behavioral value layout and missing blocks") {
  const auto& names = behavioral_feature_names();
  REQUIRE(names.size() == 25);
  CHECK(names[0] == "et_fixation_mean");
  CHECK(names[4] == "et_fixation_count");
  CHECK(names[20] == "hr_mean");
  CHECK(names[24] == "rt_s");

  const auto v = behavioral_values(std::nullopt, std::nullopt, 4.5);
  REQUIRE(v.size() == 25);
  for (std::size_t i = 0; i < 24; ++i) CHECK(std::isnan(v[i]));
  CHECK(v[24] == 4.5);

  EtFeatures et{summarize(std::vector<double>{100, 200}), {}, {}, {}};
  const auto w = behavioral_values(et, std::nullopt, 1.0);
  CHECK(w[0] == 150.0);
  CHECK(w[4] == 2.0);
  CHECK(std::isnan(w[5]));  // blink mean
  CHECK(w[9] == 0.0);       // blink count
}

TEST_CASE("feature table round trips through CSV") {
  ingest::SynthSpec spec;
  spec.n_memes = 3;
  spec.rt_s = {{3.0, 0.5}, {3.0, 0.5}, {3.0, 0.5}};
  spec.seed = 2;
  const auto dir = std::filesystem::temp_directory_path() / "memephys_test_behavior_csv";
  std::filesystem::remove_all(dir);
  const auto manifest = ingest::generate_synthetic(spec, dir);
  features::ExtractOptions opts;
  const auto table = features::extract_features(manifest, opts);
  REQUIRE(table.size() == 6);
  CHECK(table.columns.size() == 169);
  opts.threads = 3;
  const auto par = features::extract_features(manifest, opts);
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const double a = table.values[r][c], b = par.values[r][c];
      CHECK(((std::isnan(a) && std::isnan(b)) || a == b));
    }
  }

  features::write_feature_csv(dir / "features.csv", table);
  const auto back = features::read_feature_csv(dir / "features.csv");
  REQUIRE(back.size() == table.size());
  CHECK(back.columns == table.columns);
  for (std::size_t r = 0; r < table.size(); ++r) {
    CHECK(back.rows[r].trial_id == table.rows[r].trial_id);
    CHECK(back.rows[r].labels.task3 == table.rows[r].labels.task3);
    CHECK(back.rows[r].experiment == table.rows[r].experiment);
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const double a = table.values[r][c], b = back.values[r][c];
      CHECK(((std::isnan(a) && std::isnan(b)) || a == b));
    }
  }
  // EEG trials have no ET block; ET trials have no EEG block.
  const auto et_col = table.require_column("et_fixation_mean");
  const auto eeg_col = table.require_column("eeg_C4_alpha_power");
  for (std::size_t r = 0; r < table.size(); ++r) {
    const bool is_eeg = table.rows[r].experiment == Experiment::EEG_HR;
    CHECK(std::isnan(table.values[r][et_col]) == is_eeg);
    CHECK(std::isnan(table.values[r][eeg_col]) == !is_eeg);
  }
}
