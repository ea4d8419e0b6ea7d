#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <set>

#include "memephys/eeg/features.hpp"
#include "memephys/eeg/filter.hpp"
#include "memephys/eeg/psd.hpp"
#include "memephys/error.hpp"
#include "memephys/ingest/synth.hpp"

using namespace memephys;
using namespace memephys::eeg;
using std::numbers::pi;

namespace {

constexpr double kFs = 250.0;

// Closed-form squared magnitude of a bilinear-transformed Butterworth
// band-pass: the analog prototype evaluated at the prewarped frequency.
double analytic_mag2(double f, double lo, double hi, int order) {
  auto warp = [](double x) { return 2.0 * kFs * std::tan(pi * x / kFs); };
  const double wl = warp(lo), wh = warp(hi), w = warp(f);
  const double r = (w * w - wl * wh) / (w * (wh - wl));
  return 1.0 / (1.0 + std::pow(r * r, order));
}

std::vector<double> sine(double hz, double amp, std::size_t n, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * pi * hz * static_cast<double>(i) / kFs + phase);
  return x;
}

double rms(const std::vector<double>& x, std::size_t from, std::size_t to) {
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += x[i] * x[i];
  return std::sqrt(acc / static_cast<double>(to - from));
}

std::vector<double> white(std::size_t n, double sd, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = nd(gen);
  return x;
}

// Plain O(n^2) periodogram, one-sided, summed inside [lo, hi).
double dft_band_power(const std::vector<double>& x, double lo, double hi) {
  const std::size_t n = x.size();
  double total = 0.0;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * kFs / static_cast<double>(n);
    if (f < lo || f >= hi) continue;
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += x[t] * std::polar(1.0, -2.0 * pi * static_cast<double>(k * t % n) / static_cast<double>(n));
    }
    const double p = std::norm(acc) / static_cast<double>(n * n);
    total += (k == 0 || 2 * k == n) ? p : 2.0 * p;
  }
  return total;
}

Trial eeg_trial(double rt_s) {
  Trial t;
  t.trial_id = "t";
  t.meme_id = "m";
  t.subject_id = "s";
  t.experiment = Experiment::EEG_HR;
  t.stimulus_onset_ms = 2000.0;
  t.response_ms = 2000.0 + rt_s * 1000.0;
  return t;
}

EegRecording recording_from(const std::vector<std::vector<double>>& ch) {
  EegRecording rec;
  rec.n_channels = static_cast<std::uint16_t>(ch.size());
  rec.n_samples = ch[0].size();
  for (const auto& c : ch) {
    for (double v : c) rec.samples.push_back(static_cast<float>(v));
  }
  return rec;
}

}  // namespace

TEST_CASE("filter magnitude matches the closed-form Butterworth response") {
  for (const FilterSpec spec : {FilterSpec{4, 0.5, 40.0}, FilterSpec{4, 8.0, 13.0}, FilterSpec{2, 1.0, 30.0}}) {
    const auto f = BandpassFilter::design(spec, kFs);
    CHECK(f.sections().size() == static_cast<std::size_t>(spec.order));
    CHECK(f.poles().size() == static_cast<std::size_t>(2 * spec.order));
    for (const auto& p : f.poles()) CHECK(std::abs(p) < 1.0);
    for (double hz : {0.3, 0.5, 1.0, 4.0, 10.0, 13.0, 25.0, 40.0, 60.0, 100.0, 124.0}) {
      const double expect = analytic_mag2(hz, spec.lo_hz, spec.hi_hz, spec.order);
      CHECK(f.magnitude(hz) * f.magnitude(hz) == doctest::Approx(expect).epsilon(1e-9).scale(1e-12));
    }
    // -3 dB at both edges.
    CHECK(f.magnitude(spec.lo_hz) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(f.magnitude(spec.hi_hz) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
  }
}

TEST_CASE("filtfilt passes 10 Hz without phase shift") {
  // The 0.5 Hz high-pass edge rings for seconds after the start, so
  // amplitudes are read from the middle of a 40 s series.
  const auto x = sine(10.0, 1.0, 10000);
  const auto y = butterworth_bandpass(x, kFs);
  const std::size_t a = 3000, b = 7000;
  const double gain_db = 20.0 * std::log10(rms(y, a, b) / rms(x, a, b));
  CHECK(std::fabs(gain_db) < 1.0);
  CHECK(gain_db == doctest::Approx(20.0 * std::log10(analytic_mag2(10.0, 0.5, 40.0, 4))).scale(1e-3));

  // Cross-correlation peaks at lag 0.
  int best = 99;
  double best_v = -1e300;
  for (int lag = -12; lag <= 12; ++lag) {
    double acc = 0.0;
    for (std::size_t i = a; i < b; ++i) acc += x[i] * y[static_cast<std::size_t>(static_cast<int>(i) + lag)];
    if (acc > best_v) {
      best_v = acc;
      best = lag;
    }
  }
  CHECK(best == 0);
  for (std::size_t i = a; i < b; ++i) REQUIRE(std::fabs(y[i] - x[i]) < 0.01);
}

TEST_CASE("filtfilt attenuates 60 Hz by at least 15 dB") {
  const auto x = sine(60.0, 1.0, 10000);
  const auto y = butterworth_bandpass(x, kFs);
  const double gain_db = 20.0 * std::log10(rms(y, 3000, 7000) / rms(x, 3000, 7000));
  CHECK(gain_db <= -15.0);
  // Forward-backward squares the single-pass magnitude.
  CHECK(gain_db == doctest::Approx(20.0 * std::log10(analytic_mag2(60.0, 0.5, 40.0, 4))).epsilon(0.01));

  // Short series: the edge transient still leaves 60 Hz well below 15 dB.
  const auto xs = sine(60.0, 1.0, 2500);
  const auto ys = butterworth_bandpass(xs, kFs);
  CHECK(20.0 * std::log10(rms(ys, 250, 2250) / rms(xs, 250, 2250)) <= -15.0);
}

TEST_CASE("filtfilt removes DC and is linear") {
  const std::vector<double> dc(2000, 5.0);
  const auto y = butterworth_bandpass(dc, kFs);
  double worst = 0.0;
  for (double v : y) worst = std::max(worst, std::fabs(v));
  CHECK(worst < 5e-6);

  const auto p = white(1500, 3.0, 1), q = white(1500, 7.0, 2);
  const double alpha = 1.7, beta = -0.4;
  std::vector<double> mix(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) mix[i] = alpha * p[i] + beta * q[i];
  const auto fp = butterworth_bandpass(p, kFs), fq = butterworth_bandpass(q, kFs), fm = butterworth_bandpass(mix, kFs);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    err = std::max(err, std::fabs(fm[i] - (alpha * fp[i] + beta * fq[i])));
    scale = std::max(scale, std::fabs(fm[i]));
  }
  CHECK(err / scale < 1e-9);
}

TEST_CASE("filter input validation") {
  const auto f = BandpassFilter::design({}, kFs);
  CHECK(f.pad_length() == 27);
  auto code = [&](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  const std::vector<double> eleven(11, 1.0), twelve(12, 1.0);
  CHECK(code([&] { butterworth_bandpass(eleven, kFs); }) == ErrorCode::TooShort);
  CHECK(butterworth_bandpass(twelve, kFs).size() == 12);
  CHECK(code([&] { BandpassFilter::design({4, 40.0, 0.5}, kFs); }) == ErrorCode::ConfigError);
  CHECK(code([&] { BandpassFilter::design({4, 0.5, 130.0}, kFs); }) == ErrorCode::ConfigError);
}

TEST_CASE("Welch grid and normalization") {
  const auto x = sine(10.0 * kFs / 256.0, 1.0, 2500);
  const auto psd = welch_psd(x, kFs);
  REQUIRE(psd.freqs_hz.size() == 129);
  CHECK(psd.freqs_hz.front() == 0.0);
  CHECK(psd.freqs_hz.back() == doctest::Approx(kFs / 2));
  CHECK(psd.freqs_hz[1] == doctest::Approx(kFs / 256.0));
  CHECK(psd.n_segments == (2500 - 256) / 128 + 1);
  for (double d : psd.density[0]) CHECK(d >= 0.0);
  // A sinusoid of amplitude 1 carries power 1/2.
  CHECK(integrate_density(psd, 0.0, kFs / 2)[0] == doctest::Approx(0.5).epsilon(0.05));

  // White noise: total power equals its variance (Parseval).
  const auto n = white(250 * 120, 2.0, 9);
  const auto pn = welch_psd(n, kFs);
  CHECK(integrate_density(pn, 0.0, kFs / 2)[0] == doctest::Approx(4.0).epsilon(0.05));

  const std::vector<double> zeros(600, 0.0);
  const auto pz = welch_psd(zeros, kFs);
  for (double d : pz.density[0]) CHECK(d == 0.0);

  const std::vector<double> short_x(255, 1.0);
  CHECK_THROWS_AS(welch_psd(short_x, kFs), Error);
  CHECK_THROWS_AS(integrate_density(psd, 10.0, 200.0), Error);
}

TEST_CASE("a bin-centred sinusoid lands in its own band") {
  const std::size_t bins[] = {2, 6, 10, 20, 36};
  for (std::size_t b = 0; b < kNumBands; ++b) {
    const double hz = static_cast<double>(bins[b]) * kFs / 256.0;
    REQUIRE(band_for_frequency(hz) == static_cast<Band>(b));
    const auto x = sine(hz, 1.0, 2560, 0.3);
    const auto psd = welch_psd(x, kFs);
    std::array<double, kNumBands> p{};
    for (std::size_t k = 0; k < kNumBands; ++k) p[k] = band_power(psd, canonical_bands()[k])[0];
    CAPTURE(b);
    CHECK(p[b] == doctest::Approx(0.5).epsilon(0.05));
    for (std::size_t k = 0; k < kNumBands; ++k) {
      if (k != b) CHECK(p[k] < 0.02 * p[b]);
    }
  }
}

TEST_CASE("Welch band fractions agree with a dense DFT") {
  // Two tones plus noise: the share of power per band from the Welch
  // estimate tracks the plain periodogram of the whole series.
  auto x = sine(10.0 * kFs / 256.0, 1.0, 2048);
  const auto y = sine(20.0 * kFs / 256.0, 0.5, 2048, 1.0);
  const auto n = white(2048, 0.2, 4);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i] + n[i];
  const auto psd = welch_psd(x, kFs);
  double welch_total = 0.0, dft_total = 0.0;
  std::array<double, kNumBands> w{}, d{};
  for (std::size_t b = 0; b < kNumBands; ++b) {
    const auto& band = canonical_bands()[b];
    w[b] = band_power(psd, band)[0];
    d[b] = dft_band_power(x, band.lo_hz, band.hi_hz);
    welch_total += w[b];
    dft_total += d[b];
  }
  for (std::size_t b = 0; b < kNumBands; ++b) {
    CAPTURE(b);
    CHECK(std::fabs(w[b] / welch_total - d[b] / dft_total) < 0.02);
  }
}

TEST_CASE("band powers partition the 0.5 to 40 Hz integral") {
  const auto x = white(5000, 5.0, 17);
  const auto psd = welch_psd(x, kFs);
  double sum = 0.0;
  for (const auto& b : canonical_bands()) sum += band_power(psd, b)[0];
  CHECK(sum == doctest::Approx(integrate_density(psd, 0.5, 40.0)[0]).epsilon(1e-12));
}

TEST_CASE("baseline correction") {
  const std::vector<std::vector<double>> pre = {std::vector<double>(500, 5.0), std::vector<double>(500, -2.0)};
  const std::vector<std::vector<double>> sig = {std::vector<double>(300, 5.0), {1.0, 2.0, 3.0}};
  const auto out = baseline_correct(sig, pre, kFs);
  for (double v : out[0]) CHECK(v == 0.0);
  CHECK(out[1] == std::vector<double>{3.0, 4.0, 5.0});

  const std::vector<std::vector<double>> short_pre = {std::vector<double>(400, 0.0), std::vector<double>(400, 0.0)};
  try {
    baseline_correct(sig, short_pre, kFs);
    FAIL("expected BaselineLengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BaselineLengthMismatch);
  }
}

TEST_CASE("feature vector layout") {
  const auto& names = eeg_feature_names();
  REQUIRE(names.size() == 144);
  CHECK(names[0] == "eeg_Fp1_delta_power");
  CHECK(names[2] == "eeg_Fp1_alpha_power");
  CHECK(names[5] == "eeg_Fp1_mean");
  CHECK(names[8] == "eeg_Fp1_max");
  CHECK(names[9] == "eeg_Fp2_delta_power");
  CHECK(std::set<std::string>(names.begin(), names.end()).size() == 144);

  const auto t = eeg_trial(4.0);
  std::vector<std::vector<double>> ch(16, std::vector<double>(1500, 0.0));
  const auto f = extract_eeg_features(t, recording_from(ch));
  const auto v = f.values();
  REQUIRE(v.size() == 144);
  for (double x : v) CHECK(x == 0.0);
  CHECK_FALSE(f.spectral_missing);
}

TEST_CASE("samples after the response never change the features") {
  const auto t = eeg_trial(3.0);
  std::vector<std::vector<double>> ch(16);
  for (std::size_t c = 0; c < 16; ++c) ch[c] = white(1250, 10.0, static_cast<unsigned>(c));
  const auto base = extract_eeg_features(t, recording_from(ch)).values();
  for (auto& c : ch) {
    for (std::size_t i = 1250; i < 1250 + 400; ++i) c.push_back(1e4 * std::sin(static_cast<double>(i)));
  }
  const auto extended = extract_eeg_features(t, recording_from(ch)).values();
  CHECK(base == extended);

  // Samples before the baseline window are likewise ignored: prepend 1 s of
  // junk and shift the recording clock to match.
  auto shifted = t;
  shifted.eeg_t0_ms = -1000.0;
  for (auto& c : ch) c.insert(c.begin(), 250, 1e6);
  CHECK(extract_eeg_features(shifted, recording_from(ch)).values() == base);
}

TEST_CASE("window checks and short windows") {
  std::vector<std::vector<double>> ch(16, white(1000, 1.0, 5));
  auto t = eeg_trial(1.0);
  t.stimulus_onset_ms = 1500.0;
  t.response_ms = 2500.0;
  CHECK_THROWS_AS(extract_eeg_features(t, recording_from(ch)), Error);

  t = eeg_trial(0.8);  // 200 samples, below one Welch segment
  const auto f = extract_eeg_features(t, recording_from(ch));
  CHECK(f.spectral_missing);
  CHECK(std::isnan(f.band_power[0][0]));
  CHECK(std::isfinite(f.sd[0]));

  t = eeg_trial(2.0);
  t.eeg_t0_ms = 1000.0;  // recording starts 1 s into the trial clock
  CHECK_THROWS_AS(extract_eeg_features(t, recording_from(ch)), Error);

  std::vector<std::vector<double>> few(3, white(1000, 1.0, 5));
  CHECK_THROWS_AS(extract_eeg_features(eeg_trial(1.0), recording_from(few)), Error);
}

TEST_CASE("uv_scale multiplies amplitudes before filtering") {
  std::vector<std::vector<double>> ch(16);
  for (std::size_t c = 0; c < 16; ++c) ch[c] = white(1250, 10.0, static_cast<unsigned>(c + 40));
  auto t = eeg_trial(3.0);
  const auto a = extract_eeg_features(t, recording_from(ch));
  t.uv_scale = 2.0;
  const auto b = extract_eeg_features(t, recording_from(ch));
  CHECK(b.sd[3] == doctest::Approx(2.0 * a.sd[3]));
  CHECK(b.band_power[3][2] == doctest::Approx(4.0 * a.band_power[3][2]));
}

TEST_CASE("injected +50% alpha at C4 is recovered against a matched control") {
  ingest::SynthSpec spec;
  spec.n_memes = 8;
  spec.experiments = "eeg_hr";
  spec.p_non_sexist = 0.0;
  spec.p_direct = 1.0;
  spec.p_judgmental = 0.0;
  spec.rt_s = {{20.0, 0.5}, {20.0, 0.5}, {20.0, 0.5}};
  spec.seed = 5;
  const auto control = ingest::synthesize(spec);
  spec.eeg_effect.push_back({"sexist", "C4", Band::Alpha, 0.5});
  const auto treated = ingest::synthesize(spec);

  const std::size_t c4 = *ChannelLayout::standard16().index_of("C4");
  const std::size_t c3 = *ChannelLayout::standard16().index_of("C3");
  double num = 0.0, den = 0.0, other_num = 0.0, other_den = 0.0;
  for (std::size_t i = 0; i < control.trials.size(); ++i) {
    const auto fc = extract_eeg_features(control.trials[i], *control.eeg[i]);
    const auto ft = extract_eeg_features(treated.trials[i], *treated.eeg[i]);
    num += ft.band_power[c4][2];
    den += fc.band_power[c4][2];
    other_num += ft.band_power[c3][2];
    other_den += fc.band_power[c3][2];
  }
  CHECK(num / den == doctest::Approx(1.5).epsilon(0.10));
  CHECK(other_num == other_den);
}
