#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>

#include "memephys/error.hpp"
#include "memephys/harmonize/harmonizer.hpp"
#include "memephys/util/descriptive.hpp"

using namespace memephys;
using namespace memephys::harmonize;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

// Box-Cox log-likelihood written out directly, for the grid-scan oracle.
double oracle_ll(const std::vector<double>& x, double lambda) {
  const double n = static_cast<double>(x.size());
  std::vector<double> y;
  double sum_log = 0.0;
  for (double v : x) {
    y.push_back(lambda == 0.0 ? std::log(v) : (std::pow(v, lambda) - 1.0) / lambda);
    sum_log += std::log(v);
  }
  const double m = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) ss += (v - m) * (v - m);
  return -0.5 * n * std::log(ss / n) + (lambda - 1.0) * sum_log;
}

struct TwoBatch {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> batch;
};

// Both batches observe the same latent signal draws (plus a little
// independent noise); batch "b" adds +offset and a x scale on top.
TwoBatch two_batches(std::size_t per_batch, std::size_t nf, double offset, double scale, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> shared(per_batch, std::vector<double>(nf));
  for (auto& row : shared) {
    for (std::size_t f = 0; f < nf; ++f) row[f] = 10.0 + static_cast<double>(f) + nd(gen);
  }
  TwoBatch d;
  for (const char* b : {"a", "b"}) {
    const bool shifted = std::string(b) == "b";
    for (std::size_t r = 0; r < per_batch; ++r) {
      std::vector<double> row;
      for (std::size_t f = 0; f < nf; ++f) {
        const double v = shared[r][f] + 0.1 * nd(gen);
        row.push_back(shifted ? v * scale + offset : v);
      }
      d.rows.push_back(row);
      d.batch.push_back(b);
    }
  }
  return d;
}

features::FeatureTable small_table(std::size_t n_subjects, std::size_t per_subject, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::lognormal_distribution<double> ln(1.0, 0.5);
  features::FeatureTable t;
  t.columns = {"eeg_C4_alpha_power", "eeg_C4_mean", "eeg_O1_delta_power", "eeg_Fp1_flat", "et_fixation_mean", "rt_s"};
  for (std::size_t s = 0; s < n_subjects; ++s) {
    const double gain = 1.0 + 0.3 * static_cast<double>(s);
    for (std::size_t k = 0; k < per_subject; ++k) {
      features::RowMeta m;
      m.trial_id = "t" + std::to_string(s) + "_" + std::to_string(k);
      m.meme_id = "m" + std::to_string(k);
      m.subject_id = "s" + std::to_string(s);
      t.rows.push_back(m);
      t.values.push_back({gain * ln(gen), 0.2 * nd(gen) + 0.1 * static_cast<double>(s), gain * 3.0 * ln(gen), 4.0,
                          250.0 + 20.0 * nd(gen), 5.0 + nd(gen)});
    }
  }
  return t;
}

}  // namespace

TEST_CASE("Box-Cox with lambda 1 is a shift by one") {
  const std::vector<double> x = {0.5, 2.0, 7.25};
  const auto y = boxcox_apply(x, BoxCox{1.0, 0.0, 0.5});
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i] - 1.0).epsilon(1e-14));
  CHECK(boxcox_value(std::exp(1.5), 0.0) == doctest::Approx(1.5));
}

TEST_CASE("Box-Cox recovers lambda near zero on log-normal data") {
  std::mt19937_64 gen(1);
  std::lognormal_distribution<double> ln(0.0, 0.7);
  std::vector<double> x(10000);
  for (auto& v : x) v = ln(gen);
  const auto p = boxcox_fit(x);
  CHECK(p.shift == 0.0);
  CHECK(std::fabs(p.lambda) < 0.1);

  // Grid scan at 1e-3 resolution.
  double best = -5.0, best_ll = -1e300;
  for (int i = -5000; i <= 5000; ++i) {
    const double l = i * 1e-3;
    const double ll = oracle_ll(x, l);
    if (ll > best_ll) {
      best_ll = ll;
      best = l;
    }
  }
  CHECK(std::fabs(p.lambda - best) <= 1e-3);
}

TEST_CASE("Box-Cox shifts non-positive data and rejects constants") {
  const std::vector<double> x = {-3.0, -1.0, 0.0, 2.0, 5.0, 9.0};
  const auto p = boxcox_fit(x);
  CHECK(p.shift == 4.0);
  CHECK(p.floor == 1.0);
  // Held-out value below the training range is floored, not NaN.
  const auto y = boxcox_apply(std::vector<double>{-10.0, std::nan("")}, p);
  CHECK(y[0] == doctest::Approx(boxcox_value(1.0, p.lambda)));
  CHECK(std::isnan(y[1]));
  CHECK(code_of([] { boxcox_fit(std::vector<double>(10, 2.0)); }) == ErrorCode::DegenerateInput);
  CHECK(code_of([] { boxcox_fit(std::vector<double>{1.0}); }) == ErrorCode::DegenerateInput);
}

TEST_CASE("winsorize clamps at interpolated quantiles") {
  std::vector<double> x;
  for (int i = 1; i <= 100; ++i) x.push_back(i);
  const auto w = winsorize(x, 0.01, 0.99);
  CHECK(*std::min_element(w.begin(), w.end()) == doctest::Approx(1.99));
  CHECK(*std::max_element(w.begin(), w.end()) == doctest::Approx(99.01));
  int moved = 0;
  for (std::size_t i = 0; i < x.size(); ++i) moved += (w[i] != x[i]);
  CHECK(moved == 2);
  CHECK(winsorize(x, 0.0, 1.0) == x);
  const std::vector<double> flat(7, 3.0);
  CHECK(winsorize(flat, 0.01, 0.99) == flat);
  CHECK(code_of([&] { winsorize(x, 0.5, 0.4); }) == ErrorCode::ConfigError);
}

TEST_CASE("robust z") {
  const std::vector<double> sym = {-3, -1, 0, 1, 3, 10, -10};
  const auto z = robust_z(sym);
  CHECK(median(z) == 0.0);

  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd(5.0, 3.0);
  std::vector<double> x(10000);
  for (auto& v : x) v = nd(gen);
  CHECK(sample_sd(robust_z(x)) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(code_of([] { robust_z(std::vector<double>(5, 1.0)); }) == ErrorCode::ZeroMAD);
}

TEST_CASE("ComBat removes additive and multiplicative batch effects") {
  const auto d = two_batches(300, 12, 2.0, 1.5, 4);
  const auto p = combat_fit(d.rows, d.batch);
  const auto out = combat_apply(p, d.rows, d.batch);
  for (std::size_t f = 0; f < 12; ++f) {
    std::vector<double> a, b;
    for (std::size_t r = 0; r < out.size(); ++r) (d.batch[r] == "a" ? a : b).push_back(out[r][f]);
    CAPTURE(f);
    CHECK(std::fabs(mean(a) - mean(b)) < 0.05);
    const double ratio = sample_variance(a) / sample_variance(b);
    CHECK(ratio >= 0.9);
    CHECK(ratio <= 1.1);
  }
  CHECK(p.iterations >= 1);
  CHECK(p.iterations < 100);
}

TEST_CASE("ComBat with zero-effect parameters is the identity") {
  const auto d = two_batches(20, 5, 0.0, 1.0, 6);
  auto p = combat_fit(d.rows, d.batch);
  for (auto& g : p.gamma_star) std::fill(g.begin(), g.end(), 0.0);
  for (auto& g : p.delta_sq_star) std::fill(g.begin(), g.end(), 1.0);
  const auto out = combat_apply(p, d.rows, d.batch);
  for (std::size_t r = 0; r < out.size(); ++r) {
    for (std::size_t f = 0; f < 5; ++f) CHECK(std::fabs(out[r][f] - d.rows[r][f]) < 1e-6);
  }
}

TEST_CASE("ComBat input errors and unseen batches") {
  const auto d = two_batches(10, 3, 1.0, 1.0, 2);
  std::vector<std::string> one(d.batch.size(), "only");
  CHECK(code_of([&] { combat_fit(d.rows, one); }) == ErrorCode::SingletonBatch);
  auto lonely = d.batch;
  lonely.back() = "c";
  CHECK(code_of([&] { combat_fit(d.rows, lonely); }) == ErrorCode::SingletonBatch);
  ComBatOptions skip;
  skip.skip_small_batches = true;
  CHECK_NOTHROW(combat_fit(d.rows, lonely, skip));

  ComBatOptions strict;
  strict.max_iter = 1;
  strict.tolerance = 1e-300;
  try {
    combat_fit(d.rows, d.batch, strict);
    FAIL("expected NonConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonConvergence);
    CHECK(std::string(e.what()).find("1 iterations") != std::string::npos);
  }

  const auto p = combat_fit(d.rows, d.batch);
  const std::vector<std::string> unseen(d.rows.size(), "zz");
  CHECK(combat_apply(p, d.rows, unseen) == d.rows);
}

TEST_CASE("harmonizer pipeline") {
  const auto train = small_table(6, 40, 3);
  const auto params = fit_harmonizer(train);
  // EEG columns only by default; the constant column is dropped.
  CHECK(params.features.size() == 4);
  REQUIRE(params.dropped == std::vector<std::string>{"eeg_Fp1_flat"});
  const auto out = apply_harmonizer(params, train);
  CHECK(out.columns.size() == train.columns.size() - 1);
  CHECK_FALSE(out.column_index("eeg_Fp1_flat").has_value());
  const auto et = out.require_column("et_fixation_mean");
  for (std::size_t r = 0; r < out.size(); ++r) CHECK(out.values[r][et] == train.values[r][4]);

  // Refitting the last stage on the harmonized training data moves nothing.
  for (const auto* name : {"eeg_C4_alpha_power", "eeg_C4_mean", "eeg_O1_delta_power"}) {
    const auto r = robust_fit(out.column(out.require_column(name)));
    CHECK(std::fabs(r.center) < 1e-3);
    CHECK(std::fabs(r.scale - 1.0) < 1e-3);
  }

  // Subject gain is removed: per-subject medians of alpha power line up.
  const auto alpha = out.require_column("eeg_C4_alpha_power");
  std::vector<double> medians;
  for (std::size_t s = 0; s < 6; ++s) {
    std::vector<double> v;
    for (std::size_t r = 0; r < out.size(); ++r) {
      if (out.rows[r].subject_id == "s" + std::to_string(s)) v.push_back(out.values[r][alpha]);
    }
    medians.push_back(median(v));
  }
  CHECK(*std::max_element(medians.begin(), medians.end()) - *std::min_element(medians.begin(), medians.end()) < 0.6);

  HarmonizeOptions all;
  all.include_behavioral = true;
  const auto p_all = fit_harmonizer(train, all);
  CHECK(p_all.features.size() == 6);
}

TEST_CASE("harmonizer params round trip through JSON") {
  const auto train = small_table(4, 30, 9);
  const auto params = fit_harmonizer(train);
  const auto path = std::filesystem::temp_directory_path() / "memephys_test_harmonize" / "params.json";
  save_harmonize_params(path, params);
  const auto back = load_harmonize_params(path);
  CHECK(harmonize_params_to_json(back) == harmonize_params_to_json(params));
  const auto a = apply_harmonizer(params, train), b = apply_harmonizer(back, train);
  CHECK(a.values == b.values);
}

TEST_CASE("held-out rows are transformed independently") {
  const auto all = small_table(5, 30, 12);
  features::FeatureTable train, test;
  train.columns = test.columns = all.columns;
  for (std::size_t r = 0; r < all.size(); ++r) {
    auto& dst = (r % 5 == 0) ? test : train;
    dst.rows.push_back(all.rows[r]);
    dst.values.push_back(all.values[r]);
  }
  const auto params = fit_harmonizer(train);
  const auto out = apply_harmonizer(params, test);

  auto perm = test;
  std::reverse(perm.rows.begin(), perm.rows.end());
  std::reverse(perm.values.begin(), perm.values.end());
  const auto out_perm = apply_harmonizer(params, perm);
  for (std::size_t r = 0; r < out.size(); ++r) CHECK(out_perm.values[out.size() - 1 - r] == out.values[r]);

  // Refitting on the same training rows reproduces the params exactly.
  CHECK(harmonize_params_to_json(fit_harmonizer(train)) == harmonize_params_to_json(params));
}
