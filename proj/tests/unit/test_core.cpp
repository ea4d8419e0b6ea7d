#include <doctest.h>

#include <cmath>
#include <set>

#include "memephys/core/types.hpp"
#include "memephys/error.hpp"
#include "memephys/util/descriptive.hpp"
#include "memephys/util/parallel.hpp"
#include "memephys/util/rng.hpp"

using namespace memephys;

TEST_CASE("canonical bands are the five EEG bands in order") {
  const auto& bands = canonical_bands();
  REQUIRE(bands.size() == 5);
  const double lo[] = {0.5, 4, 8, 13, 30};
  const double hi[] = {4, 8, 13, 30, 40};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(bands[i].band == static_cast<Band>(i));
    CHECK(bands[i].lo_hz == lo[i]);
    CHECK(bands[i].hi_hz == hi[i]);
    CHECK(bands[i].lo_hz < bands[i].hi_hz);
    if (i > 0) CHECK(bands[i].lo_hz == bands[i - 1].hi_hz);
  }
  CHECK(bands.front().lo_hz == 0.5);
  CHECK(bands.back().hi_hz == 40.0);
  CHECK(bands[2].name() == "alpha");
}

TEST_CASE("band lookup uses half-open intervals with Gamma closed at 40 Hz") {
  CHECK(band_for_frequency(4.0) == Band::Theta);
  CHECK(band_for_frequency(3.999) == Band::Delta);
  CHECK(band_for_frequency(8.0) == Band::Alpha);
  CHECK(band_for_frequency(13.0) == Band::Beta);
  CHECK(band_for_frequency(30.0) == Band::Gamma);
  CHECK(band_for_frequency(40.0) == Band::Gamma);
  CHECK(band_for_frequency(0.5) == Band::Delta);
  CHECK_FALSE(band_for_frequency(0.49).has_value());
  CHECK_FALSE(band_for_frequency(40.01).has_value());

  // Every frequency in (0.5, 40) lands in exactly one band.
  for (double f = 0.51; f < 40.0; f += 0.137) {
    int hits = 0;
    for (const auto& b : canonical_bands()) hits += (f >= b.lo_hz && f < b.hi_hz);
    CHECK(hits == 1);
  }
}

TEST_CASE("standard layout has 16 unique channels inside the head circle") {
  const auto& layout = ChannelLayout::standard16();
  REQUIRE(layout.size() == 16);
  std::set<std::string> names(layout.names().begin(), layout.names().end());
  CHECK(names.size() == 16);
  for (const auto& p : layout.positions()) CHECK(std::hypot(p.x, p.y) < 1.0);
  CHECK(layout.index_of("C4").has_value());
  CHECK(layout.index_of("Fp2").has_value());
  CHECK_FALSE(layout.index_of("Cz").has_value());
  // C4 sits on the right hemisphere, Fp2 at the front.
  CHECK(layout.positions()[*layout.index_of("C4")].x > 0);
  CHECK(layout.positions()[*layout.index_of("Fp2")].y > 0.8);

  CHECK_THROWS_AS(ChannelLayout({"a"}, {{0, 0}}), Error);
}

TEST_CASE("labels: task2/task3 only on sexist items") {
  SexismLabels l;
  CHECK(l.valid());
  l.task2 = Task2::Direct;
  CHECK_FALSE(l.valid());
  l.task1 = Task1::Sexist;
  CHECK(l.valid());
  l.task3.set(static_cast<std::size_t>(Category::Objectification));
  l.task3.set(static_cast<std::size_t>(Category::MisogynyNSV));
  CHECK(l.valid());
  CHECK(l.has(Category::Objectification));
  CHECK(sexism_level(l) == SexismLevel::Direct);

  SexismLabels ns;
  ns.task3.set(0);
  CHECK_FALSE(ns.valid());
}

TEST_CASE("trial validation names the offending trial") {
  Trial t;
  t.trial_id = "t7";
  t.meme_id = "m";
  t.subject_id = "s";
  t.stimulus_onset_ms = 1000;
  t.response_ms = 1000;
  try {
    validate_trial(t);
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
    CHECK(std::string(e.what()).find("t7") != std::string::npos);
  }
  t.response_ms = 1500;
  CHECK_NOTHROW(validate_trial(t));
  t.labels.task2 = Task2::Judgmental;
  CHECK_THROWS_AS(validate_trial(t), Error);
}

TEST_CASE("rng is deterministic and stream derivation separates purposes") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng root(42);
  CHECK(root.derive("x").next_u64() != root.derive("y").next_u64());
  CHECK(root.derive("x", 1).next_u64() != root.derive("x", 2).next_u64());
  CHECK(root.derive("x", 3).next_u64() == Rng(42).derive("x", 3).next_u64());
}

TEST_CASE("rng distributions have the requested moments") {
  Rng r(7);
  const int n = 200000;
  std::vector<double> g, ga, po;
  for (int i = 0; i < n; ++i) {
    g.push_back(r.normal(1.5, 2.0));
    ga.push_back(r.gamma(2.26, 6.05));
    po.push_back(static_cast<double>(r.poisson(37.0)));
  }
  CHECK(mean(g) == doctest::Approx(1.5).epsilon(0.01));
  CHECK(sample_sd(g) == doctest::Approx(2.0).epsilon(0.01));
  CHECK(mean(ga) == doctest::Approx(2.26 * 6.05).epsilon(0.01));
  CHECK(sample_variance(ga) == doctest::Approx(2.26 * 6.05 * 6.05).epsilon(0.03));
  CHECK(mean(po) == doctest::Approx(37.0).epsilon(0.01));
  CHECK(sample_variance(po) == doctest::Approx(37.0).epsilon(0.03));
  std::vector<double> small;
  for (int i = 0; i < n; ++i) small.push_back(static_cast<double>(r.poisson(3.0)));
  CHECK(mean(small) == doctest::Approx(3.0).epsilon(0.01));
}

TEST_CASE("descriptive statistics") {
  const std::vector<double> x = {200, 300, 400};
  const auto s = summarize(x);
  CHECK(s.count == 3);
  CHECK(*s.mean == 300);
  CHECK(*s.sd == doctest::Approx(100));
  CHECK(*s.min == 200);
  CHECK(*s.max == 400);
  CHECK_FALSE(summarize(std::vector<double>{}).mean.has_value());
  CHECK_FALSE(summarize(std::vector<double>{5}).sd.has_value());

  std::vector<double> seq;
  for (int i = 1; i <= 100; ++i) seq.push_back(i);
  CHECK(quantile(seq, 0.01) == doctest::Approx(1.99));
  CHECK(quantile(seq, 0.99) == doctest::Approx(99.01));
  CHECK(median(std::vector<double>{3, 1, 2}) == 2);
  CHECK(mad(std::vector<double>{1, 2, 3, 4, 100}) == 1);
}

TEST_CASE("parallel_for output does not depend on thread count") {
  auto run = [](std::size_t threads) {
    return parallel_map<double>(101, threads, [](std::size_t i) { return std::sqrt(static_cast<double>(i)); });
  };
  CHECK(run(1) == run(4));
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) { if (i == 5) throw std::runtime_error("x"); }),
                  std::runtime_error);
}
