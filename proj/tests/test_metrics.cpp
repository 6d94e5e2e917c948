// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>

#include "doctest.h"
#include "oracles.h"
#include "soundtriage/metrics.h"

using namespace soundtriage;

namespace {

EventRoll roll_of(std::initializer_list<int> bits) {
  EventRoll r{BinaryMatrix(1, static_cast<Eigen::Index>(bits.size())), 0.02};
  int t = 0;
  for (int b : bits) r.active(0, t++) = static_cast<std::uint8_t>(b);
  return r;
}

EventRoll random_roll(Rng& rng, int n, int t, double p) {
  std::bernoulli_distribution coin(p);
  EventRoll r{BinaryMatrix(n, t), 0.02};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < t; ++j) r.active(i, j) = coin(rng);
  return r;
}

// Events on a 1/16 s grid within [0, 4).
std::vector<EventInstance> random_events(Rng& rng, int classes) {
  std::uniform_int_distribution<int> count(0, 4), cls(0, classes - 1), start(0, 60), len(1, 24);
  std::vector<EventInstance> out;
  const int k = count(rng);
  for (int i = 0; i < k; ++i) {
    const int a = start(rng);
    const int b = std::min(64, a + len(rng));
    out.push_back({cls(rng), a / 16.0, b / 16.0});
  }
  return out;
}

}  // namespace

TEST_CASE("identical rolls score perfectly") {
  Rng rng(1);
  auto r = random_roll(rng, 3, 10, 0.5);
  r.active.row(0).setOnes();
  CHECK(frame_f1(r, r).macro == 1.0);
  const auto rates = insertion_deletion(r, r);
  for (const auto& v : rates.insertion) CHECK(v.value() == 0.0);
  for (const auto& v : rates.deletion) CHECK(v.value() == 0.0);
}

TEST_CASE("one hit, one miss, one false alarm") {
  const auto ref = roll_of({1, 1, 0, 0});
  const auto pred = roll_of({1, 0, 1, 0});
  const auto c = frame_counts(pred, ref)[0];
  CHECK(c.tp == 1);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 1);
  CHECK(frame_f1(pred, ref).macro == 0.5);
  const auto rates = insertion_deletion(pred, ref);
  CHECK(*rates.insertion[0] == 0.5);
  CHECK(*rates.deletion[0] == 0.5);
}

TEST_CASE("all-active prediction against a single active frame") {
  const int t = 9;
  EventRoll ref{BinaryMatrix::Zero(1, t), 0.02};
  ref.active(0, 4) = 1;
  EventRoll pred{BinaryMatrix::Ones(1, t), 0.02};
  const auto rates = insertion_deletion(pred, ref);
  CHECK(*rates.deletion[0] == 0.0);
  CHECK(*rates.insertion[0] == static_cast<double>(t - 1));
}

TEST_CASE("classes without reference activity have undefined rates") {
  EventRoll ref{BinaryMatrix::Zero(2, 4), 0.02};
  ref.active(1, 0) = 1;
  EventRoll pred{BinaryMatrix::Ones(2, 4), 0.02};
  const auto rates = insertion_deletion(pred, ref);
  CHECK_FALSE(rates.insertion[0].has_value());
  CHECK_FALSE(rates.deletion[0].has_value());
  CHECK(*rates.mean_insertion == 3.0);
  CHECK(frame_f1(pred, ref).per_class[0] == 0.0);
}

TEST_CASE("frame metrics match counting oracles") {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<EventRoll> pred, ref;
    const int clips = 1 + trial % 3;
    for (int i = 0; i < clips; ++i) {
      pred.push_back(random_roll(rng, 5, 20, 0.3));
      ref.push_back(random_roll(rng, 5, 20, 0.3));
    }
    const auto got = frame_f1(pred, ref);
    const auto want = oracle::frame_counts(pred, ref);
    double macro = 0;
    for (int n = 0; n < 5; ++n) {
      REQUIRE(got.per_class[n] == oracle::f(want[n]));
      macro += oracle::f(want[n]);
    }
    REQUIRE(got.macro == doctest::Approx(macro / 5).epsilon(1e-15));

    const auto rates = insertion_deletion(pred, ref);
    const auto o = oracle::insertion_deletion(pred, ref);
    for (int n = 0; n < 5; ++n) {
      if (o.act[n] == 0) {
        REQUIRE_FALSE(rates.insertion[n].has_value());
        continue;
      }
      REQUIRE(*rates.insertion[n] == static_cast<double>(o.ins[n]) / o.act[n]);
      REQUIRE(*rates.deletion[n] == static_cast<double>(o.del[n]) / o.act[n]);
    }
  }
}

TEST_CASE("frame metrics ignore clip order") {
  Rng rng(3);
  std::vector<EventRoll> pred, ref;
  for (int i = 0; i < 4; ++i) {
    pred.push_back(random_roll(rng, 3, 12, 0.4));
    ref.push_back(random_roll(rng, 3, 12, 0.4));
  }
  const auto a = frame_f1(pred, ref);
  const auto ra = insertion_deletion(pred, ref);
  std::reverse(pred.begin(), pred.end());
  std::reverse(ref.begin(), ref.end());
  CHECK(frame_f1(pred, ref).per_class == a.per_class);
  CHECK(insertion_deletion(pred, ref).insertion == ra.insertion);
}

TEST_CASE("insertions and deletions never share a frame") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_roll(rng, 1, 1, 0.5);
    const auto r = random_roll(rng, 1, 1, 0.5);
    const auto o = oracle::insertion_deletion({p}, {r});
    CHECK(o.ins[0] * o.del[0] == 0);
  }
}

TEST_CASE("intersection hand examples") {
  const std::vector<EventInstance> ref{{0, 0.0, 1.0}};
  auto c = intersection_counts({{0, 0.3, 1.0}}, ref, 0, {});
  CHECK(c.tp == 1);
  CHECK(c.fp == 0);
  CHECK(c.fn == 0);
  c = intersection_counts({{0, 0.0, 0.4}}, ref, 0, {});
  CHECK(c.tp == 0);
  CHECK(c.fp == 0);
  CHECK(c.fn == 1);

  std::vector<std::vector<EventInstance>> p{{}}, r{ref};
  CHECK(intersection_f1(p, r, 1).macro == 0.0);
}

TEST_CASE("intersection ignores other classes") {
  const auto c = intersection_counts({{1, 0.0, 1.0}}, {{0, 0.0, 1.0}}, 0, {});
  CHECK(c.tp == 0);
  CHECK(c.fn == 1);
  CHECK(c.fp == 0);
}

TEST_CASE("intersection matches a cell-counting oracle") {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pred = random_events(rng, 2);
    const auto ref = random_events(rng, 2);
    for (int n = 0; n < 2; ++n) {
      const auto got = intersection_counts(pred, ref, n, {});
      const auto want = oracle::intersection(pred, ref, n, 0.5, 0.5, 16, 64);
      REQUIRE(got.tp == want.tp);
      REQUIRE(got.fp == want.fp);
      REQUIRE(got.fn == want.fn);
    }
  }
}

TEST_CASE("intersection counts add up across clips") {
  Rng rng(6);
  std::vector<std::vector<EventInstance>> pred, ref;
  oracle::Counts total;
  for (int i = 0; i < 6; ++i) {
    pred.push_back(random_events(rng, 1));
    ref.push_back(random_events(rng, 1));
    const auto c = oracle::intersection(pred.back(), ref.back(), 0, 0.5, 0.5, 16, 64);
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  CHECK(intersection_f1(pred, ref, 1).per_class[0] == oracle::f(total));
}

TEST_CASE("malformed inputs are rejected") {
  CHECK_THROWS_AS(intersection_counts({{0, 1.0, 0.5}}, {}, 0, {}), ConfigError);
  CHECK_THROWS_AS(frame_f1(roll_of({1, 0}), roll_of({1, 0, 0})), ShapeError);
  IntersectionConfig bad{0.0, 0.5};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("report serializes undefined rates as null") {
  const auto ref = roll_of({0, 0});
  const auto pred = roll_of({1, 0});
  std::vector<EventRoll> p{pred}, r{ref};
  std::vector<std::vector<EventInstance>> pe{{{0, 0.0, 0.02}}}, re{{}};
  const auto report = build_report(p, r, pe, re, {"dog"});
  CHECK(report.to_json().find("null") != std::string::npos);
  CHECK(report.summary_tsv().find("dog\t0.000000") != std::string::npos);
}
