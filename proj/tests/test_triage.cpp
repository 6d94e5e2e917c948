// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include "doctest.h"
#include "gamma_oracle.h"
#include "soundtriage/triage.h"

using namespace soundtriage;

TEST_CASE("dirichlet draws live on the simplex") {
  Rng rng(3);
  const auto cfg = DirichletConfig::symmetric(10, 0.1);
  Vector mean = Vector::Zero(10);
  const int draws = 100000;
  int over_half = 0;
  for (int i = 0; i < draws; ++i) {
    const auto w = sample_triage(cfg, rng);
    REQUIRE(std::abs(w.normalized().sum() - 1.0) <= 1e-9);
    REQUIRE(w.normalized().minCoeff() >= 0.0);
    mean += w.normalized();
    if (w.normalized().maxCoeff() > 0.5) ++over_half;
  }
  mean /= draws;
  for (int k = 0; k < 10; ++k) CHECK(std::abs(mean[k] - 0.1) <= 0.005);

  oracle::GammaSampler gamma(99);
  const double want = gamma.max_exceeds(10, 0.1, 0.5, draws);
  CHECK(std::abs(static_cast<double>(over_half) / draws - want) <= 0.01);
}

TEST_CASE("larger alpha concentrates near uniform") {
  Rng rng(4);
  const auto sparse = DirichletConfig::symmetric(5, 0.1);
  const auto dense = DirichletConfig::symmetric(5, 10.0);
  double s = 0, d = 0;
  for (int i = 0; i < 2000; ++i) {
    s += sample_triage(sparse, rng).normalized().maxCoeff();
    d += sample_triage(dense, rng).normalized().maxCoeff();
  }
  CHECK(s > d);
}

TEST_CASE("dirichlet draws are reproducible") {
  Rng a(17), b(17);
  const auto cfg = DirichletConfig::symmetric(4, 0.1);
  for (int i = 0; i < 20; ++i) {
    CHECK(sample_triage(cfg, a).raw() == sample_triage(cfg, b).raw());
  }
}

TEST_CASE("invalid dirichlet parameters") {
  CHECK_THROWS_AS(DirichletConfig::symmetric(3, 0.0).validate(), ConfigError);
  CHECK_THROWS_AS(DirichletConfig::symmetric(3, -1.0).validate(), ConfigError);
  CHECK_THROWS_AS(DirichletConfig::symmetric(0, 0.1).validate(), ConfigError);
}

TEST_CASE("weights reject invalid raw vectors") {
  CHECK_THROWS_AS(TriageWeights::from_raw(std::vector<double>{1, -1}), ConfigError);
  CHECK_THROWS_AS(TriageWeights::from_raw(std::vector<double>{0, 0}), ConfigError);
  CHECK_THROWS_AS(
      TriageWeights::from_raw(std::vector<double>{1, std::numeric_limits<double>::quiet_NaN()}),
      ConfigError);
  CHECK_THROWS_AS(TriageWeights::from_raw(std::vector<double>{}), ConfigError);
}

TEST_CASE("targeted inference weights") {
  auto w = make_inference_weights(0, 5.0, 10);
  CHECK(w.normalized()[0] == doctest::Approx(5.0 / 14));
  for (int k = 1; k < 10; ++k) CHECK(w.normalized()[k] == doctest::Approx(1.0 / 14));

  w = make_inference_weights(3, 20.0, 10);
  Eigen::Index arg;
  w.normalized().maxCoeff(&arg);
  CHECK(arg == 3);
  double total = 0;
  for (int k = 0; k < 10; ++k) total += k == 3 ? 20.0 : 1.0;
  CHECK(w.normalized()[3] == doctest::Approx(20.0 / total));

  w = make_inference_weights(2, 1.0, 4);
  for (int k = 0; k < 4; ++k) CHECK(w.normalized()[k] == doctest::Approx(0.25));

  CHECK_THROWS_AS(make_inference_weights(10, 2.0, 10), ConfigError);
  CHECK_THROWS_AS(make_inference_weights(-1, 2.0, 10), ConfigError);
}

TEST_CASE("conditioning input scales by class count") {
  auto s = scale_for_conditioning(TriageWeights::uniform(10));
  for (int k = 0; k < 10; ++k) CHECK(s[k] == doctest::Approx(1.0));
  s = scale_for_conditioning(make_inference_weights(0, 5.0, 10));
  CHECK(s[0] == doctest::Approx(50.0 / 14));
  for (int k = 1; k < 10; ++k) CHECK(s[k] == doctest::Approx(10.0 / 14));
  s = scale_for_conditioning(TriageWeights::uniform(1));
  CHECK(s[0] == doctest::Approx(1.0));
}

TEST_CASE("lambda parsing") {
  const auto w = parse_lambda("1,3");
  CHECK(w.normalized()[1] == doctest::Approx(0.75));
  CHECK_THROWS_AS(parse_lambda("1,x"), ConfigError);
  CHECK_THROWS_AS(parse_lambda(""), ConfigError);
}
