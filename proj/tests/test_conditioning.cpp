// Copyright 2026 The soundtriage Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "soundtriage/conditioning.h"

using namespace soundtriage;

namespace {

ConditionerConfig small_config() {
  ConditionerConfig c;
  c.input_dim = 3;
  c.hidden_dims = {5, 7, 4};
  c.output_dim = 4;
  return c;
}

Vector random_vector(Rng& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// A smooth scalar of the FiLM output with a known gradient.
struct Probe {
  Vector a, b;
  double value(const FilmParams& f) const {
    return a.dot(f.mu) + (b.array() * f.sigma.array().square()).sum();
  }
  FilmParams grad(const FilmParams& f) const {
    return {a, (2.0 * b.array() * f.sigma.array()).matrix()};
  }
};

bool close(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::max({std::abs(got), std::abs(want), 1e-6});
}

}  // namespace

TEST_CASE("zero network yields zero film") {
  Conditioner c(small_config());
  std::fill(c.parameters().begin(), c.parameters().end(), 0.0);
  const auto f = c.condition(Vector::Ones(3));
  CHECK(f.mu.isZero(0.0));
  CHECK(f.sigma.isZero(0.0));
}

TEST_CASE("initial conditioner starts near identity and is deterministic") {
  Conditioner a(small_config()), b(small_config());
  Rng r1(5), r2(5);
  a.initialize(r1);
  b.initialize(r2);
  CHECK(a.parameters() == b.parameters());
  const auto fa = a.condition(Vector::Ones(3));
  CHECK(fa.mu == b.condition(Vector::Ones(3)).mu);
  CHECK(fa.mu == a.condition(Vector::Ones(3)).mu);
  CHECK(fa.sigma.mean() == doctest::Approx(1.0).epsilon(0.5));
}

TEST_CASE("film matches an elementwise loop") {
  Rng rng(1);
  const int c = 3, i = 2, j = 2;
  Matrix map(c, i * j);
  for (auto& x : map.reshaped()) x = std::normal_distribution<double>()(rng);
  const FilmParams film{random_vector(rng, c, -1, 1), random_vector(rng, c, -2, 2)};
  const Matrix out = apply_film(map, film);
  for (int ch = 0; ch < c; ++ch) {
    for (int p = 0; p < i * j; ++p) {
      CHECK(out(ch, p) == film.sigma[ch] * map(ch, p) + film.mu[ch]);
    }
  }
  Matrix inplace = map;
  apply_film_inplace(inplace, film);
  CHECK(inplace == out);
}

TEST_CASE("identity and zero-scale film") {
  Rng rng(2);
  Matrix map(4, 6);
  for (auto& x : map.reshaped()) x = std::normal_distribution<double>()(rng);
  CHECK(apply_film(map, FilmParams::identity(4)) == map);
  FilmParams flat = FilmParams::zeros(4);
  flat.mu << 1, 2, 3, 4;
  const Matrix out = apply_film(map, flat);
  for (int ch = 0; ch < 4; ++ch) CHECK((out.row(ch).array() == flat.mu[ch]).all());
}

TEST_CASE("film is affine per channel") {
  Rng rng(3);
  Matrix x(2, 5), y(2, 5);
  for (auto& v : x.reshaped()) v = std::normal_distribution<double>()(rng);
  for (auto& v : y.reshaped()) v = std::normal_distribution<double>()(rng);
  const FilmParams film{random_vector(rng, 2, -1, 1), random_vector(rng, 2, -1, 1)};
  const Matrix lhs = apply_film(0.3 * x + 0.7 * y, film);
  const Matrix rhs = 0.3 * apply_film(x, film) + 0.7 * apply_film(y, film);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("film rejects mismatched channels") {
  Matrix map = Matrix::Zero(3, 4);
  CHECK_THROWS_AS(apply_film(map, FilmParams::identity(2)), ShapeError);
  Conditioner c(small_config());
  CHECK_THROWS_AS(c.condition(Vector::Ones(4)), ShapeError);
}

TEST_CASE("conditioner gradients match central differences") {
  Rng rng(4);
  Conditioner c(small_config());
  c.initialize(rng);
  const Probe probe{random_vector(rng, 4, -1, 1), random_vector(rng, 4, -1, 1)};
  const Vector x = random_vector(rng, 3, 0.0, 3.0);
  const double h = 1e-3;

  Conditioner::Trace trace;
  const auto film = c.condition(x, &trace);
  std::vector<double> grad(c.parameters().size(), 0.0);
  const Vector dx = c.backward(trace, probe.grad(film), grad);

  auto& p = c.parameters();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double keep = p[k];
    p[k] = keep + h;
    const double up = probe.value(c.condition(x));
    p[k] = keep - h;
    const double down = probe.value(c.condition(x));
    p[k] = keep;
    CHECK(close(grad[k], (up - down) / (2 * h), 1e-4));
  }
  for (int k = 0; k < 3; ++k) {
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const double fd = (probe.value(c.condition(xp)) - probe.value(c.condition(xm))) / (2 * h);
    CHECK(close(dx[k], fd, 1e-4));
  }
}

TEST_CASE("invalid conditioner config") {
  auto c = small_config();
  c.hidden_dims = {5, 0};
  CHECK_THROWS_AS(Conditioner{c}, ConfigError);
  c = small_config();
  c.input_dim = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
