#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "waa/randomized.hpp"

using namespace waa;

namespace {

DiscreteMeasure random_measure(gen::Rng& rng, std::size_t dim, std::size_t atoms, double lo, double hi) {
  std::vector<Atom> a;
  double total = 0.0;
  for (std::size_t i = 0; i < atoms; ++i) {
    // A coarse grid makes coincident atoms likely.
    std::vector<double> c(dim);
    for (double& x : c) x = lo + (hi - lo) * static_cast<double>(rng.index(5)) / 4.0;
    const double m = rng.uniform(0.05, 1.0);
    total += m;
    a.push_back({Point(std::move(c)), m});
  }
  for (Atom& x : a) x.mass /= total;
  return DiscreteMeasure(std::move(a));
}

}  // namespace

TEST_CASE("canonical form") {
  const DiscreteMeasure mu({{Point{1.0}, 0.25}, {Point{0.0}, 0.5}, {Point{1.0}, 0.25}, {Point{2.0}, 0.0}});
  REQUIRE(mu.size() == 2);
  CHECK(mu.atoms()[0] == Atom{Point{0.0}, 0.5});
  CHECK(mu.atoms()[1] == Atom{Point{1.0}, 0.5});
  CHECK(DiscreteMeasure(std::vector<Atom>(mu.atoms().begin(), mu.atoms().end())) == mu);
  CHECK_THROWS_AS(DiscreteMeasure({{Point{0.0}, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteMeasure({{Point{0.0}, 1.5}, {Point{1.0}, -0.5}}), std::invalid_argument);
  CHECK(mu.mean() == Point{0.5});
}

TEST_CASE("canonicalization is idempotent") {
  gen::Rng rng(41);
  for (int i = 0; i < 300; ++i) {
    const DiscreteMeasure mu = random_measure(rng, 1 + rng.index(2), 1 + rng.index(8), -1, 1);
    const DiscreteMeasure again(std::vector<Atom>(mu.atoms().begin(), mu.atoms().end()));
    CHECK(again == mu);
    for (std::size_t k = 1; k < mu.size(); ++k) CHECK(mu.atoms()[k - 1].point < mu.atoms()[k].point);
    CHECK(std::abs(mu.total_mass() - 1.0) <= 1e-12);
  }
}

TEST_CASE("expected_loss examples") {
  const LossFunction sq = LossFunction::squared_norm(1), ab = LossFunction::absolute_norm(1);
  CHECK(expected_loss(sq, DiscreteMeasure::point_mass(Point{0.5}), Point{0.0}) == 0.25);
  CHECK(expected_loss(sq, DiscreteMeasure({{Point{0.0}, 0.5}, {Point{1.0}, 0.5}}), Point{0.0}) == 0.5);
  CHECK(expected_loss(ab, DiscreteMeasure({{Point{0.0}, 0.25}, {Point{2.0}, 0.75}}), Point{1.0}) == 1.0);
}

TEST_CASE("mixture_measure examples") {
  const DiscreteMeasure d0 = DiscreteMeasure::point_mass(Point{0.0});
  const DiscreteMeasure d1 = DiscreteMeasure::point_mass(Point{1.0});
  const DiscreteMeasure half({{Point{0.0}, 0.5}, {Point{1.0}, 0.5}});
  const std::vector<double> one{1.0}, w{0.5, 0.5};
  CHECK(mixture_measure(one, std::vector<DiscreteMeasure>{half}) == half);
  CHECK(mixture_measure(w, std::vector<DiscreteMeasure>{d0, d1}) == half);
  CHECK(mixture_measure(w, std::vector<DiscreteMeasure>{half, d1}) ==
        DiscreteMeasure({{Point{0.0}, 0.25}, {Point{1.0}, 0.75}}));
  CHECK_THROWS_AS(mixture_measure(one, std::vector<DiscreteMeasure>{d0, d1}), std::invalid_argument);
}

TEST_CASE("expected loss is linear in the mixture") {
  gen::Rng rng(42);
  for (int i = 0; i < 300; ++i) {
    const std::size_t d = 1 + rng.index(2);
    const LossFunction loss = LossFunction::builtin(i % 2 ? LossKind::squared_norm : LossKind::absolute_norm, d);
    const std::size_t K = 1 + rng.index(6);
    std::vector<DiscreteMeasure> ms;
    std::vector<double> w(K);
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      ms.push_back(random_measure(rng, d, 1 + rng.index(4), -1, 1));
      w[k] = rng.uniform(0.01, 1);
      total += w[k];
    }
    for (double& v : w) v /= total;
    const Point y = rng.point(d, -1, 1);
    double direct = 0.0;
    for (std::size_t k = 0; k < K; ++k) direct += w[k] * expected_loss(loss, ms[k], y);
    CHECK(std::abs(expected_loss(loss, mixture_measure(w, ms), y) - direct) <= 1e-12);
  }
}

TEST_CASE("continuity probe: total variation bounds the expected-loss gap") {
  gen::Rng rng(43);
  const LossFunction loss = LossFunction::squared_norm(1);
  const double L = 1.0;  // support and observations inside [0, 1]
  for (int i = 0; i < 300; ++i) {
    const DiscreteMeasure a = random_measure(rng, 1, 1 + rng.index(5), 0, 1);
    const DiscreteMeasure b = random_measure(rng, 1, 1 + rng.index(5), 0, 1);
    const Point y = rng.point(1, 0, 1);
    const double delta = total_variation(a, b);
    CHECK(std::abs(expected_loss(loss, a, y) - expected_loss(loss, b, y)) <= 2.0 * L * delta + 1e-12);
  }
  CHECK(total_variation(DiscreteMeasure::point_mass(Point{0.0}), DiscreteMeasure::point_mass(Point{1.0})) == 1.0);
}

TEST_CASE("sampling") {
  const DiscreteMeasure pm = DiscreteMeasure::point_mass(Point{0.25});
  for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(sample(pm, CounterRng(seed)).first == Point{0.25});

  const DiscreteMeasure half({{Point{0.0}, 0.5}, {Point{1.0}, 0.5}});
  CounterRng rng(2024);
  std::size_t first = 0;
  const std::size_t draws = 100000;
  std::vector<Point> seq;
  for (std::size_t i = 0; i < draws; ++i) {
    auto [p, next] = sample(half, rng);
    rng = next;
    if (p == Point{0.0}) ++first;
    if (i < 100) seq.push_back(p);
  }
  const double freq = static_cast<double>(first) / static_cast<double>(draws);
  CHECK(std::abs(freq - 0.5) <= 0.01);

  CounterRng again(2024);
  for (std::size_t i = 0; i < 100; ++i) {
    auto [p, next] = sample(half, again);
    again = next;
    CHECK(p == seq[i]);
  }
}

TEST_CASE("sampling is unbiased for the expected loss") {
  const LossFunction loss = LossFunction::squared_norm(1);
  const DiscreteMeasure mu({{Point{0.0}, 0.2}, {Point{0.3}, 0.3}, {Point{0.9}, 0.5}});
  const Point y{0.6};
  CounterRng rng(7);
  double total = 0.0;
  const std::size_t draws = 100000;
  for (std::size_t i = 0; i < draws; ++i) {
    auto [p, next] = sample(mu, rng);
    rng = next;
    total += loss_eval(loss, p, y);
  }
  const double L = 1.0;
  CHECK(std::abs(total / draws - expected_loss(loss, mu, y)) <= 4.0 * L / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("counter generator: determinism, splitting, std distributions") {
  CounterRng a(5), b(5);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  CHECK(a == b);
  CHECK_FALSE(CounterRng(5).split(1) == CounterRng(5).split(2));
  CounterRng s1 = CounterRng(5).split(1), s2 = CounterRng(5).split(2);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) equal += s1() == s2();
  CHECK(equal == 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  CounterRng g(9);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) sum += normal(g);
  CHECK(std::abs(sum / 20000) < 0.05);
  CounterRng u(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("lil_statistic examples") {
  CHECK(lil_statistic(LilMonitor::from_state(0.0, 16, 1.0)) == 0.0);
  CHECK(lil_statistic(LilMonitor::from_state(0.0, 1000, 3.0)) == 0.0);
  const double unit = std::sqrt(2.0 * 16.0 * std::log(std::log(16.0)));
  CHECK(lil_statistic(LilMonitor::from_state(unit, 16, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lil_statistic(LilMonitor::from_state(-unit, 16, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(lil_statistic(LilMonitor::from_state(1.0, 15, 1.0)), std::domain_error);

  LilMonitor m(1.0);
  for (int i = 0; i < 10; ++i) m.add(0.5, 0.25);
  CHECK(m.rounds() == 10);
  CHECK(m.partial_sum() == 2.5);
  CHECK_THROWS_AS(lil_statistic(m), std::domain_error);
  CHECK_THROWS_AS(m.add(3.0, 0.5), std::domain_error);
}

TEST_CASE("randomized strategy splits around the base prediction") {
  const SpaceDims dims{0, 1, 1};
  const RandomizedStrategy d{constant_strategy(Point{0.5}, dims), 0.25};
  CHECK(randomized_predict(d, History::start(Point())) ==
        DiscreteMeasure({{Point{0.25}, 0.5}, {Point{0.75}, 0.5}}));
  const RandomizedStrategy pure{constant_strategy(Point{0.5}, dims), 0.0};
  CHECK(randomized_predict(pure, History::start(Point())) == DiscreteMeasure::point_mass(Point{0.5}));
}
