#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "doctest.h"
#include "support.hpp"
#include "waa/experts.hpp"

using namespace waa;

namespace {

using Key = std::tuple<int, std::size_t, std::vector<double>>;

Key key_of(const StationaryStrategy& d) { return {static_cast<int>(d.family), d.memory_depth, d.params}; }

History history_of(const std::vector<double>& ys, double signal = 0.0, std::size_t signal_dim = 0) {
  auto x = [&] { return Point(std::vector<double>(signal_dim, signal)); };
  History h = History::start(x());
  for (double y : ys) h = history_extend(h, Point{y}, x());
  return h;
}

}  // namespace

TEST_CASE("strategy_predict examples") {
  const SpaceDims d1{0, 1, 1};
  const History any = history_of({0.9, 0.1});
  CHECK(strategy_predict(constant_strategy(Point{0.7}, d1), any) == Point{0.7});

  const StationaryStrategy last = linear_strategy(1, {0.0, 1.0}, d1);
  CHECK(strategy_predict(last, history_of({0.8, 0.3})) == Point{0.3});

  const StationaryStrategy ar = linear_strategy(1, {0.1, 0.5}, d1);
  CHECK(strategy_predict(ar, history_of({0.4})) == Point{0.1 + 0.5 * 0.4});
  CHECK(strategy_predict(ar, history_of({0.4}))[0] == doctest::Approx(0.3).epsilon(1e-15));

  // Prepast observations read as zero.
  CHECK(strategy_predict(ar, history_of({})) == Point{0.1});
}

TEST_CASE("linear strategy with signal and vector outputs") {
  const SpaceDims dims{1, 2, 2};
  // rows: [bias, y1_0, y1_1, x]
  const StationaryStrategy d = linear_strategy(1, {1.0, 2.0, 0.0, 3.0, -1.0, 0.0, 1.0, 0.5}, dims);
  History h = History::start(Point{0.0});
  h = history_extend(h, Point{0.5, 0.25}, Point{2.0});
  CHECK(strategy_predict(d, h) == Point{1.0 + 2.0 * 0.5 + 3.0 * 2.0, -1.0 + 0.25 + 0.5 * 2.0});
  CHECK_THROWS_AS(linear_strategy(1, {1.0}, dims), std::invalid_argument);
}

TEST_CASE("nearest centroid picks the closest anchor, ties to the lowest record") {
  const SpaceDims dims{1, 1, 1};
  const StationaryStrategy d = centroid_strategy({-1.0, 0.2, 1.0, 0.8}, dims);
  CHECK(strategy_predict(d, History::start(Point{-0.3})) == Point{0.2});
  CHECK(strategy_predict(d, History::start(Point{0.7})) == Point{0.8});
  CHECK(strategy_predict(d, History::start(Point{0.0})) == Point{0.2});
}

TEST_CASE("stationarity: predictions depend only on the last m rounds and the signal") {
  gen::Rng rng(21);
  const SpaceDims dims{1, 1, 1};
  for (int t = 0; t < 300; ++t) {
    const std::size_t m = rng.index(4);
    std::vector<double> params(parameter_count(StrategyFamily::linear_memory, m, dims, 0));
    for (double& p : params) p = rng.uniform(-2, 2);
    const StationaryStrategy d = linear_strategy(m, params, dims);

    // Two transcripts with different prefixes and a shared suffix of m rounds.
    History a = History::start(rng.point(1, -1, 1));
    History b = History::start(rng.point(1, -1, 1));
    for (std::size_t i = 0, n = rng.index(5); i < n; ++i) a = history_extend(a, rng.point(1, -1, 1), rng.point(1, -1, 1));
    for (std::size_t i = 0, n = rng.index(5); i < n; ++i) b = history_extend(b, rng.point(1, -1, 1), rng.point(1, -1, 1));
    // The shared suffix also fixes the current signal.
    for (std::size_t i = 0; i < std::max<std::size_t>(m, 1); ++i) {
      const Point y = rng.point(1, -1, 1), x = rng.point(1, -1, 1);
      a = history_extend(a, y, x);
      b = history_extend(b, y, x);
    }
    CHECK(strategy_predict(d, a) == strategy_predict(d, b));
  }
}

TEST_CASE("enumeration: index 1 is the constant at the grid origin") {
  EnumConfig config;
  const StationaryStrategy first = enumerate_strategy(1, config);
  CHECK(first.family == StrategyFamily::constant);
  CHECK(first.params == std::vector<double>{config.output.origin});
  CHECK_THROWS_AS(enumerate_strategy(0, config), std::invalid_argument);
}

TEST_CASE("enumeration: first 100 indices are pairwise distinct and reproducible") {
  EnumConfig config;
  std::set<Key> seen;
  for (std::uint64_t i = 1; i <= 100; ++i) {
    const StationaryStrategy d = enumerate_strategy(i, config);
    CHECK(seen.insert(key_of(d)).second);
    CHECK(enumerate_strategy(i, config) == d);
  }
}

TEST_CASE("enumeration: surjective onto level <= 2 grids for m <= 1") {
  EnumConfig config;
  config.dims = {0, 1, 1};
  config.nearest_centroid = false;
  config.min_memory = 0;
  config.max_memory = 1;
  config.max_level = 6;
  config.output = {0.5, 0.5};
  config.coefficient = {0.0, 1.0};

  // Level-2 linear strategies of depth 1 sit in shell 3.
  const std::uint64_t end = shell_end_index(config, 3);
  std::set<Key> seen;
  for (std::uint64_t i = 1; i < end; ++i) seen.insert(key_of(enumerate_strategy(i, config)));
  CHECK(seen.size() == end - 1);

  std::vector<double> out_grid, coef_grid;
  for (int i = -4; i <= 4; ++i) {
    out_grid.push_back(0.5 + 0.5 * i / 4.0);
    coef_grid.push_back(1.0 * i / 4.0);
  }
  std::size_t missing = 0;
  for (double c : out_grid) {
    if (!seen.count(Key{static_cast<int>(StrategyFamily::constant), 0, {c}})) ++missing;
    if (!seen.count(Key{static_cast<int>(StrategyFamily::linear_memory), 0, {c}})) ++missing;
    for (double a : coef_grid)
      if (!seen.count(Key{static_cast<int>(StrategyFamily::linear_memory), 1, {c, a}})) ++missing;
  }
  CHECK(missing == 0);
  // Oracle count: shells 0..3 hold constant levels 0..3 (9^1 grid at level 3 is 17 values),
  // depth-0 linear levels 0..3 and depth-1 linear levels 0..2.
  CHECK(end - 1 == 17 + 17 + 81);
}

TEST_CASE("enumeration: past the configured levels is out of range") {
  EnumConfig config;
  config.dims = {0, 1, 1};
  config.linear_memory = false;
  config.nearest_centroid = false;
  config.max_level = 1;
  CHECK(enumerate_strategy(5, config).params == std::vector<double>{0.75});
  CHECK_THROWS_AS(enumerate_strategy(6, config), std::out_of_range);
}

TEST_CASE("priors") {
  const auto g = geometric_priors(3);
  CHECK(g[0] == doctest::Approx(4.0 / 7.0));
  CHECK(g[1] == doctest::Approx(2.0 / 7.0));
  CHECK(g[2] == doctest::Approx(1.0 / 7.0));
  CHECK_NOTHROW(validate_priors(g));
  CHECK_NOTHROW(validate_priors(uniform_priors(7)));
  CHECK_THROWS_AS(validate_priors(std::vector<double>{0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(validate_priors(std::vector<double>{1.0, 0.0}), std::invalid_argument);
  const ExpertPool pool = enumerate_pool(EnumConfig{}, 8);
  CHECK(pool.size() == 8);
  CHECK(pool.priors[0] == doctest::Approx(128.0 / 255.0));
}

TEST_CASE("replay_cumulative_loss examples") {
  const LossFunction loss = LossFunction::squared_norm(1);
  const SpaceDims dims{0, 1, 1};
  const StationaryStrategy zero = constant_strategy(Point{0.0}, dims);
  CHECK(replay_cumulative_loss(zero, Transcript{}, loss) == 0.0);
  Transcript t;
  History h = History::start(Point());
  t.push_back({h, Point{1.0}});
  h = history_extend(h, Point{1.0}, Point());
  t.push_back({h, Point{1.0}});
  CHECK(replay_cumulative_loss(zero, t, loss) == 2.0);
}

TEST_CASE("replay_cumulative_loss is additive over concatenation") {
  gen::Rng rng(22);
  const LossFunction loss = LossFunction::squared_norm(1);
  const SpaceDims dims{0, 1, 1};
  const StationaryStrategy d = linear_strategy(1, {0.125, 0.5}, dims);
  for (int trial = 0; trial < 50; ++trial) {
    Transcript t;
    History h = History::start(Point());
    const std::size_t n = 2 + rng.index(40);
    for (std::size_t i = 0; i < n; ++i) {
      // Dyadic observations keep every partial sum exact.
      const Point y{static_cast<double>(rng.index(64)) / 64.0};
      t.push_back({h, y});
      h = history_extend(h, y, Point());
    }
    const std::size_t cut = rng.index(n + 1);
    const std::span<const TranscriptEntry> all(t);
    const double whole = replay_cumulative_loss(d, all, loss);
    const double parts = replay_cumulative_loss(d, all.subspan(0, cut), loss) + replay_cumulative_loss(d, all.subspan(cut), loss);
    CHECK(whole == parts);
  }
}
