#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "nestevo/metrics.hpp"

using namespace nestevo;

namespace {

const std::vector<Direction> kMax2{Direction::Maximize, Direction::Maximize};

ObjectiveVector p2(double a, double b) { return ObjectiveVector({a, b}, kMax2); }
ObjectiveVector p3(double a, double b, double c) {
  return ObjectiveVector({a, b, c}, {Direction::Maximize, Direction::Maximize, Direction::Maximize});
}

// Grid-free 3-D oracle: inclusion-exclusion over all subsets of the front.
double inclusion_exclusion(const std::vector<ObjectiveVector>& pts) {
  const std::size_t n = pts.size();
  double total = 0.0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::vector<double> lo(pts[0].size(), INFINITY);
    int bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      ++bits;
      for (std::size_t d = 0; d < lo.size(); ++d) lo[d] = std::min(lo[d], pts[i].value(d));
    }
    double vol = 1.0;
    for (double v : lo) vol *= v;
    total += (bits % 2 ? 1.0 : -1.0) * vol;
  }
  return total;
}

}  // namespace

TEST_CASE("hypervolume hand cases") {
  CHECK(hypervolume(Front({p2(0.5, 0.5)}, p2(0, 0))) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(hypervolume(Front({p2(0.8, 0.2), p2(0.2, 0.8)}, p2(0, 0))) == doctest::Approx(0.28).epsilon(1e-15));
  CHECK(hypervolume(Front({}, p2(0, 0))) == 0.0);
  const ObjectiveVector r1({1.0}, {Direction::Minimize});
  CHECK(hypervolume(Front({ObjectiveVector({0.25}, {Direction::Minimize})}, r1)) == 0.75);
}

TEST_CASE("hypervolume respects minimization and reference checks") {
  const std::vector<Direction> mm{Direction::Maximize, Direction::Minimize};
  const Front f({ObjectiveVector({0.5, 0.25}, mm)}, ObjectiveVector({0.0, 1.0}, mm));
  CHECK(hypervolume(f) == doctest::Approx(0.375));
  CHECK_THROWS_AS(Front({ObjectiveVector({0.5, 2.0}, mm)}, ObjectiveVector({0.0, 1.0}, mm)), std::invalid_argument);
  CHECK_THROWS_AS(hypervolume(Front({ObjectiveVector({1, 1, 1, 1}, std::vector<Direction>(4, Direction::Maximize))},
                                    ObjectiveVector({0, 0, 0, 0}, std::vector<Direction>(4, Direction::Maximize)))),
                  std::invalid_argument);
}

TEST_CASE("exact 3-D hypervolume agrees with inclusion-exclusion") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ObjectiveVector> pts;
    const std::size_t n = 1 + rng.uniform_index(8);
    for (std::size_t i = 0; i < n; ++i) pts.push_back(p3(rng.uniform01(), rng.uniform01(), rng.uniform01()));
    const Front f(pts, p3(0, 0, 0));
    CHECK(hypervolume(f) == doctest::Approx(inclusion_exclusion(f.points())).epsilon(1e-12));
  }
}

TEST_CASE("Monte Carlo hypervolume brackets the exact value") {
  const Front f({p2(0.8, 0.2), p2(0.2, 0.8)}, p2(0, 0));
  const auto mc = hypervolume_monte_carlo(f, 200000, 1);
  CHECK(std::abs(mc.estimate - 0.28) < 4 * mc.standard_error);
  const auto again = hypervolume_monte_carlo(f, 200000, 1);
  CHECK(mc.estimate == again.estimate);
}

TEST_CASE("ratio of dominance") {
  CHECK(ratio_of_dominance(std::vector{p2(1, 1)}, std::vector{p2(0, 0)}) == 1.0);
  const std::vector<ObjectiveVector> a{p2(1, 0), p2(0, 1), p2(0.5, 0.5)};
  CHECK(ratio_of_dominance(a, a) == 0.0);
  CHECK(ratio_of_dominance(std::vector<ObjectiveVector>{}, a) == 0.0);

  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ObjectiveVector> x, y;
    for (int i = 0; i < 16; ++i) {
      x.push_back(p2(rng.uniform01(), rng.uniform01()));
      y.push_back(p2(rng.uniform01(), rng.uniform01()));
    }
    int count = 0;
    for (const auto& u : x) {
      bool any = false;
      for (const auto& v : y) {
        bool ge = true, gt = false;
        for (std::size_t d = 0; d < 2; ++d) {
          ge = ge && u.value(d) >= v.value(d);
          gt = gt || u.value(d) > v.value(d);
        }
        any = any || (ge && gt);
      }
      count += any;
    }
    CHECK(ratio_of_dominance(x, y) == doctest::Approx(count / 16.0));
  }
}

TEST_CASE("front merging") {
  const std::vector<ObjectiveVector> a{p2(1, 0), p2(0, 1)};
  CHECK(merge_nondominated(a, a) == a);
  CHECK(merge_nondominated(std::vector{p2(1, 0)}, std::vector{p2(0, 1)}) == a);
  CHECK(merge_nondominated(std::vector{p2(1, 1)}, std::vector{p2(0, 0)}) == std::vector{p2(1, 1)});
  const Front f({p2(1, 1), p2(0.5, 0.5), p2(1, 1)}, p2(0, 0));
  CHECK(f.points() == std::vector{p2(1, 1)});
}
