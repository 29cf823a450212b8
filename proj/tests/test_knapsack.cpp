#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include <sdca/knapsack.hpp>
#include <sdca/random.hpp>

#include "oracles.hpp"

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    worst = std::max(worst, std::fabs(a[j] - b[j]));
  }
  return worst;
}

}  // namespace

TEST_SUITE("knapsack") {
  TEST_CASE("matches the sort-and-scan oracle on random boxes") {
    sdca::Rng rng(20240817);
    double worst = 0.0;
    for (int trial = 0; trial < 1200; ++trial) {
      const int n = 1 + static_cast<int>(rng.next_below(12));
      sdca::KnapsackProblem p;
      p.b.resize(n);
      p.lo.resize(n);
      p.hi.resize(n);
      double lo_sum = 0.0, hi_sum = 0.0;
      for (int j = 0; j < n; ++j) {
        p.b[j] = rng.next_uniform(-3.0, 3.0);
        p.lo[j] = rng.next_uniform(-2.0, 0.5);
        p.hi[j] = p.lo[j] + rng.next_uniform(0.0, 2.5);
        lo_sum += p.lo[j];
        hi_sum += p.hi[j];
      }
      p.equality = trial % 2 == 0;
      p.radius = lo_sum + rng.next_unit() * (hi_sum - lo_sum);

      auto got = sdca::solve_knapsack(p);
      auto want = oracle::knapsack_sort_scan(p.b, p.lo, p.hi, p.radius,
                                            p.equality);
      worst = std::max(worst, max_abs_diff(got, want));
    }
    CHECK(worst <= 1e-8);
  }

  TEST_CASE("inequality mode keeps the clamp when the budget is slack") {
    std::vector<double> b{0.2, -0.4, 0.1};
    auto x = sdca::solve_knapsack(b, -1.0, 1.0, 10.0, false);
    for (int j = 0; j < 3; ++j) CHECK(x[j] == doctest::Approx(b[j]));
  }

  TEST_CASE("radius at the boundary of feasibility") {
    std::vector<double> b{1.0, 2.0, -1.0};
    // Everything forced to its lower bound.
    auto x = sdca::solve_knapsack(b, -0.5, 0.75, -1.5, true);
    for (int j = 0; j < 3; ++j) CHECK(x[j] == doctest::Approx(-0.5));
    // Everything forced to its upper bound.
    auto y = sdca::solve_knapsack(b, -0.5, 0.75, 2.25, true);
    for (int j = 0; j < 3; ++j) CHECK(y[j] == doctest::Approx(0.75));
  }

  TEST_CASE("degenerate zero-width boxes") {
    sdca::KnapsackProblem p;
    p.b = {0.3, -0.2, 0.9};
    p.lo = {0.5, -1.0, 0.0};
    p.hi = {0.5, 1.0, 2.0};  // first coordinate pinned
    p.radius = 1.0;
    p.equality = true;
    auto x = sdca::solve_knapsack(p);
    CHECK(x[0] == doctest::Approx(0.5));
    CHECK(x[0] + x[1] + x[2] == doctest::Approx(1.0));
    auto want = oracle::knapsack_sort_scan(p.b, p.lo, p.hi, p.radius, true);
    CHECK(max_abs_diff(x, want) <= 1e-8);
  }

  TEST_CASE("infinite upper bounds") {
    const double inf = std::numeric_limits<double>::infinity();
    sdca::Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 2 + static_cast<int>(rng.next_below(6));
      sdca::KnapsackProblem p;
      p.b.resize(n);
      p.lo.assign(n, 0.0);
      p.hi.assign(n, inf);
      for (int j = 0; j < n; ++j) p.b[j] = rng.next_uniform(-2.0, 2.0);
      p.radius = rng.next_uniform(0.1, 3.0);
      p.equality = true;
      auto got = sdca::solve_knapsack(p);
      auto want = oracle::knapsack_sort_scan(p.b, p.lo, p.hi, p.radius, true);
      CHECK(max_abs_diff(got, want) <= 1e-8);
      CHECK(std::accumulate(got.begin(), got.end(), 0.0) ==
            doctest::Approx(p.radius).epsilon(1e-10));
    }
  }

  TEST_CASE("solution sum honors the equality constraint") {
    sdca::Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 1 + static_cast<int>(rng.next_below(8));
      std::vector<double> b(n);
      for (auto& v : b) v = rng.next_gaussian() * 2.0;
      const double radius = rng.next_uniform(-0.5 * n, 0.5 * n);
      auto x = sdca::solve_knapsack(b, -1.0, 1.0, radius, true);
      CHECK(std::accumulate(x.begin(), x.end(), 0.0) ==
            doctest::Approx(radius).epsilon(1e-9));
      for (double v : x) {
        CHECK(v >= -1.0 - 1e-12);
        CHECK(v <= 1.0 + 1e-12);
      }
    }
  }
}
