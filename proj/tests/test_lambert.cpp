#include <cmath>
#include <doctest.h>

#include <sdca/lambert.hpp>

// V(t) solves x + ln x = t (the Lambert W of e^t); all checks are against
// that defining identity, evaluated in long double.

namespace {

long double residual(double t) {
  const long double v = sdca::lambert_v(t);
  return v + std::log(v) - static_cast<long double>(t);
}

}  // namespace

TEST_SUITE("lambert") {
  TEST_CASE("defining identity on a dense grid") {
    double worst = 0.0;
    for (int i = 0; i <= 100000; ++i) {
      const double t = -700.0 + 1400.0 * i / 100000.0;
      const double r = static_cast<double>(residual(t));
      worst = std::max(worst, std::fabs(r) / std::max(1.0, std::fabs(t)));
    }
    CHECK(worst <= 1e-12);
  }

  TEST_CASE("special values") {
    CHECK(sdca::lambert_v(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    // Omega constant: x + ln x = 0.
    CHECK(sdca::lambert_v(0.0) ==
          doctest::Approx(0.5671432904097838).epsilon(1e-14));
  }

  TEST_CASE("monotone increasing") {
    double prev = sdca::lambert_v(-700.0);
    for (int i = 1; i <= 2000; ++i) {
      const double t = -700.0 + 1400.0 * i / 2000.0;
      const double v = sdca::lambert_v(t);
      CHECK(v > prev);
      prev = v;
    }
  }

  TEST_CASE("extreme tails stay finite and positive") {
    for (double t : {-745.0, -700.0, 700.0, 745.0}) {
      const double v = sdca::lambert_v(t);
      CHECK(std::isfinite(v));
      CHECK(v > 0.0);
    }
    // Deep negative: V(t) ~ e^t underflows gracefully to 0.
    CHECK(sdca::lambert_v(-800.0) >= 0.0);
  }

  TEST_CASE("derivative matches finite differences") {
    for (double t : {-20.0, -1.0, 0.0, 0.5, 3.0, 40.0}) {
      const double h = 1e-6 * std::max(1.0, std::fabs(t));
      const double fd =
          (sdca::lambert_v(t + h) - sdca::lambert_v(t - h)) / (2 * h);
      CHECK(sdca::lambert_v_prime(t) == doctest::Approx(fd).epsilon(1e-8));
    }
  }

  TEST_CASE("inverse round trip") {
    for (double v : {1e-8, 1e-3, 0.5, 1.0, 7.0, 300.0}) {
      const double t = sdca::lambert_v_inverse(v);
      CHECK(sdca::lambert_v(t) == doctest::Approx(v).epsilon(1e-12));
    }
  }
}
