#include <boost/math/special_functions/erf.hpp>
#include <cmath>

#include "doctest.h"
#include "swarmgoal/rng.hpp"
#include "swarmgoal/special.hpp"

using swarmgoal::erf_inv;

TEST_CASE("erf_inv edge values") {
  CHECK(erf_inv(0.0) == 0.0);
  CHECK(std::isinf(erf_inv(1.0)));
  CHECK(erf_inv(1.0) > 0.0);
  CHECK(erf_inv(-1.0) < 0.0);
  CHECK(std::isnan(erf_inv(1.5)));
  CHECK(std::isnan(erf_inv(NAN)));
  CHECK(erf_inv(0.5) == doctest::Approx(0.4769362762044699).epsilon(1e-14));
}

TEST_CASE("erf_inv agrees with Boost.Math to 1e-10") {
  swarmgoal::Rng rng(5);
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const double ref = boost::math::erf_inv(x);
    worst = std::max(worst, std::abs(erf_inv(x) - ref));
  }
  for (double t = 1e-1; t > 1e-300; t *= 1e-3) {
    const double x = 1.0 - t;
    if (x == 1.0) break;
    worst = std::max(worst, std::abs(erf_inv(x) - boost::math::erf_inv(x)));
    worst = std::max(worst, std::abs(erf_inv(-x) - boost::math::erf_inv(-x)));
  }
  for (double x = 1e-300; x < 1e-2; x *= 1e3)
    worst = std::max(worst, std::abs(erf_inv(x) - boost::math::erf_inv(x)));
  CHECK(worst < 1e-10);
}

TEST_SUITE("properties") {
  TEST_CASE("erf_inv inverts erf and is odd") {
    for (double y = -3.0; y <= 3.0; y += 0.005) {
      const double x = std::erf(y);
      if (std::abs(x) == 1.0) continue;
      REQUIRE(std::abs(erf_inv(x) - y) < 1e-10 * std::max(1.0, std::abs(y)) + 1e-12);
      REQUIRE(erf_inv(-x) == -erf_inv(x));
    }
  }
}
