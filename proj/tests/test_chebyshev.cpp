#include "srkcd/chebyshev.hpp"

#include <cmath>
#include <stdexcept>

#include <doctest.h>

using namespace srkcd;

TEST_CASE("cheb_t base cases and closed forms") {
  CHECK(cheb_t(0, 3.7) == 1.0);
  CHECK(cheb_t(1, 3.7) == 3.7);
  // T_2(x) = 2x^2 - 1 by hand
  CHECK(cheb_t(2, 2.0) == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(cheb_t(3, 1.0) == doctest::Approx(1.0));  // T_n(1) = 1
  CHECK_THROWS_AS(cheb_t(-1, 0.5), std::invalid_argument);
}

TEST_CASE("cheb_t_prime base cases and closed forms") {
  CHECK(cheb_t_prime(0, 2.0) == 0.0);
  CHECK(cheb_t_prime(1, 5.0) == 1.0);
  CHECK(cheb_t_prime(2, 1.0) == doctest::Approx(4.0));  // T_2'(x) = 4x
  // T_3(x) = 4x^3 - 3x, so T_3'(x) = 12x^2 - 3
  CHECK(cheb_t_prime(3, 1.0) == doctest::Approx(9.0));
  CHECK(cheb_t_prime(3, 1.5) == doctest::Approx(12.0 * 1.5 * 1.5 - 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(cheb_t_prime(-2, 0.5), std::invalid_argument);
}

TEST_CASE("monotone growth of T_n and T_n' on [1, 2]") {
  for (int gx = 0; gx <= 100; ++gx) {
    const double x = 1.0 + gx / 100.0;
    double t_prev = cheb_t(0, x);
    double d_prev = cheb_t_prime(0, x);
    for (int n = 1; n <= 50; ++n) {
      const double t = cheb_t(n, x);
      const double d = cheb_t_prime(n, x);
      REQUIRE(t >= t_prev);
      REQUIRE(t >= 1.0);
      REQUIRE(d >= d_prev);
      if (n >= 2) {
        REQUIRE(d >= 4.0);
      }
      t_prev = t;
      d_prev = d;
    }
  }
}

TEST_CASE("recurrence agrees with the hyperbolic closed form for x > 1") {
  // T_n(cosh t) = cosh(n t); independent of the production path.
  for (int gx = 1; gx <= 20; ++gx) {
    const double x = 1.0 + gx * 0.05;
    const double t = std::acosh(x);
    for (int n = 0; n <= 30; ++n) {
      const double expected = std::cosh(n * t);
      CHECK(cheb_t(n, x) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("rkc_coefficients hand values") {
  SUBCASE("single stage, no damping reduces to a plain gradient step") {
    const RkcCoefficients c = rkc_coefficients(1, 0.0);
    CHECK(c.omega0 == 1.0);
    CHECK(c.omega1 == 1.0);
    REQUIRE(c.mu_tilde.size() == 1);
    CHECK(c.mu_tilde[0] == 1.0);
    CHECK(c.nu[0] == 0.0);
  }
  SUBCASE("two stages, no damping") {
    const RkcCoefficients c = rkc_coefficients(2, 0.0);
    CHECK(c.omega0 == 1.0);
    CHECK(c.omega1 == doctest::Approx(0.25).epsilon(1e-15));
    REQUIRE(c.mu_tilde.size() == 2);
    CHECK(c.mu_tilde[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(c.mu_tilde[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c.nu[0] == 0.0);
    CHECK(c.nu[1] == doctest::Approx(-1.0).epsilon(1e-15));
  }
}

TEST_CASE("rkc_coefficients argument validation") {
  CHECK_THROWS_AS(rkc_coefficients(0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rkc_coefficients(1001, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(rkc_coefficients(5, -0.1), std::invalid_argument);
  CHECK_NOTHROW(rkc_coefficients(1000, 0.01));
}

TEST_CASE("coefficient signs over stage counts and damping values") {
  for (int s = 1; s <= 20; ++s) {
    for (double eps : {0.0, 0.01, 0.05, 0.1}) {
      const RkcCoefficients c = rkc_coefficients(s, eps);
      CHECK(c.omega1 > 0.0);
      for (int j = 1; j <= s; ++j) {
        REQUIRE(c.mu_tilde[j - 1] > 0.0);
        if (j >= 2) {
          REQUIRE(c.nu[j - 1] < 0.0);
        }
      }
    }
  }
}
