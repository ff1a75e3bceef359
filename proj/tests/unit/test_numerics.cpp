#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lmem/numerics.hpp"
#include "oracles.hpp"

using namespace lmem::numerics;

TEST_CASE("power_sum matches brute-force summation") {
  struct Case {
    double d, a;
    std::uint64_t count;
  };
  for (auto c : {Case{0.7, 1, 1}, Case{0.7, 1, 17}, Case{0.7, 1, 200000}, Case{1.0, 3, 100000},
                 Case{0.55, 12.5, 50000}, Case{2.5, 1, 1000}, Case{0.9, 1000, 1000000}}) {
    const auto got = power_sum(c.d, c.a, c.count);
    long double ref = 0;
    for (std::uint64_t i = c.count; i-- > 0;) ref += std::pow((long double)(c.a + double(i)), -(long double)c.d);
    CAPTURE(c.d);
    CAPTURE(c.count);
    CHECK(std::abs(got.value - double(ref)) <= 1e-13 * double(ref));
    CHECK(std::abs(got.value - double(ref)) <= got.error + 1e-13 * double(ref));
  }
}

TEST_CASE("hurwitz_zeta reproduces known zeta values") {
  CHECK(hurwitz_zeta(2.0, 1.0).value == doctest::Approx(std::numbers::pi * std::numbers::pi / 6).epsilon(1e-15));
  // zeta(3/2)
  CHECK(hurwitz_zeta(1.5, 1.0).value == doctest::Approx(2.6123753486854883).epsilon(1e-14));
  CHECK(hurwitz_zeta(1.5, 1.0).value == doctest::Approx(2.612375).epsilon(1e-6));
  // zeta(s, 1/2) = (2^s - 1) zeta(s)
  CHECK(hurwitz_zeta(3.0, 0.5).value == doctest::Approx(7 * std::riemann_zeta(3.0)).epsilon(1e-14));
  // tail from a large start equals the full value minus the head
  const double head = double(oracle::power_sum(2.2, 1, 99));
  CHECK(hurwitz_zeta(2.2, 100.0).value == doctest::Approx(std::riemann_zeta(2.2) - head).epsilon(1e-12));
}

TEST_CASE("power_integral is stable across d = 1") {
  CHECK(power_integral(1.0, 2.0, 8.0) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(power_integral(0.5, 1.0, 4.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(power_integral(1.0 + 1e-12, 2.0, 8.0) == doctest::Approx(std::log(4.0)).epsilon(1e-11));
  CHECK(power_integral(3.0, 5.0, 5.0) == 0.0);
}

TEST_CASE("adaptive Gauss-Kronrod integrates smooth and endpoint-singular functions") {
  auto sine = [](double x) { return std::sin(x); };
  auto r = integrate(sine, 0.0, std::numbers::pi, 1e-14, 1e-14);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-14));

  auto poly = [](double x) { return std::pow(x, 20); };
  auto one = detail::gk15(poly, 0.0, 1.0);
  CHECK(one.value == doctest::Approx(1.0 / 21).epsilon(1e-14));

  auto sing = [](double x) { return 1 / std::sqrt(x); };
  r = integrate(sing, 0.0, 1.0, 1e-12, 1e-12);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("rising factorial and exprel") {
  CHECK(rising(0.5, 0) == 1.0);
  CHECK(rising(0.5, 3) == doctest::Approx(0.5 * 1.5 * 2.5));
  CHECK(exprel(0.0) == 1.0);
  CHECK(exprel(1e-10) == doctest::Approx(1 + 5e-11).epsilon(1e-15));
}
