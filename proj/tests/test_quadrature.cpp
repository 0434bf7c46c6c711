#include "deconv/quadrature.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace deconv;

TEST_CASE("polynomials integrate exactly", "[quadrature]")
{
  CHECK(integrate([](double x) { return x * x; }, 0.0, 3.0) == Catch::Approx(9.0).epsilon(1e-13));
  CHECK(integrate([](double) { return 1.0; }, -2.0, 2.0) == Catch::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("oscillatory integrand is refined adaptively", "[quadrature]")
{
  // int_0^1 sin(200 x) dx = (1 - cos 200) / 200
  const double exact = (1.0 - std::cos(200.0)) / 200.0;
  CHECK(integrate([](double x) { return std::sin(200.0 * x); }, 0.0, 1.0, 1e-12) ==
        Catch::Approx(exact).margin(1e-11));
}

TEST_CASE("kinked integrand with breakpoints", "[quadrature]")
{
  auto f = [](double x) { return std::abs(x); };
  CHECK(integrate_segments(f, -1.0, 2.0, {0.0}, 1e-12) == Catch::Approx(2.5).epsilon(1e-13));
}

TEST_CASE("real-line transform integrates a gaussian to one", "[quadrature]")
{
  const double v = integrate_real_line(
    [](double x) { return std::exp(-0.5 * x * x) / 2.5066282746310005; }, 1e-11);
  CHECK(v == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("flat bump endpoint integrand", "[quadrature]")
{
  // the kernel-style bump: smooth, identically zero outside (-1, 1)
  auto bump = [](double t) {
    const double w = 1.0 - t * t;
    return w > 0 ? std::exp(-1.0 / w) : 0.0;
  };
  const double v = integrate(bump, -1.0, 1.0, 1e-13);
  CHECK(v == Catch::Approx(0.443993816168079437).epsilon(1e-10));
}
