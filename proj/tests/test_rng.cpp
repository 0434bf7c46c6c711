#include "deconv/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace deconv;

TEST_CASE("derived seeds are stable and purpose-separated", "[rng]")
{
  CHECK(derive_seed(42, "x", 0) == derive_seed(42, "x", 0));
  CHECK(derive_seed(42, "x", 0) != derive_seed(42, "x", 1));
  CHECK(derive_seed(42, "x", 0) != derive_seed(42, "eps", 0));
  CHECK(derive_seed(42, "x", 0) != derive_seed(43, "x", 0));
}

TEST_CASE("splitting does not perturb the parent stream", "[rng]")
{
  Rng a(7);
  Rng b(7);
  (void)a.split("anything", 3);
  for (int i = 0; i < 16; ++i)
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform01 lies in [0,1) and has the right mean", "[rng]")
{
  Rng rng(123);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 * 0.2887 / std::sqrt(n));
}

TEST_CASE("normal moments", "[rng]")
{
  Rng rng(99);
  const int n = 100000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
  }
  CHECK(std::abs(s1 / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0) / std::sqrt(n));
}

TEST_CASE("cauchy median and quartiles", "[rng]")
{
  Rng rng(5);
  const int n = 100000;
  int below_m1 = 0, below_0 = 0, below_p1 = 0;
  for (int i = 0; i < n; ++i) {
    const double c = rng.cauchy();
    below_m1 += c < -1;
    below_0 += c < 0;
    below_p1 += c < 1;
  }
  // quartiles of the standard Cauchy sit at -1, 0, 1
  CHECK(std::abs(below_m1 / double(n) - 0.25) < 0.006);
  CHECK(std::abs(below_0 / double(n) - 0.5) < 0.007);
  CHECK(std::abs(below_p1 / double(n) - 0.75) < 0.006);
}
