#include "deconv/error_models.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numeric>

using namespace deconv;

namespace {

//! independent oracle: count weak compositions of j into m parts by recursion
long weak_compositions(int j, int m)
{
  if (m == 0)
    return j == 0 ? 1 : 0;
  if (m == 1)
    return 1;
  long count = 0;
  for (int first = 0; first <= j; ++first)
    count += weak_compositions(j - first, m - 1);
  return count;
}

} // namespace

TEST_CASE("char_fn of the uniform convolution", "[error_models]")
{
  const auto model = ErrorModel::uniform(2, 1.0);
  CHECK(std::abs(char_fn(model, 0.0) - 1.0) < 1e-15);
  CHECK(std::abs(char_fn(model, {0.0, 3.141592653589793238})) < 1e-12);
  // removable singularity handled by the series branch
  CHECK(std::abs(char_fn(model, {0.0, 1e-6}) - 1.0) < 1e-11);
  // against the direct formula at a generic complex point
  const std::complex<double> z{0.3, 0.7};
  const auto direct = std::pow(std::sinh(z) / z, 2);
  CHECK(std::abs(char_fn(model, z) - direct) < 1e-13);
}

TEST_CASE("char_fn of the binomial law", "[error_models]")
{
  const auto model = ErrorModel::binomial(3);
  CHECK(std::abs(char_fn(model, 0.0) - 1.0) < 1e-15);
  CHECK(std::abs(char_fn(model, {0.0, 3.141592653589793238})) < 1e-12);
  const std::complex<double> z{-0.2, 0.4};
  const auto direct = std::pow(0.5 * (1.0 + std::exp(z)), 3);
  CHECK(std::abs(char_fn(model, z) - direct) < 1e-14);
}

TEST_CASE("char_fn rejects non-finite arguments", "[error_models]")
{
  const auto model = ErrorModel::uniform(1, 1.0);
  CHECK_THROWS_AS(char_fn(model, {std::nan(""), 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(char_fn(model, {0.0, std::numeric_limits<double>::infinity()}),
                  std::invalid_argument);
}

TEST_CASE("characteristic function is bounded by one on the imaginary axis", "[error_models]")
{
  for (const auto& model : {ErrorModel::uniform(1, 0.7), ErrorModel::uniform(3, 1.3),
                            ErrorModel::binomial(2), ErrorModel::binomial(5)}) {
    for (double w = -20.0; w <= 20.0; w += 0.37)
      CHECK(std::abs(char_fn(model, {0.0, w})) <= 1.0 + 1e-12);
    CHECK(std::abs(char_fn(model, 0.0) - 1.0) < 1e-15);
  }
}

TEST_CASE("composition coefficients match brute-force enumeration", "[error_models]")
{
  CHECK(composition_coeff(0, 5) == 1.0);
  CHECK(composition_coeff(3, 2) == 4.0);
  CHECK(composition_coeff(5, 3) == 21.0);
  for (int m = 1; m <= 6; ++m)
    for (int j = 0; j <= 12; ++j)
      CHECK(composition_coeff(j, m) == static_cast<double>(weak_compositions(j, m)));
}

TEST_CASE("composition coefficients satisfy the Pascal recurrence", "[error_models]")
{
  // C_{j,m} = C_{j-1,m} + C_{j,m-1} with C_{j,0} = delta_{j,0}
  auto c = [](int j, int m) { return m == 0 ? (j == 0 ? 1.0 : 0.0) : composition_coeff(j, m); };
  for (int m = 1; m <= 6; ++m)
    for (int j = 1; j <= 12; ++j)
      CHECK(c(j, m) == c(j - 1, m) + c(j, m - 1));
}

TEST_CASE("composition coefficient log-gamma branch agrees at the crossover", "[error_models]")
{
  // j + m - 1 = 60 is exact, 61 switches to log-gamma
  const double exact = composition_coeff(55, 6);    // n = 60
  const double lg = composition_coeff(56, 6);       // n = 61
  CHECK(exact == Catch::Approx(std::exp(std::lgamma(61.0) - std::lgamma(6.0) - std::lgamma(56.0)))
                   .epsilon(1e-12));
  CHECK(lg == Catch::Approx(std::exp(std::lgamma(62.0) - std::lgamma(6.0) - std::lgamma(57.0)))
                .epsilon(1e-12));
}

TEST_CASE("uniform sampler stays in its support and is centred", "[error_models]")
{
  const auto one = sample_errors(ErrorModel::uniform(1, 1.0), 20000, 7);
  for (double v : one)
    REQUIRE(std::abs(v) <= 1.0);

  const auto model = ErrorModel::uniform(3, 0.5);
  const auto xs = sample_errors(model, 100000, 11);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double var = 0;
  for (double v : xs)
    var += (v - mean) * (v - mean);
  var /= xs.size() - 1;
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(var / xs.size()));
}

TEST_CASE("binomial sampler has mean m/2", "[error_models]")
{
  const auto xs = sample_errors(ErrorModel::binomial(4), 100000, 3);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  CHECK(std::abs(mean - 2.0) < 0.02);
}

TEST_CASE("sampling is deterministic given the seed and n = 0 is fine", "[error_models]")
{
  const auto model = ErrorModel::uniform(2, 1.0);
  CHECK(sample_errors(model, 100, 5) == sample_errors(model, 100, 5));
  CHECK(sample_errors(model, 0, 5).empty());
}

TEST_CASE("empirical characteristic function matches char_fn", "[error_models]")
{
  const std::size_t n = 100000;
  for (const auto& model : {ErrorModel::uniform(2, 1.0), ErrorModel::binomial(3)}) {
    const auto xs = sample_errors(model, n, 17);
    for (double w : {0.5, 1.0, 2.0}) {
      std::complex<double> ecf = 0;
      for (double x : xs)
        ecf += std::exp(std::complex<double>(0.0, w * x));
      ecf /= static_cast<double>(n);
      CHECK(std::abs(ecf - char_fn(model, {0.0, w})) < 5.0 / std::sqrt(n));
    }
  }
}

TEST_CASE("imaginary zeros annihilate the characteristic function", "[error_models]")
{
  const auto uz = imaginary_zeros(ErrorModel::uniform(2, 1.0), 2);
  CHECK(uz[0] == Catch::Approx(3.141592653589793238));
  CHECK(uz[1] == Catch::Approx(6.283185307179586477));
  const auto bz = imaginary_zeros(ErrorModel::binomial(1), 1);
  CHECK(bz[0] == Catch::Approx(3.141592653589793238));

  for (const auto& model : {ErrorModel::uniform(1, 0.4), ErrorModel::uniform(4, 2.0),
                            ErrorModel::binomial(2)}) {
    for (double w : imaginary_zeros(model, 5))
      CHECK(std::abs(char_fn(model, {0.0, w})) < 1e-12);
  }
}

TEST_CASE("irwin-hall density integrates to one and matches the m = 1 box", "[error_models]")
{
  const auto box = ErrorModel::uniform(1, 0.7);
  CHECK(uniform_conv_density(box, 0.0) == Catch::Approx(1.0 / 1.4));
  CHECK(uniform_conv_density(box, 0.71) == 0.0);

  for (int m : {2, 3, 5}) {
    const auto model = ErrorModel::uniform(m, 0.8);
    double mass = 0;
    const double reach = m * 0.8;
    const int steps = 4000;
    double prev = uniform_conv_density(model, -reach);
    for (int i = 1; i <= steps; ++i) {
      const double e = -reach + 2.0 * reach * i / steps;
      const double cur = uniform_conv_density(model, e);
      mass += 0.5 * (prev + cur) * (2.0 * reach / steps);
      prev = cur;
    }
    CHECK(mass == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("error model text specs parse exactly", "[error_models]")
{
  const auto u = parse_error_model("uniform:m=2,theta=0.5");
  CHECK(u.family == ErrorFamily::uniform_conv);
  CHECK(u.multiplicity == 2);
  CHECK(u.half_width == 0.5);
  const auto b = parse_error_model("binomial:m=3");
  CHECK(b.family == ErrorFamily::binomial);
  CHECK(b.multiplicity == 3);

  for (const char* bad : {"uniform:m=2", "uniform:theta=1", "binomial:m=2,theta=1", "gauss:m=1",
                          "uniform:m=2,theta=1,junk=0", "uniform:m=x,theta=1", "binomial:m=",
                          "uniform:m=1,theta=1extra", "binomial:m=0", "uniform:m=1,theta=-2"}) {
    CHECK_THROWS_AS(parse_error_model(bad), std::invalid_argument);
  }
}
