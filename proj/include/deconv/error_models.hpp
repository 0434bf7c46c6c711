#pragma once

#include "deconv/rng.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace deconv {

enum class ErrorFamily
{
  uniform_conv, //!< m-fold convolution of U(-theta, theta)
  binomial      //!< Bin(m, 1/2)
};

//! Measurement-error law whose characteristic function vanishes on the
//! imaginary axis with multiplicity m at every zero.
struct ErrorModel
{
  ErrorFamily family = ErrorFamily::uniform_conv;
  int multiplicity = 1;    //!< fold count / trial count m >= 1
  double half_width = 1.0; //!< theta > 0, uniform_conv only

  static ErrorModel uniform(int m, double theta)
  {
    if (m < 1)
      throw std::invalid_argument("uniform error model: m must be >= 1");
    if (!(theta > 0))
      throw std::invalid_argument("uniform error model: theta must be > 0");
    return {ErrorFamily::uniform_conv, m, theta};
  }

  static ErrorModel binomial(int m)
  {
    if (m < 1)
      throw std::invalid_argument("binomial error model: m must be >= 1");
    return {ErrorFamily::binomial, m, 0.0};
  }
};

namespace detail {

inline std::complex<double> sinhc(std::complex<double> w)
{
  // series for small |w| avoids the 0/0 cancellation at the removable
  // singularity
  if (std::abs(w) < 1e-4) {
    auto w2 = w * w;
    return 1.0 + w2 / 6.0 + w2 * w2 / 120.0;
  }
  return std::sinh(w) / w;
}

inline std::complex<double> ipow(std::complex<double> base, int e)
{
  std::complex<double> r = 1.0;
  for (int i = 0; i < e; ++i)
    r *= base;
  return r;
}

} // namespace detail

//! Bilateral Laplace transform of the error law evaluated at z; at purely
//! imaginary z = i*omega this is the characteristic function.
inline std::complex<double> char_fn(const ErrorModel& model, std::complex<double> z)
{
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw std::invalid_argument("char_fn: non-finite argument");
  const int m = model.multiplicity;
  if (model.family == ErrorFamily::uniform_conv)
    return detail::ipow(detail::sinhc(model.half_width * z), m);
  return detail::ipow(0.5 * (1.0 + std::exp(z)), m);
}

//! C_{j,m} = binom(j + m - 1, m - 1), the number of weak compositions of j
//! into m parts. Exact in integer arithmetic while j + m - 1 <= 60, log-gamma
//! beyond that.
inline double composition_coeff(int j, int m)
{
  if (j < 0 || m < 1)
    throw std::invalid_argument("composition_coeff: need j >= 0, m >= 1");
  const int n = j + m - 1;
  const int k = std::min(m - 1, j);
  if (k == 0)
    return 1.0;
  if (n <= 60) {
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
      r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return static_cast<double>(r);
  }
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

//! i.i.d. draws from the error law; deterministic given the seed.
inline std::vector<double> sample_errors(const ErrorModel& model, std::size_t n, std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<double> out(n);
  const int m = model.multiplicity;
  if (model.family == ErrorFamily::uniform_conv) {
    const double theta = model.half_width;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (int c = 0; c < m; ++c)
        s += rng.uniform(-theta, theta);
      out[i] = s;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      int s = 0;
      for (int c = 0; c < m; ++c)
        s += rng.coin() ? 1 : 0;
      out[i] = static_cast<double>(s);
    }
  }
  return out;
}

//! First k positive frequencies where the characteristic function vanishes:
//! pi j / theta for the uniform convolution, (2j - 1) pi for the binomial.
inline std::vector<double> imaginary_zeros(const ErrorModel& model, int count)
{
  if (count < 1)
    throw std::invalid_argument("imaginary_zeros: count must be >= 1");
  std::vector<double> out(count);
  const double pi = 3.141592653589793238;
  for (int j = 1; j <= count; ++j)
    out[j - 1] = model.family == ErrorFamily::uniform_conv ? pi * j / model.half_width
                                                           : (2.0 * j - 1.0) * pi;
  return out;
}

//! Lebesgue density of the m-fold uniform convolution law at e, via the
//! piecewise-polynomial Irwin-Hall formula. Binomial models are discrete and
//! rejected here.
inline double uniform_conv_density(const ErrorModel& model, double e)
{
  if (model.family != ErrorFamily::uniform_conv)
    throw std::invalid_argument("uniform_conv_density: model has no Lebesgue density");
  const int m = model.multiplicity;
  const double theta = model.half_width;
  const double u = (e + m * theta) / (2.0 * theta);
  if (u <= 0.0 || u >= m)
    return 0.0;
  double sum = 0;
  double binom = 1; // binom(m, k)
  for (int k = 0; k <= static_cast<int>(u); ++k) {
    if (k > 0)
      binom = binom * (m - k + 1) / k;
    const double sign = (k & 1) ? -1.0 : 1.0;
    sum += sign * binom * std::pow(u - k, m - 1);
  }
  double factorial = 1;
  for (int i = 2; i < m; ++i)
    factorial *= i;
  return sum / (factorial * 2.0 * theta);
}

//! Knots of the Irwin-Hall density: -m theta + 2 theta i, i = 0..m.
inline std::vector<double> uniform_conv_knots(const ErrorModel& model)
{
  std::vector<double> knots;
  for (int i = 0; i <= model.multiplicity; ++i)
    knots.push_back(-model.multiplicity * model.half_width + 2.0 * model.half_width * i);
  return knots;
}

//! Parses "uniform:m=<int>,theta=<float>" or "binomial:m=<int>".
//! Unknown keys, missing keys and trailing junk are rejected.
inline ErrorModel parse_error_model(std::string_view text)
{
  auto fail = [&]() -> ErrorModel {
    throw std::invalid_argument("bad error model spec: '" + std::string(text) +
                                "' (expected uniform:m=<int>,theta=<float> or binomial:m=<int>)");
  };
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    return fail();
  std::string_view head = text.substr(0, colon);
  std::string_view rest = text.substr(colon + 1);

  bool have_m = false, have_theta = false;
  long m = 0;
  double theta = 0;
  while (!rest.empty()) {
    auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    auto eq = item.find('=');
    if (eq == std::string_view::npos)
      return fail();
    std::string_view key = item.substr(0, eq);
    std::string value(item.substr(eq + 1));
    try {
      std::size_t used = 0;
      if (key == "m" && !have_m) {
        m = std::stol(value, &used);
        if (used != value.size())
          return fail();
        have_m = true;
      } else if (key == "theta" && !have_theta && head == "uniform") {
        theta = std::stod(value, &used);
        if (used != value.size())
          return fail();
        have_theta = true;
      } else {
        return fail();
      }
    } catch (const std::logic_error&) {
      return fail();
    }
  }
  if (head == "uniform") {
    if (!have_m || !have_theta)
      return fail();
    return ErrorModel::uniform(static_cast<int>(m), theta);
  }
  if (head == "binomial") {
    if (!have_m)
      return fail();
    return ErrorModel::binomial(static_cast<int>(m));
  }
  return fail();
}

inline std::string format_error_model(const ErrorModel& model)
{
  if (model.family == ErrorFamily::uniform_conv)
    return "uniform:m=" + std::to_string(model.multiplicity) +
           ",theta=" + std::to_string(model.half_width);
  return "binomial:m=" + std::to_string(model.multiplicity);
}

} // namespace deconv
