#pragma once

#include "deconv/estimators.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace deconv {

//! Smoothness/tail class parameters: Holder exponent alpha and constant A,
//! tail exponent q and constant B (f(t) <= B |t|^{-q}).
struct ClassParams
{
  double alpha = 1;
  double q = 1;
  double A = 1;
  double B = 1;

  void validate() const
  {
    if (!(alpha > 0) || !(q > 0) || !(A > 0) || !(B > 0))
      throw std::invalid_argument("ClassParams: all parameters must be > 0");
  }
};

struct RateExponents
{
  double r;  //!< rate correction from the zero multiplicity in the heavy-tail regime
  double nu; //!< alpha / (2 alpha + 2m + 1 + r)
};

//! r = (alpha/q)(2m - 1 - q) for q < 2m - 1 and 0 otherwise;
//! nu = alpha / (2 alpha + 2m + 1 + r).
inline RateExponents rate_exponents(double alpha, double q, int m)
{
  if (!(alpha > 0) || !(q > 0) || m < 1)
    throw std::invalid_argument("rate_exponents: need alpha > 0, q > 0, m >= 1");
  const double r = q < 2.0 * m - 1.0 ? (alpha / q) * (2.0 * m - 1.0 - q) : 0.0;
  return {r, alpha / (2.0 * alpha + 2.0 * m + 1.0 + r)};
}

//! Minimax rate phi(n) over the class, three regimes in the tail exponent.
inline double rate_phi(std::size_t n, const ClassParams& p, int m)
{
  p.validate();
  if (n < 2)
    throw std::invalid_argument("rate_phi: n must be >= 2");
  const auto [r, nu] = rate_exponents(p.alpha, p.q, m);
  const double dn = static_cast<double>(n);
  const double boundary = 2.0 * m - 1.0;
  const double a_factor = std::pow(p.A, (2.0 * m + 1.0) / p.alpha);
  if (p.q > boundary)
    return std::pow(std::pow(p.B, 1.0 / p.alpha) * a_factor, nu) * std::pow(dn, -nu);
  if (p.q == boundary)
    return std::pow(std::pow(p.B, 1.0 / p.alpha) * a_factor, nu) * std::pow(std::log(dn) / dn, nu);
  return std::pow(std::pow(p.B, boundary / (p.alpha * p.q)) * a_factor, nu) * std::pow(dn, -nu);
}

//! Rate psi_n over the plain Holder class (no tail assumption),
//! (A^{(2m+1)/alpha} / n)^{alpha / (2m alpha + 2m + 1)}.
inline double rate_holder(std::size_t n, double alpha, int m, double A)
{
  if (n < 2)
    throw std::invalid_argument("rate_holder: n must be >= 2");
  if (!(alpha > 0) || !(A > 0) || m < 1)
    throw std::invalid_argument("rate_holder: bad parameters");
  return std::pow(std::pow(A, (2.0 * m + 1.0) / alpha) / static_cast<double>(n),
                  alpha / (2.0 * m * alpha + 2.0 * m + 1.0));
}

//! Closed-form minimax tuning (h*, N*), regime-matched, with all unspecified
//! constants set to 1. N* is rounded up and at least 1; h* is clamped to
//! (0, theta].
inline TuningPair minimax_params(std::size_t n, const ClassParams& p, int m, double theta)
{
  p.validate();
  if (n < 2)
    throw std::invalid_argument("minimax_params: n must be >= 2");
  if (!(theta > 0))
    throw std::invalid_argument("minimax_params: theta must be > 0");
  const double dn = static_cast<double>(n);
  const double boundary = 2.0 * m - 1.0;
  double h, N;
  if (p.q > boundary) {
    h = std::pow(p.B / (p.A * p.A * dn), 1.0 / (2.0 * p.alpha + 2.0 * m + 1.0));
    N = std::pow(std::pow(p.B, p.alpha + 2.0 * m + 1.0) * std::pow(dn, p.alpha) /
                   std::pow(p.A, 2.0 * m + 1.0),
                 1.0 / (p.q * (2.0 * p.alpha + 2.0 * m + 1.0)));
  } else if (p.q == boundary) {
    h = std::pow(p.B * std::log(dn) / (p.A * p.A * dn), 1.0 / (2.0 * p.alpha + 2.0 * m + 1.0));
    N = std::pow(std::pow(p.B, p.alpha + 2.0 * m + 1.0) / std::pow(p.A, 2.0 * m + 1.0) *
                   std::pow(dn / std::log(dn), p.alpha),
                 1.0 / (p.q * (2.0 * p.alpha + 2.0 * m + 1.0)));
  } else {
    const double r = rate_exponents(p.alpha, p.q, m).r;
    h = std::pow(std::pow(p.B, boundary / p.q) / std::pow(p.A, (2.0 * m + p.q - 1.0) / p.q) / dn,
                 1.0 / (2.0 * p.alpha + 2.0 * m + 1.0 + r));
    N = std::pow(p.B / p.A, 1.0 / p.q) * std::pow(h, -p.alpha / p.q);
  }
  TuningPair tau;
  tau.bandwidth = std::min(h, theta);
  tau.cutoff = std::max(1, static_cast<int>(std::ceil(N)));
  return tau;
}

//! Bandwidth/cut-off grids for the adaptive selection rule.
struct GridSpec
{
  std::vector<double> bandwidths; //!< descending dyadic h_max 2^{-j}
  std::vector<int> cutoffs;       //!< 1..N_max
};

//! h_min = (ln n / n)^{1/(2m+1)}, h_max = theta, dyadic bandwidths in between;
//! N_max = floor((n / ln n)^{1/(2m)}), at least 1.
inline GridSpec default_grids(std::size_t n, int m, double theta)
{
  if (n < 8)
    throw std::invalid_argument("default_grids: n must be >= 8");
  if (m < 1 || !(theta > 0))
    throw std::invalid_argument("default_grids: bad parameters");
  const double dn = static_cast<double>(n);
  const double h_min = std::pow(std::log(dn) / dn, 1.0 / (2.0 * m + 1.0));
  const double h_max = theta;
  GridSpec grid;
  const int levels = h_min < h_max ? static_cast<int>(std::floor(std::log2(h_max / h_min))) : 0;
  for (int j = 0; j <= levels; ++j)
    grid.bandwidths.push_back(h_max * std::pow(2.0, -j));
  const int n_max =
    std::max(1, static_cast<int>(std::floor(std::pow(dn / std::log(dn), 1.0 / (2.0 * m)))));
  for (int j = 1; j <= n_max; ++j)
    grid.cutoffs.push_back(j);
  return grid;
}

} // namespace deconv
