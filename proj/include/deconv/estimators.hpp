#pragma once

#include "deconv/kernels.hpp"
#include "deconv/quadrature.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>

namespace deconv {

//! Tuning pair tau = (h, N) plus the branch of the estimator. When the sign
//! is unset it resolves from the evaluation point: + for x0 >= 0, - below.
struct TuningPair
{
  double bandwidth = 0;  //!< h > 0
  int cutoff = 0;        //!< series cut-off N >= 0
  std::optional<Sign> sign{};

  void validate() const
  {
    if (!(bandwidth > 0))
      throw std::invalid_argument("TuningPair: bandwidth must be > 0");
    if (cutoff < 0)
      throw std::invalid_argument("TuningPair: cutoff must be >= 0");
  }
};

inline Sign resolve_sign(const TuningPair& tau, double x0)
{
  return tau.sign.value_or(x0 >= 0 ? Sign::plus : Sign::minus);
}

//! Pointwise deconvolution estimate (1/n) sum_i L^{sign}_{h,N}(Y_i - x0).
inline double estimate_point(std::span<const double> sample,
                             double x0,
                             const ErrorModel& model,
                             const SmoothKernel& kernel,
                             const TuningPair& tau)
{
  tau.validate();
  if (sample.empty())
    throw std::invalid_argument("estimate_point: empty sample");
  const Sign sign = resolve_sign(tau, x0);
  const int deriv = model.family == ErrorFamily::uniform_conv ? model.multiplicity : 0;
  double sum = 0;
  for (double y : sample) {
    detail::for_each_active_term(model, sign, tau.bandwidth, tau.cutoff, y - x0, [&](int j, double u) {
      sum += composition_coeff(j, model.multiplicity) * kernel.derivative(deriv, u);
    });
  }
  return detail::deconv_prefactor(model, sign, tau.bandwidth) * sum /
         static_cast<double>(sample.size());
}

//! Empirical second-moment proxy sigma-hat^2_tau: the per-observation average
//! of the sum of squared series terms (sum of squares, not square of the sum).
inline double empirical_sigma_sq(std::span<const double> sample,
                                 double x0,
                                 const ErrorModel& model,
                                 const SmoothKernel& kernel,
                                 const TuningPair& tau)
{
  tau.validate();
  if (sample.empty())
    throw std::invalid_argument("empirical_sigma_sq: empty sample");
  const Sign sign = resolve_sign(tau, x0);
  const int deriv = model.family == ErrorFamily::uniform_conv ? model.multiplicity : 0;
  const double pref = detail::deconv_prefactor(model, sign, tau.bandwidth);
  double sum = 0;
  for (double y : sample) {
    detail::for_each_active_term(model, sign, tau.bandwidth, tau.cutoff, y - x0, [&](int j, double u) {
      const double term = composition_coeff(j, model.multiplicity) * kernel.derivative(deriv, u);
      sum += term * term;
    });
  }
  return pref * pref * sum / static_cast<double>(sample.size());
}

//! Envelope u_tau bounding 2 |L^{sign}_{h,N}|:
//! 2^{m+1} theta^m C_{N,m} ||K^{(m)}||_inf h^{-m-1} for the uniform
//! convolution; the binomial analogue replaces theta^m by 1, K^{(m)} by K and
//! h^{-m-1} by h^{-1}.
inline double envelope_u(const ErrorModel& model, const SmoothKernel& kernel, const TuningPair& tau)
{
  tau.validate();
  const int m = model.multiplicity;
  const double coeff = composition_coeff(tau.cutoff, m);
  if (model.family == ErrorFamily::uniform_conv)
    return std::pow(2.0, m + 1) * std::pow(model.half_width, m) * coeff *
           kernel.sup_norm(m) / std::pow(tau.bandwidth, m + 1);
  return std::pow(2.0, m + 1) * coeff * kernel.sup_norm(0) / tau.bandwidth;
}

//! Bernstein threshold Lambda_tau(kappa) = sigma sqrt(2 kappa / n) + 2 u kappa / (3n).
inline double threshold_lambda(double sigma, double u, double kappa, std::size_t n)
{
  if (sigma < 0 || u < 0 || !(kappa > 0) || n < 1)
    throw std::invalid_argument("threshold_lambda: bad arguments");
  const double dn = static_cast<double>(n);
  return sigma * std::sqrt(2.0 * kappa / dn) + 2.0 * u * kappa / (3.0 * dn);
}

//! Data-driven threshold Lambda-hat_tau(kappa) = 7 (sigma-hat sqrt(2 kappa/n) + 2 u kappa/(3n)).
inline double threshold_lambda_hat(double sigma_hat, double u, double kappa, std::size_t n)
{
  return 7.0 * threshold_lambda(sigma_hat, u, kappa, n);
}

//! Population value sigma^2_tau by quadrature against a supplied density f_Y
//! of the observations (test oracle). Each series term contributes
//! pref^2 C_{j,m}^2 h int |K^{(d)}(u)|^2 f_Y(center_j + u h) du.
inline double true_sigma_sq(const ErrorModel& model,
                            const SmoothKernel& kernel,
                            const TuningPair& tau,
                            double x0,
                            const std::function<double(double)>& f_Y,
                            double rel_tol = 1e-6)
{
  tau.validate();
  const Sign sign = resolve_sign(tau, x0);
  const double s = sign == Sign::plus ? 1.0 : -1.0;
  const int m = model.multiplicity;
  const int deriv = model.family == ErrorFamily::uniform_conv ? m : 0;
  const double h = tau.bandwidth;
  const double pref = detail::deconv_prefactor(model, sign, h);

  double total = 0;
  for (int j = 0; j <= tau.cutoff; ++j) {
    const double shift = model.family == ErrorFamily::uniform_conv
                           ? model.half_width * (2.0 * j + m)
                           : static_cast<double>(j);
    const double center = x0 + s * shift;
    const double coeff = composition_coeff(j, m);
    auto integrand = [&](double u) {
      const double kd = kernel.derivative(deriv, u);
      return kd * kd * f_Y(center + u * h);
    };
    // two passes: a crude value fixes the absolute tolerance for the final one
    double rough = integrate(integrand, -1.0, 1.0, 1e-6);
    double tol = std::max(std::abs(rough) * rel_tol * 0.1, 1e-14);
    total += coeff * coeff * h * integrate(integrand, -1.0, 1.0, tol);
  }
  return pref * pref * total;
}

} // namespace deconv
