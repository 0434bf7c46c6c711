#pragma once

#include "deconv/estimators.hpp"
#include "deconv/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace deconv {

//! Coordinate-wise combination tau orv tau' = (h or h', N and N'), same branch.
inline TuningPair aux_tuning(const TuningPair& tau, const TuningPair& tau_prime)
{
  if (tau.sign != tau_prime.sign)
    throw std::invalid_argument("aux_tuning: mixed sign branches");
  TuningPair out;
  out.bandwidth = std::max(tau.bandwidth, tau_prime.bandwidth);
  out.cutoff = std::min(tau.cutoff, tau_prime.cutoff);
  out.sign = tau.sign;
  return out;
}

//! Auxiliary estimator f-hat at the combined pair; symmetric in (tau, tau').
inline double aux_estimate(std::span<const double> sample,
                           double x0,
                           const ErrorModel& model,
                           const SmoothKernel& kernel,
                           const TuningPair& tau,
                           const TuningPair& tau_prime)
{
  return estimate_point(sample, x0, model, kernel, aux_tuning(tau, tau_prime));
}

//! Per-grid-point record of the selection run.
struct AdaptiveRecord
{
  double bandwidth;
  int cutoff;
  double sigma_hat;
  double envelope;
  double lambda_hat;
  double risk_proxy;
};

struct AdaptiveTrace
{
  std::vector<AdaptiveRecord> records;
  TuningPair selected;
  double kappa;
  double estimate;
};

struct AdaptiveResult
{
  TuningPair selected;
  double estimate;
  AdaptiveTrace trace;
};

namespace detail {

//! Memoised per-grid-point quantities; the grid is the product set, so every
//! combined pair (h or h', N and N') is again a grid point.
struct GridEval
{
  std::vector<TuningPair> taus;
  std::vector<double> estimates;
  std::vector<double> sigma_hats;
  std::vector<double> envelopes;
  std::vector<double> lambda_hats;
  std::size_t n_bandwidths = 0;
  std::size_t n_cutoffs = 0;

  std::size_t index(std::size_t ih, std::size_t in) const { return ih * n_cutoffs + in; }

  //! index of tau_a orv tau_b; bandwidths are descending, cutoffs ascending,
  //! so max-h/min-N is min-index/min-index
  std::size_t combined(std::size_t a, std::size_t b) const
  {
    const std::size_t ih = std::min(a / n_cutoffs, b / n_cutoffs);
    const std::size_t in = std::min(a % n_cutoffs, b % n_cutoffs);
    return index(ih, in);
  }
};

inline GridEval evaluate_grid(std::span<const double> sample,
                              double x0,
                              const ErrorModel& model,
                              const SmoothKernel& kernel,
                              const GridSpec& grid,
                              double kappa)
{
  if (grid.bandwidths.empty() || grid.cutoffs.empty())
    throw std::invalid_argument("adaptive selection: empty grid");
  const Sign sign = x0 >= 0 ? Sign::plus : Sign::minus;
  GridEval ev;
  ev.n_bandwidths = grid.bandwidths.size();
  ev.n_cutoffs = grid.cutoffs.size();
  const std::size_t total = ev.n_bandwidths * ev.n_cutoffs;
  ev.taus.reserve(total);
  for (double h : grid.bandwidths)
    for (int N : grid.cutoffs)
      ev.taus.push_back({h, N, sign});
  ev.estimates.resize(total);
  ev.sigma_hats.resize(total);
  ev.envelopes.resize(total);
  ev.lambda_hats.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    ev.estimates[i] = estimate_point(sample, x0, model, kernel, ev.taus[i]);
    ev.sigma_hats[i] = std::sqrt(empirical_sigma_sq(sample, x0, model, kernel, ev.taus[i]));
    ev.envelopes[i] = envelope_u(model, kernel, ev.taus[i]);
    ev.lambda_hats[i] = threshold_lambda_hat(ev.sigma_hats[i], ev.envelopes[i], kappa, sample.size());
  }
  return ev;
}

inline double risk_proxy_at(const GridEval& ev, std::size_t a)
{
  double sup_diff = 0;
  double sup_lambda = 0;
  for (std::size_t b = 0; b < ev.taus.size(); ++b) {
    const std::size_t c = ev.combined(a, b);
    const double excess = std::abs(ev.estimates[c] - ev.estimates[b]) - ev.lambda_hats[c] -
                          ev.lambda_hats[b];
    sup_diff = std::max(sup_diff, excess);
    sup_lambda = std::max(sup_lambda, ev.lambda_hats[c]);
  }
  return std::max(sup_diff, 0.0) + ev.lambda_hats[a] + sup_lambda;
}

} // namespace detail

//! The selection criterion R-hat_tau evaluated literally over the grid:
//! sup_{tau'} [ |f-hat_{tau orv tau'} - f-hat_{tau'}| - Lambda-hat_{tau orv tau'}
//! - Lambda-hat_{tau'} ]_+ + Lambda-hat_tau + sup_{tau'} Lambda-hat_{tau orv tau'}.
inline double risk_proxy(std::span<const double> sample,
                         double x0,
                         const ErrorModel& model,
                         const SmoothKernel& kernel,
                         const GridSpec& grid,
                         const TuningPair& tau,
                         double kappa)
{
  if (!(kappa > 0))
    throw std::invalid_argument("risk_proxy: kappa must be > 0");
  auto ev = detail::evaluate_grid(sample, x0, model, kernel, grid, kappa);
  for (std::size_t i = 0; i < ev.taus.size(); ++i)
    if (ev.taus[i].bandwidth == tau.bandwidth && ev.taus[i].cutoff == tau.cutoff)
      return detail::risk_proxy_at(ev, i);
  throw std::invalid_argument("risk_proxy: tau is not a grid point");
}

//! Fully data-driven selection: tau-hat = argmin R-hat with ties broken
//! towards the largest bandwidth, then the smallest cut-off. kappa defaults
//! to 5 ln n.
inline AdaptiveResult select_adaptive(std::span<const double> sample,
                                      double x0,
                                      const ErrorModel& model,
                                      const SmoothKernel& kernel,
                                      const GridSpec& grid,
                                      std::optional<double> kappa = std::nullopt)
{
  if (sample.empty())
    throw std::invalid_argument("select_adaptive: empty sample");
  const double kap = kappa.value_or(5.0 * std::log(static_cast<double>(sample.size())));
  if (!(kap > 0))
    throw std::invalid_argument("select_adaptive: kappa must be > 0");
  auto ev = detail::evaluate_grid(sample, x0, model, kernel, grid, kap);

  AdaptiveTrace trace;
  trace.kappa = kap;
  trace.records.reserve(ev.taus.size());
  std::size_t best = 0;
  double best_risk = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ev.taus.size(); ++i) {
    const double risk = detail::risk_proxy_at(ev, i);
    trace.records.push_back({ev.taus[i].bandwidth, ev.taus[i].cutoff, ev.sigma_hats[i],
                             ev.envelopes[i], ev.lambda_hats[i], risk});
    const bool better =
      risk < best_risk ||
      (risk == best_risk && (ev.taus[i].bandwidth > ev.taus[best].bandwidth ||
                             (ev.taus[i].bandwidth == ev.taus[best].bandwidth &&
                              ev.taus[i].cutoff < ev.taus[best].cutoff)));
    if (better) {
      best = i;
      best_risk = risk;
    }
  }
  trace.selected = ev.taus[best];
  trace.estimate = ev.estimates[best];
  return {ev.taus[best], ev.estimates[best], std::move(trace)};
}

} // namespace deconv
