#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace deconv {

//! Raised when an iterative numeric routine cannot reach its target.
class numeric_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct QuadratureResult
{
  double value = 0;
  double error = 0;      //!< summed panel error estimates
  std::size_t panels = 0;
};

namespace detail {

//! Single Gauss-Kronrod 15 panel on [a, b]; error is the embedded |K15 - G7|
//! (reported by the rule for the unit interval, rescaled here).
template <class F>
inline QuadratureResult gk_panel(const F& f, double a, double b)
{
  using rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0;
  const double val = rule::integrate(f, a, b, 0, 0.0, &err);
  return {val, err * 0.5 * (b - a), 1};
}

struct PanelRecord
{
  double a, b, value, error;
  bool operator<(const PanelRecord& o) const { return error < o.error; }
};

} // namespace detail

//! Adaptive Gauss-Kronrod integration on [a, b] to absolute tolerance.
//! Panels are bisected worst-first until the summed error estimate falls
//! below abs_tol or the panel budget runs out (the caller inspects .error).
template <class F>
QuadratureResult integrate_adaptive(const F& f,
                                    double a,
                                    double b,
                                    double abs_tol = 1e-10,
                                    std::size_t max_panels = 200000)
{
  if (!(a < b))
    return {0.0, 0.0, 0};
  std::priority_queue<detail::PanelRecord> queue;
  auto first = detail::gk_panel(f, a, b);
  queue.push({a, b, first.value, first.error});
  double total_value = first.value;
  double total_error = first.error;
  std::size_t panels = 1;
  while (total_error > abs_tol && panels < max_panels) {
    detail::PanelRecord worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // interval no longer splittable in double precision
      queue.push(worst);
      break;
    }
    auto left = detail::gk_panel(f, worst.a, mid);
    auto right = detail::gk_panel(f, mid, worst.b);
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push({worst.a, mid, left.value, left.error});
    queue.push({mid, worst.b, right.value, right.error});
    ++panels;
  }
  return {total_value, total_error, panels};
}

//! As integrate_adaptive but throws numeric_error when the tolerance is
//! unreachable within the panel budget.
template <class F>
double integrate(const F& f,
                 double a,
                 double b,
                 double abs_tol = 1e-10,
                 std::size_t max_panels = 200000)
{
  auto res = integrate_adaptive(f, a, b, abs_tol, max_panels);
  if (res.error > abs_tol * 16 && res.error > 1e-14 * std::abs(res.value))
    throw numeric_error("quadrature on [" + std::to_string(a) + ", " + std::to_string(b) +
                        "] stalled: error estimate " + std::to_string(res.error) + " after " +
                        std::to_string(res.panels) + " panels");
  return res.value;
}

//! Integration with known interior breakpoints (kernel window edges,
//! piecewise-polynomial knots). Points outside [a, b] are ignored.
template <class F>
double integrate_segments(const F& f,
                          double a,
                          double b,
                          std::vector<double> breakpoints,
                          double abs_tol = 1e-10,
                          std::size_t max_panels = 200000)
{
  breakpoints.push_back(a);
  breakpoints.push_back(b);
  std::sort(breakpoints.begin(), breakpoints.end());
  double total = 0;
  double prev = a;
  for (double p : breakpoints) {
    if (p <= prev || p > b)
      continue;
    total += integrate(f, prev, std::min(p, b), abs_tol, max_panels);
    prev = p;
  }
  if (prev < b)
    total += integrate(f, prev, b, abs_tol, max_panels);
  return total;
}

//! Integral over the whole real line via x = t / (1 - t^2).
template <class F>
double integrate_real_line(const F& f, double abs_tol = 1e-10, std::size_t max_panels = 200000)
{
  auto g = [&](double t) {
    const double w = 1.0 - t * t;
    const double x = t / w;
    const double jac = (1.0 + t * t) / (w * w);
    const double v = f(x);
    return v == 0.0 ? 0.0 : v * jac;
  };
  return integrate(g, -1.0, 1.0, abs_tol, max_panels);
}

} // namespace deconv
