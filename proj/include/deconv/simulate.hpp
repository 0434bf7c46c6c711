#pragma once

#include "deconv/adaptive.hpp"
#include "deconv/densities.hpp"
#include "deconv/estimators.hpp"
#include "deconv/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace deconv {

//! i.i.d. draws from a target density, deterministic per seed.
inline std::vector<double> sample_target(const TestDensity& density,
                                         std::size_t n,
                                         std::uint64_t seed,
                                         SampleStats* stats = nullptr)
{
  return density.sample(n, seed, stats);
}

//! Density of Y = X + eps: the target convolved with the error law.
inline double convolved_density(const TestDensity& density, const ErrorModel& model, double y)
{
  const int m = model.multiplicity;
  if (model.family == ErrorFamily::binomial) {
    double v = 0;
    double binom = 1;
    const double w = std::pow(0.5, m);
    for (int k = 0; k <= m; ++k) {
      if (k > 0)
        binom = binom * (m - k + 1) / k;
      v += binom * w * density.pdf(y - k);
    }
    return v;
  }
  const double reach = m * model.half_width;
  std::vector<double> pts = uniform_conv_knots(model);
  for (double bp : density.breakpoints())
    pts.push_back(y - bp);
  return integrate_segments(
    [&](double e) { return uniform_conv_density(model, e) * density.pdf(y - e); }, -reach, reach,
    std::move(pts), 1e-12);
}

namespace detail {

//! (1/h) int K((t - center)/h) f(t) dt with the density's own breakpoints
inline double kernel_smoothed(const TestDensity& density,
                              const SmoothKernel& kernel,
                              double h,
                              double center)
{
  std::vector<double> pts;
  for (double bp : density.breakpoints())
    pts.push_back((bp - center) / h);
  return integrate_segments(
    [&](double u) { return kernel.derivative(0, u) * density.pdf(center + u * h); }, -1.0, 1.0,
    std::move(pts), 1e-12);
}

} // namespace detail

//! Alternating series tail of the expectation for the uniform-convolution
//! model: T_N = sum_{j=1}^m binom(m,j) (-1)^j int K(y) f(yh + x0 +- 2 theta (N+1) j) dy.
inline double series_tail(const TestDensity& density,
                          const ErrorModel& model,
                          const SmoothKernel& kernel,
                          const TuningPair& tau,
                          double x0)
{
  if (model.family != ErrorFamily::uniform_conv)
    throw std::invalid_argument("series_tail: defined for the uniform-convolution model");
  const double s = resolve_sign(tau, x0) == Sign::plus ? 1.0 : -1.0;
  const int m = model.multiplicity;
  double total = 0;
  double binom = 1;
  for (int j = 1; j <= m; ++j) {
    binom = binom * (m - j + 1) / j;
    const double sign = (j & 1) ? -1.0 : 1.0;
    const double center = x0 + s * 2.0 * model.half_width * (tau.cutoff + 1.0) * j;
    total += sign * binom * detail::kernel_smoothed(density, kernel, tau.bandwidth, center);
  }
  return total;
}

//! E f-hat by quadrature. Uniform convolution: kernel-smoothed density at x0
//! plus the alternating tail; binomial: term-by-term integration of the
//! truncated kernel against f_Y.
inline double oracle_mean(const TestDensity& density,
                          const ErrorModel& model,
                          const SmoothKernel& kernel,
                          const TuningPair& tau,
                          double x0)
{
  tau.validate();
  if (model.family == ErrorFamily::uniform_conv)
    return detail::kernel_smoothed(density, kernel, tau.bandwidth, x0) +
           series_tail(density, model, kernel, tau, x0);

  const double s = resolve_sign(tau, x0) == Sign::plus ? 1.0 : -1.0;
  const int m = model.multiplicity;
  const double h = tau.bandwidth;
  const double pref = (s < 0 && (m & 1)) ? -std::pow(2.0, m) : std::pow(2.0, m);
  double total = 0;
  for (int j = 0; j <= tau.cutoff; ++j) {
    const double center = x0 + s * j;
    total += composition_coeff(j, m) *
             integrate(
               [&](double u) {
                 return kernel.derivative(0, u) * convolved_density(density, model, center + u * h);
               },
               -1.0, 1.0, 1e-11);
  }
  return pref * total;
}

inline double oracle_bias(const TestDensity& density,
                          const ErrorModel& model,
                          const SmoothKernel& kernel,
                          const TuningPair& tau,
                          double x0)
{
  return oracle_mean(density, model, kernel, tau, x0) - density.pdf(x0);
}

namespace detail {

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn)
{
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count)
        return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error)
          first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back(worker);
  for (auto& th : pool)
    th.join();
  if (first_error)
    std::rethrow_exception(first_error);
}

} // namespace detail

struct FixedMode
{
  TuningPair tau;
};

struct MinimaxMode
{
  ClassParams params;
};

struct AdaptiveMode
{
  std::optional<double> kappa{};
};

using EstimationMode = std::variant<FixedMode, MinimaxMode, AdaptiveMode>;

inline std::string mode_label(const EstimationMode& mode)
{
  if (std::holds_alternative<FixedMode>(mode))
    return "fixed";
  if (std::holds_alternative<MinimaxMode>(mode))
    return "minimax";
  return "adaptive";
}

//! Full description of one simulation run.
struct ExperimentPlan
{
  ExperimentPlan(TestDensity density_, ErrorModel error_, EstimationMode mode_)
    : density(std::move(density_))
    , error(error_)
    , mode(std::move(mode_))
  {
  }

  TestDensity density;
  ErrorModel error;
  EstimationMode mode;
  double x0 = 0.5;
  std::vector<std::size_t> sample_sizes;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  std::string out;
  int kernel_order = 5;
  int threads = 1;

  void validate() const
  {
    if (trials < 1)
      throw std::invalid_argument("ExperimentPlan: trials must be >= 1");
    if (sample_sizes.empty())
      throw std::invalid_argument("ExperimentPlan: empty sample size list");
    if (!std::is_sorted(sample_sizes.begin(), sample_sizes.end()))
      throw std::invalid_argument("ExperimentPlan: sample sizes must ascend");
  }

  //! reference scale for minimax formulas and adaptive grids
  double grid_half_width() const
  {
    return error.family == ErrorFamily::uniform_conv ? error.half_width : 0.5;
  }
};

struct RiskRow
{
  std::size_t n = 0;
  std::size_t trials = 0;
  double mse = 0;
  double rmse = 0;
  double se = 0; //!< standard error of the mse estimate
  double mean_h = 0;
  double mean_N = 0;
};

struct SlopeFit
{
  double slope = std::numeric_limits<double>::quiet_NaN();
  double half_width = std::numeric_limits<double>::quiet_NaN();
};

struct RiskReport
{
  std::vector<RiskRow> rows;
  SlopeFit slope;
  std::string mode;
  std::uint64_t seed = 0;
};

//! Least squares of ln RMSE on ln n; the half-width is the two-sided 95%
//! t-interval for the slope.
inline SlopeFit fit_rate(const RiskReport& report)
{
  const std::size_t k = report.rows.size();
  if (k < 3)
    throw std::invalid_argument("fit_rate: need at least 3 rows");
  static constexpr double t975[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                    2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                    2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                    2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
  double sx = 0, sy = 0;
  for (const auto& row : report.rows) {
    sx += std::log(static_cast<double>(row.n));
    sy += std::log(row.rmse);
  }
  const double mx = sx / k, my = sy / k;
  double sxx = 0, sxy = 0;
  for (const auto& row : report.rows) {
    const double dx = std::log(static_cast<double>(row.n)) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(row.rmse) - my);
  }
  const double slope = sxy / sxx;
  double rss = 0;
  for (const auto& row : report.rows) {
    const double dx = std::log(static_cast<double>(row.n)) - mx;
    const double resid = std::log(row.rmse) - my - slope * dx;
    rss += resid * resid;
  }
  const double se = std::sqrt(rss / (k - 2) / sxx);
  const double tq = k - 2 <= 30 ? t975[k - 3] : 1.96;
  return {slope, tq * se};
}

//! Monte Carlo risk of the configured estimator over the sample-size sweep.
//! Trials are independent work items with seeds derived from
//! (seed, n, trial); aggregation runs in trial order, so output is identical
//! for any worker count.
inline RiskReport monte_carlo_risk(const ExperimentPlan& plan)
{
  plan.validate();
  const SmoothKernel kernel(plan.kernel_order);
  const double f_at_x0 = plan.density.pdf(plan.x0);
  RiskReport report;
  report.mode = mode_label(plan.mode);
  report.seed = plan.seed;

  for (std::size_t n : plan.sample_sizes) {
    const std::uint64_t n_seed = derive_seed(plan.seed, "n", n);

    TuningPair fixed_tau;
    GridSpec grid;
    std::optional<double> kappa;
    if (const auto* fixed = std::get_if<FixedMode>(&plan.mode)) {
      fixed_tau = fixed->tau;
    } else if (const auto* mm = std::get_if<MinimaxMode>(&plan.mode)) {
      fixed_tau = minimax_params(n, mm->params, plan.error.multiplicity, plan.grid_half_width());
    } else {
      grid = default_grids(n, plan.error.multiplicity, plan.grid_half_width());
      kappa = std::get<AdaptiveMode>(plan.mode).kappa;
    }
    const bool adaptive = std::holds_alternative<AdaptiveMode>(plan.mode);

    std::vector<double> sq_err(plan.trials);
    std::vector<double> used_h(plan.trials);
    std::vector<double> used_N(plan.trials);
    std::vector<unsigned char> failed(plan.trials, 0);

    detail::parallel_for(plan.trials, plan.threads, [&](std::size_t trial) {
      const std::uint64_t trial_seed = derive_seed(n_seed, "trial", trial);
      try {
        auto ys = sample_target(plan.density, n, derive_seed(trial_seed, "x"));
        auto eps = sample_errors(plan.error, n, derive_seed(trial_seed, "eps"));
        for (std::size_t i = 0; i < n; ++i)
          ys[i] += eps[i];
        double estimate;
        if (adaptive) {
          auto res = select_adaptive(ys, plan.x0, plan.error, kernel, grid, kappa);
          estimate = res.estimate;
          used_h[trial] = res.selected.bandwidth;
          used_N[trial] = res.selected.cutoff;
        } else {
          estimate = estimate_point(ys, plan.x0, plan.error, kernel, fixed_tau);
          used_h[trial] = fixed_tau.bandwidth;
          used_N[trial] = fixed_tau.cutoff;
        }
        const double err = estimate - f_at_x0;
        sq_err[trial] = err * err;
      } catch (const numeric_error&) {
        failed[trial] = 1;
      }
    });

    std::size_t failures = 0;
    for (unsigned char f : failed)
      failures += f;
    if (failures * 100 > plan.trials)
      throw numeric_error("monte_carlo_risk: " + std::to_string(failures) + " of " +
                          std::to_string(plan.trials) + " trials failed at n = " +
                          std::to_string(n));

    RiskRow row;
    row.n = n;
    row.trials = plan.trials - failures;
    double sum = 0, sum_h = 0, sum_N = 0;
    for (std::size_t t = 0; t < plan.trials; ++t) {
      if (failed[t])
        continue;
      sum += sq_err[t];
      sum_h += used_h[t];
      sum_N += used_N[t];
    }
    row.mse = sum / row.trials;
    row.rmse = std::sqrt(row.mse);
    row.mean_h = sum_h / row.trials;
    row.mean_N = sum_N / row.trials;
    double ss = 0;
    for (std::size_t t = 0; t < plan.trials; ++t) {
      if (failed[t])
        continue;
      const double d = sq_err[t] - row.mse;
      ss += d * d;
    }
    row.se = row.trials > 1
               ? std::sqrt(ss / (row.trials - 1) / row.trials)
               : std::numeric_limits<double>::quiet_NaN();
    report.rows.push_back(row);
  }

  if (report.rows.size() >= 3)
    report.slope = fit_rate(report);
  return report;
}

//! Exceedance frequency of |xi_tau| over the Bernstein threshold
//! Lambda_tau(kappa) built from the quadrature values of sigma_tau and the
//! envelope u_tau. The estimator is centered at its quadrature mean.
struct BernsteinCheck
{
  double frequency = 0;
  double threshold = 0;
  double sigma = 0;
  double envelope = 0;
  double center = 0;
  std::size_t exceedances = 0;
  std::size_t replications = 0;
};

inline BernsteinCheck bernstein_tail_check(const ErrorModel& model,
                                           const SmoothKernel& kernel,
                                           const TuningPair& tau,
                                           const TestDensity& density,
                                           std::size_t n,
                                           double kappa,
                                           std::size_t replications,
                                           double x0 = 0.5,
                                           std::uint64_t seed = 1,
                                           int threads = 1)
{
  if (replications < 1000)
    throw std::invalid_argument("bernstein_tail_check: need >= 1000 replications");
  BernsteinCheck result;
  result.replications = replications;
  result.sigma = std::sqrt(true_sigma_sq(
    model, kernel, tau, x0, [&](double y) { return convolved_density(density, model, y); }));
  result.envelope = envelope_u(model, kernel, tau);
  result.threshold = threshold_lambda(result.sigma, result.envelope, kappa, n);
  result.center = oracle_mean(density, model, kernel, tau, x0);

  std::vector<unsigned char> exceeded(replications, 0);
  detail::parallel_for(replications, threads, [&](std::size_t rep) {
    const std::uint64_t rep_seed = derive_seed(seed, "bernstein", rep);
    auto ys = sample_target(density, n, derive_seed(rep_seed, "x"));
    auto eps = sample_errors(model, n, derive_seed(rep_seed, "eps"));
    for (std::size_t i = 0; i < n; ++i)
      ys[i] += eps[i];
    const double est = estimate_point(ys, x0, model, kernel, tau);
    exceeded[rep] = std::abs(est - result.center) >= result.threshold ? 1 : 0;
  });
  for (unsigned char e : exceeded)
    result.exceedances += e;
  result.frequency = static_cast<double>(result.exceedances) / replications;
  return result;
}

namespace detail {

inline std::string format_double(double v)
{
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

} // namespace detail

//! CSV schema: comment header "#deconv-lab v1", then
//! n,trials,mse,rmse,se,mean_h,mean_N,mode,seed.
inline void write_csv(const RiskReport& report, std::ostream& os)
{
  os << "#deconv-lab v1\n";
  os << "n,trials,mse,rmse,se,mean_h,mean_N,mode,seed\n";
  for (const auto& row : report.rows) {
    os << row.n << ',' << row.trials << ',' << detail::format_double(row.mse) << ','
       << detail::format_double(row.rmse) << ',' << detail::format_double(row.se) << ','
       << detail::format_double(row.mean_h) << ',' << detail::format_double(row.mean_N) << ','
       << report.mode << ',' << report.seed << '\n';
  }
}

//! Reads observations: one decimal per line, or a single-column CSV whose
//! first line is the header "y".
inline std::vector<double> read_sample_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open sample file: " + path);
  std::vector<double> values;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty())
      continue;
    if (first && line == "y") {
      first = false;
      continue;
    }
    first = false;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(line, &used));
      if (used != line.size())
        throw std::invalid_argument("");
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad observation line: '" + line + "'");
    }
  }
  if (values.empty())
    throw std::invalid_argument("sample file has no observations: " + path);
  return values;
}

} // namespace deconv
