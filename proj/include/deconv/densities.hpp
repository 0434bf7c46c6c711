#pragma once

#include "deconv/quadrature.hpp"
#include "deconv/rng.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace deconv {

//! Counters from an accept-reject sampler run.
struct SampleStats
{
  std::size_t draws = 0;
  std::size_t proposals = 0;
  double acceptance_ratio() const
  {
    return proposals == 0 ? 1.0 : static_cast<double>(draws) / static_cast<double>(proposals);
  }
};

//! Known target density with evaluator, sampler and class metadata. Value
//! type; the concrete law sits behind a shared immutable implementation.
class TestDensity
{
public:
  //! C(s) / (1 + x^2)^s with C(s) = Gamma(s) / (sqrt(pi) Gamma(s - 1/2)).
  //! The sampler runs accept-reject against the standard Cauchy and needs
  //! s >= 1; s = 1 is the standard Cauchy itself.
  static TestDensity generalized_cauchy(double s);
  static TestDensity gaussian(double mu, double sigma);
  //! uniform density on [a, b]
  static TestDensity uniform_bump(double a, double b);
  static TestDensity mixture(std::vector<std::pair<double, TestDensity>> components);

  double pdf(double x) const { return impl_->pdf(x); }
  double cdf(double x) const { return impl_->cdf(x); }

  double sample_one(Rng& rng, SampleStats* stats = nullptr) const
  {
    return impl_->sample_one(rng, stats);
  }

  std::vector<double> sample(std::size_t n, std::uint64_t seed, SampleStats* stats = nullptr) const
  {
    Rng rng(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = sample_one(rng, stats);
    return out;
  }

  //! tail exponent q with f(t) <= B |t|^{-q}; 2s for the generalized Cauchy,
  //! +inf for compactly supported or Gaussian laws
  double tail_q() const { return impl_->tail_q(); }

  //! discontinuity locations of the density (empty when smooth)
  const std::vector<double>& breakpoints() const { return impl_->breakpoints_; }

  std::string label() const { return impl_->label(); }

private:
  struct Impl
  {
    virtual ~Impl() = default;
    virtual double pdf(double x) const = 0;
    virtual double cdf(double x) const = 0;
    virtual double sample_one(Rng& rng, SampleStats* stats) const = 0;
    virtual double tail_q() const = 0;
    virtual std::string label() const = 0;
    std::vector<double> breakpoints_;
  };

  struct GenCauchy;
  struct Gauss;
  struct Uniform;
  struct Mixture;

  explicit TestDensity(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl))
  {
  }

  std::shared_ptr<const Impl> impl_;
};

struct TestDensity::GenCauchy final : TestDensity::Impl
{
  double s;
  double norm; // C(s)

  explicit GenCauchy(double s_)
    : s(s_)
  {
    if (!(s >= 1.0))
      throw std::invalid_argument("generalized_cauchy: need s >= 1");
    norm = std::exp(std::lgamma(s) - std::lgamma(s - 0.5)) / std::sqrt(3.141592653589793238);
  }

  double pdf(double x) const override { return norm * std::pow(1.0 + x * x, -s); }

  double cdf(double x) const override
  {
    if (s == 1.0)
      return 0.5 + std::atan(x) / 3.141592653589793238;
    if (x < 0)
      return 1.0 - cdf(-x);
    // substitute t = 1/u beyond 1 so both pieces are smooth and finite
    double v = 0.5;
    if (x <= 1.0)
      return v + integrate([&](double t) { return pdf(t); }, 0.0, x, 1e-12);
    v += integrate([&](double t) { return pdf(t); }, 0.0, 1.0, 1e-12);
    v += integrate([&](double u) { return norm * std::pow(u * u / (1.0 + u * u), s) / (u * u); },
                   1.0 / x, 1.0, 1e-12);
    return v;
  }

  double sample_one(Rng& rng, SampleStats* stats) const override
  {
    for (std::size_t attempt = 0; attempt < 1000000; ++attempt) {
      const double x = rng.cauchy();
      if (stats)
        ++stats->proposals;
      // f / (M g0) with proposal g0 the standard Cauchy and M = pi C(s)
      if (rng.uniform01() <= std::pow(1.0 + x * x, 1.0 - s)) {
        if (stats)
          ++stats->draws;
        return x;
      }
    }
    throw numeric_error("generalized_cauchy sampler stalled (>1e6 proposals for one draw)");
  }

  double tail_q() const override { return 2.0 * s; }
  std::string label() const override { return "generalized_cauchy(s=" + std::to_string(s) + ")"; }
};

struct TestDensity::Gauss final : TestDensity::Impl
{
  double mu, sigma;

  Gauss(double mu_, double sigma_)
    : mu(mu_)
    , sigma(sigma_)
  {
    if (!(sigma > 0))
      throw std::invalid_argument("gaussian: sigma must be > 0");
  }

  double pdf(double x) const override
  {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * 2.5066282746310005024);
  }

  double cdf(double x) const override
  {
    return 0.5 * std::erfc(-(x - mu) / (sigma * 1.4142135623730950488));
  }

  double sample_one(Rng& rng, SampleStats* stats) const override
  {
    if (stats) {
      ++stats->proposals;
      ++stats->draws;
    }
    return mu + sigma * rng.normal();
  }

  double tail_q() const override { return std::numeric_limits<double>::infinity(); }
  std::string label() const override
  {
    return "gaussian(mu=" + std::to_string(mu) + ",sigma=" + std::to_string(sigma) + ")";
  }
};

struct TestDensity::Uniform final : TestDensity::Impl
{
  double a, b;

  Uniform(double a_, double b_)
    : a(a_)
    , b(b_)
  {
    if (!(a < b))
      throw std::invalid_argument("uniform_bump: need a < b");
    breakpoints_ = {a, b};
  }

  double pdf(double x) const override { return x >= a && x <= b ? 1.0 / (b - a) : 0.0; }

  double cdf(double x) const override
  {
    if (x <= a)
      return 0.0;
    if (x >= b)
      return 1.0;
    return (x - a) / (b - a);
  }

  double sample_one(Rng& rng, SampleStats* stats) const override
  {
    if (stats) {
      ++stats->proposals;
      ++stats->draws;
    }
    return rng.uniform(a, b);
  }

  double tail_q() const override { return std::numeric_limits<double>::infinity(); }
  std::string label() const override
  {
    return "uniform(" + std::to_string(a) + "," + std::to_string(b) + ")";
  }
};

struct TestDensity::Mixture final : TestDensity::Impl
{
  std::vector<std::pair<double, TestDensity>> comps;

  explicit Mixture(std::vector<std::pair<double, TestDensity>> c)
    : comps(std::move(c))
  {
    if (comps.empty())
      throw std::invalid_argument("mixture: no components");
    double total = 0;
    for (auto& [w, d] : comps) {
      if (!(w > 0))
        throw std::invalid_argument("mixture: weights must be > 0");
      total += w;
      for (double bp : d.breakpoints())
        breakpoints_.push_back(bp);
    }
    for (auto& [w, d] : comps)
      w /= total;
  }

  double pdf(double x) const override
  {
    double v = 0;
    for (const auto& [w, d] : comps)
      v += w * d.pdf(x);
    return v;
  }

  double cdf(double x) const override
  {
    double v = 0;
    for (const auto& [w, d] : comps)
      v += w * d.cdf(x);
    return v;
  }

  double sample_one(Rng& rng, SampleStats* stats) const override
  {
    const double u = rng.uniform01();
    double acc = 0;
    for (const auto& [w, d] : comps) {
      acc += w;
      if (u <= acc)
        return d.sample_one(rng, stats);
    }
    return comps.back().second.sample_one(rng, stats);
  }

  double tail_q() const override
  {
    double q = std::numeric_limits<double>::infinity();
    for (const auto& [w, d] : comps)
      q = std::min(q, d.tail_q());
    return q;
  }

  std::string label() const override { return "mixture(" + std::to_string(comps.size()) + ")"; }
};

inline TestDensity TestDensity::generalized_cauchy(double s)
{
  return TestDensity(std::make_shared<const GenCauchy>(s));
}

inline TestDensity TestDensity::gaussian(double mu, double sigma)
{
  return TestDensity(std::make_shared<const Gauss>(mu, sigma));
}

inline TestDensity TestDensity::uniform_bump(double a, double b)
{
  return TestDensity(std::make_shared<const Uniform>(a, b));
}

inline TestDensity TestDensity::mixture(std::vector<std::pair<double, TestDensity>> components)
{
  return TestDensity(std::make_shared<const Mixture>(std::move(components)));
}

} // namespace deconv
