#pragma once

#include "deconv/error_models.hpp"
#include "deconv/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace deconv {

namespace detail {

//! Horner evaluation; coeffs ascending.
inline double poly_eval(const std::vector<double>& c, double t)
{
  double r = 0;
  for (std::size_t i = c.size(); i-- > 0;)
    r = r * t + c[i];
  return r;
}

inline std::vector<double> poly_derivative(const std::vector<double>& c)
{
  if (c.size() <= 1)
    return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i)
    d[i - 1] = c[i] * static_cast<double>(i);
  return d;
}

//! coefficient-level a * b
inline std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b)
{
  std::vector<double> r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      r[i + j] += a[i] * b[j];
  return r;
}

inline std::vector<double> poly_add(std::vector<double> a, const std::vector<double>& b)
{
  if (b.size() > a.size())
    a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i)
    a[i] += b[i];
  return a;
}

} // namespace detail

//! Infinitely differentiable kernel K(t) = p(t) exp(-1/(1 - t^2)) on (-1, 1)
//! with unit mass and k vanishing moments. The even polynomial p solves the
//! bump-weighted moment system, so derivatives of any order up to 12 are
//! available in closed form.
class SmoothKernel
{
public:
  static constexpr int max_derivative_order = 12;

  explicit SmoothKernel(int order = 5)
    : order_(order)
  {
    if (order < 1 || order > max_derivative_order)
      throw std::invalid_argument("SmoothKernel: order must be in [1, 12]");
    build_polynomial();
    build_bump_derivatives();
    build_sup_norms();
  }

  int order() const noexcept { return order_; }

  //! even-power coefficients of p: p(t) = sum_i poly_coeffs()[i] t^{2i}
  const std::vector<double>& poly_coeffs() const noexcept { return even_coeffs_; }

  double operator()(double t) const { return derivative(0, t); }

  //! K^{(r)}(t); zero outside (-1, 1)
  double derivative(int r, double t) const
  {
    if (r < 0 || r > max_derivative_order)
      throw std::invalid_argument("SmoothKernel: derivative order out of range");
    const double w = 1.0 - t * t;
    if (!(w > 0))
      return 0.0;
    // K^{(r)} = sum_i binom(r, i) p^{(i)} b^{(r-i)},
    // b^{(rho)}(t) = q_rho(t) exp(-1/w - 2 rho log w)
    const double log_w = std::log(w);
    const double base_exp = -1.0 / w;
    double result = 0;
    double binom = 1;
    for (int i = 0; i <= r; ++i) {
      if (i > 0)
        binom = binom * (r - i + 1) / i;
      if (static_cast<std::size_t>(i) >= poly_derivs_.size())
        break;
      const int rho = r - i;
      const double expo = base_exp - 2.0 * rho * log_w;
      if (expo < -745.0)
        continue;
      result += binom * detail::poly_eval(poly_derivs_[i], t) *
                detail::poly_eval(bump_q_[rho], t) * std::exp(expo);
    }
    return result;
  }

  //! sup_t |K^{(r)}(t)|, cached at construction
  double sup_norm(int r) const
  {
    if (r < 0 || r > max_derivative_order)
      throw std::invalid_argument("SmoothKernel: derivative order out of range");
    return sup_norms_[r];
  }

private:
  void build_polynomial()
  {
    // kill even moments 2, 4, ..., 2J while keeping unit mass
    const int J = order_ / 2;
    Eigen::MatrixXd M(J + 1, J + 1);
    std::vector<double> mu(2 * J + 1);
    for (int i = 0; i <= 2 * J; ++i) {
      mu[i] = integrate(
        [i](double t) {
          const double w = 1.0 - t * t;
          if (!(w > 0))
            return 0.0;
          return std::pow(t, 2 * i) * std::exp(-1.0 / w);
        },
        -1.0, 1.0, 1e-12);
    }
    for (int row = 0; row <= J; ++row)
      for (int col = 0; col <= J; ++col)
        M(row, col) = mu[row + col];
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(J + 1);
    rhs(0) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (!lu.isInvertible())
      throw std::logic_error("SmoothKernel: singular moment system");
    Eigen::VectorXd c = lu.solve(rhs);

    even_coeffs_.assign(c.data(), c.data() + c.size());
    std::vector<double> full(2 * J + 1, 0.0);
    for (int i = 0; i <= J; ++i)
      full[2 * i] = c(i);
    poly_derivs_.clear();
    poly_derivs_.push_back(full);
    for (int r = 1; r <= max_derivative_order; ++r) {
      poly_derivs_.push_back(detail::poly_derivative(poly_derivs_.back()));
      if (poly_derivs_.back().size() == 1 && poly_derivs_.back()[0] == 0.0)
        break;
    }
  }

  void build_bump_derivatives()
  {
    // q_{rho+1} = q_rho' (1-t^2)^2 + (4 rho t (1-t^2) - 2t) q_rho
    const std::vector<double> one_minus_t2 = {1.0, 0.0, -1.0};
    const std::vector<double> sq = detail::poly_mul(one_minus_t2, one_minus_t2);
    bump_q_[0] = {1.0};
    for (int rho = 0; rho < max_derivative_order; ++rho) {
      std::vector<double> tail = {0.0, -2.0};
      if (rho > 0)
        tail = detail::poly_add(tail, detail::poly_mul({0.0, 4.0 * rho}, one_minus_t2));
      bump_q_[rho + 1] = detail::poly_add(detail::poly_mul(detail::poly_derivative(bump_q_[rho]), sq),
                                          detail::poly_mul(tail, bump_q_[rho]));
    }
  }

  void build_sup_norms()
  {
    constexpr int grid_size = 4096;
    for (int r = 0; r <= max_derivative_order; ++r) {
      double best = 0;
      int best_idx = 0;
      for (int i = 0; i <= grid_size; ++i) {
        const double t = -1.0 + 2.0 * i / grid_size;
        const double v = std::abs(derivative(r, t));
        if (v > best) {
          best = v;
          best_idx = i;
        }
      }
      // golden-section refinement around the grid argmax
      double lo = -1.0 + 2.0 * std::max(0, best_idx - 1) / grid_size;
      double hi = -1.0 + 2.0 * std::min(grid_size, best_idx + 1) / grid_size;
      const double gr = 0.6180339887498949;
      double x1 = hi - gr * (hi - lo);
      double x2 = lo + gr * (hi - lo);
      double f1 = std::abs(derivative(r, x1));
      double f2 = std::abs(derivative(r, x2));
      for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + gr * (hi - lo);
          f2 = std::abs(derivative(r, x2));
        } else {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - gr * (hi - lo);
          f1 = std::abs(derivative(r, x1));
        }
      }
      sup_norms_[r] = std::max({best, f1, f2});
    }
  }

  int order_;
  std::vector<double> even_coeffs_;
  std::vector<std::vector<double>> poly_derivs_;
  std::array<std::vector<double>, max_derivative_order + 1> bump_q_;
  std::array<double, max_derivative_order + 1> sup_norms_{};
};

inline SmoothKernel build_kernel(int order = 5) { return SmoothKernel(order); }

//! Branch of the deconvolution kernel: L^+ pairs with x0 >= 0, L^- with x0 < 0.
enum class Sign
{
  plus,
  minus
};

namespace detail {

//! Visits the series terms j in [0, cutoff] whose shifted kernel argument
//! u_j = (t -/+ shift_j) / h can lie inside the support (-1, 1). Shifts are
//! theta (2j + m) for the uniform convolution and j for the binomial law, so
//! at most O(h / spacing + 1) terms are active.
template <class F>
void for_each_active_term(const ErrorModel& model, Sign sign, double h, int cutoff, double t, F&& visit)
{
  const int m = model.multiplicity;
  const double s = sign == Sign::plus ? 1.0 : -1.0;
  double lo_real, hi_real;
  if (model.family == ErrorFamily::uniform_conv) {
    const double theta = model.half_width;
    // |t - s theta (2j + m)| < h
    lo_real = ((s * t - h) / theta - m) / 2.0;
    hi_real = ((s * t + h) / theta - m) / 2.0;
  } else {
    lo_real = s * t - h;
    hi_real = s * t + h;
  }
  int j_lo = std::max(0, static_cast<int>(std::ceil(lo_real)) - 1);
  int j_hi = std::min(cutoff, static_cast<int>(std::floor(hi_real)) + 1);
  for (int j = j_lo; j <= j_hi; ++j) {
    const double shift = model.family == ErrorFamily::uniform_conv
                           ? model.half_width * (2.0 * j + m)
                           : static_cast<double>(j);
    const double u = (t - s * shift) / h;
    if (u > -1.0 && u < 1.0)
      visit(j, u);
  }
}

//! (+-2 theta)^m h^{-(m+1)} resp. (+-2)^m h^{-1}
inline double deconv_prefactor(const ErrorModel& model, Sign sign, double h)
{
  const int m = model.multiplicity;
  const double neg = (sign == Sign::minus && (m & 1)) ? -1.0 : 1.0;
  if (model.family == ErrorFamily::uniform_conv)
    return neg * std::pow(2.0 * model.half_width, m) / std::pow(h, m + 1);
  return neg * std::pow(2.0, m) / h;
}

} // namespace detail

//! Truncated deconvolution kernel L^{sign}_{h,N}(t):
//! uniform convolution: (+-2 theta)^m h^{-(m+1)} sum_j C_{j,m} K^{(m)}((t -+ theta(2j+m))/h),
//! binomial:            (+-2)^m h^{-1} sum_j C_{j,m} K((t -+ j)/h).
inline double deconv_kernel_eval(const ErrorModel& model,
                                 const SmoothKernel& kernel,
                                 Sign sign,
                                 double h,
                                 int cutoff,
                                 double t)
{
  if (!(h > 0))
    throw std::invalid_argument("deconv_kernel_eval: bandwidth must be > 0");
  if (cutoff < 0)
    throw std::invalid_argument("deconv_kernel_eval: cutoff must be >= 0");
  const int deriv = model.family == ErrorFamily::uniform_conv ? model.multiplicity : 0;
  double sum = 0;
  detail::for_each_active_term(model, sign, h, cutoff, t, [&](int j, double u) {
    sum += composition_coeff(j, model.multiplicity) * kernel.derivative(deriv, u);
  });
  return detail::deconv_prefactor(model, sign, h) * sum;
}

} // namespace deconv
