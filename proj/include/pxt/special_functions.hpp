#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pxt::special {

template <typename Real>
Real logistic(Real x) {
  if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
  Real e = std::exp(x);
  return e / (Real(1) + e);
}

/// Logistic density F(x)(1 - F(x)).
template <typename Real>
Real logistic_density(Real x) {
  Real e = std::exp(-std::abs(x));
  return e / ((Real(1) + e) * (Real(1) + e));
}

namespace detail {

constexpr int kMaxIterations = 10000;

template <typename Real>
Real tiny() {
  return std::numeric_limits<Real>::min() / std::numeric_limits<Real>::epsilon();
}

// P(a, x) by its power series, valid for x < a + 1.
template <typename Real>
Real gamma_p_series(Real a, Real x) {
  const Real eps = std::numeric_limits<Real>::epsilon();
  Real ap = a;
  Real term = Real(1) / a;
  Real sum = term;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * eps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) by its continued fraction (modified Lentz), valid for x >= a + 1.
template <typename Real>
Real gamma_q_fraction(Real a, Real x) {
  const Real eps = std::numeric_limits<Real>::epsilon();
  Real b = x + 1 - a;
  Real c = Real(1) / tiny<Real>();
  Real d = Real(1) / b;
  Real h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    Real an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::abs(d) < tiny<Real>()) d = tiny<Real>();
    c = b + an / c;
    if (std::abs(c) < tiny<Real>()) c = tiny<Real>();
    d = Real(1) / d;
    Real delta = d * c;
    h *= delta;
    if (std::abs(delta - 1) < eps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Continued fraction for the incomplete beta (modified Lentz).
template <typename Real>
Real beta_fraction(Real a, Real b, Real x) {
  const Real eps = std::numeric_limits<Real>::epsilon();
  Real qab = a + b;
  Real qap = a + 1;
  Real qam = a - 1;
  Real c = 1;
  Real d = 1 - qab * x / qap;
  if (std::abs(d) < tiny<Real>()) d = tiny<Real>();
  d = Real(1) / d;
  Real h = d;
  for (int m = 1; m < kMaxIterations; ++m) {
    int m2 = 2 * m;
    Real aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::abs(d) < tiny<Real>()) d = tiny<Real>();
    c = 1 + aa / c;
    if (std::abs(c) < tiny<Real>()) c = tiny<Real>();
    d = Real(1) / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::abs(d) < tiny<Real>()) d = tiny<Real>();
    c = 1 + aa / c;
    if (std::abs(c) < tiny<Real>()) c = tiny<Real>();
    d = Real(1) / d;
    Real delta = d * c;
    h *= delta;
    if (std::abs(delta - 1) < eps) break;
  }
  return h;
}

}  // namespace detail

/// Regularized lower incomplete gamma P(a, x).
template <typename Real>
Real gamma_p(Real a, Real x) {
  if (!(a > 0) || x < 0) throw std::domain_error("gamma_p needs a > 0 and x >= 0");
  if (x == 0) return 0;
  if (x < a + 1) return detail::gamma_p_series(a, x);
  return Real(1) - detail::gamma_q_fraction(a, x);
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
template <typename Real>
Real gamma_q(Real a, Real x) {
  if (!(a > 0) || x < 0) throw std::domain_error("gamma_q needs a > 0 and x >= 0");
  if (x == 0) return 1;
  if (x < a + 1) return Real(1) - detail::gamma_p_series(a, x);
  return detail::gamma_q_fraction(a, x);
}

/// Regularized incomplete beta I_x(a, b).
template <typename Real>
Real incomplete_beta(Real a, Real b, Real x) {
  if (!(a > 0) || !(b > 0) || x < 0 || x > 1) {
    throw std::domain_error("incomplete_beta needs a, b > 0 and 0 <= x <= 1");
  }
  if (x == 0) return 0;
  if (x == 1) return 1;
  Real front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                        b * std::log1p(-x));
  if (x < (a + 1) / (a + b + 2)) return front * detail::beta_fraction(a, b, x) / a;
  return Real(1) - front * detail::beta_fraction(b, a, Real(1) - x) / b;
}

/// Upper tail of the chi-square distribution.
template <typename Real>
Real chi_square_sf(Real statistic, int dof) {
  if (dof < 1) throw std::domain_error("chi-square needs dof >= 1");
  if (statistic <= 0) return 1;
  return gamma_q(Real(dof) / 2, statistic / 2);
}

/// Two-sided p-value of Student's t with `df` degrees of freedom.
template <typename Real>
Real student_t_two_sided(Real t, Real df) {
  if (!(df > 0)) throw std::domain_error("student t needs df > 0");
  if (std::isinf(t)) return 0;
  return incomplete_beta(df / 2, Real(0.5), df / (df + t * t));
}

/// Two-sided p-value of a standard normal deviate.
template <typename Real>
Real normal_two_sided(Real z) {
  return std::erfc(std::abs(z) / std::sqrt(Real(2)));
}

}  // namespace pxt::special
