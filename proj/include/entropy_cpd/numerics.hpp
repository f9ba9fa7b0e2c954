#pragma once

#include <array>
#include <cstdint>

namespace entropy_cpd::numerics {

// Natural log of the gamma function, x > 0. Lanczos approximation in the
// log domain; reflection below 0.5.
double ln_gamma(double x);

// Regularized lower incomplete gamma P(a, x). Series for x < a + 1,
// continued fraction otherwise.
double regularized_gamma_p(double a, double x);

// CDF of the chi-squared distribution with dof degrees of freedom.
double chi2_cdf(double x, int dof);

double chi2_pdf(double x, int dof);

// Inverse of chi2_cdf: bracketed bisection then Newton polish.
double chi2_quantile(double p, int dof);

// Regularized incomplete beta I_x(a, b), continued fraction (Lentz).
double regularized_beta(double a, double b, double x);

// Student's t CDF / quantile with real (possibly fractional) dof.
double student_t_cdf(double t, double dof);
double student_t_quantile(double p, double dof);

// Fisher F CDF / quantile.
double f_cdf(double x, double dof1, double dof2);
double f_quantile(double p, double dof1, double dof2);

// Real roots of a x^3 + x^2 - d = 0 with d > 0.
struct CubicRoots {
  enum class Branch { kThreeReal, kOneReal };

  std::array<double, 3> roots{};  // descending; first `count` entries valid
  int count = 0;
  Branch branch = Branch::kThreeReal;
};

// a = 0 degenerates to the quadratic and returns {sqrt(d), -sqrt(d)}.
// For a != 0 the trigonometric branch applies when d <= 4/(27 a^2)
// (three real roots, a double root repeated at the boundary), Cardano's
// single real root otherwise. Roots are Newton-polished.
CubicRoots solve_cubic(double a, double d);

}  // namespace entropy_cpd::numerics
