#include "entropy_cpd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace entropy_cpd::numerics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min() / kEps;
constexpr int kMaxIter = 500;

// Lanczos, g = 7, 9 terms.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

double ln_gamma_lanczos(double x) {
  // valid for x >= 0.5
  double acc = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) {
    acc += kLanczos[i] / (x - 1.0 + static_cast<double>(i));
  }
  const double t = x - 0.5 + kLanczosG;
  return 0.5 * std::log(2.0 * M_PI) + (x - 0.5) * std::log(t) - t +
         std::log(acc);
}

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - ln_gamma(a));
}

double gamma_q_cf(double a, double x) {
  // modified Lentz for the continued fraction of Q(a, x)
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - ln_gamma(a)) * h;
}

double beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double md = static_cast<double>(m);
    const double m2 = 2.0 * md;
    double aa = md * (b - md) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + md) * (qab + md) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double ln_gamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("ln_gamma: x must be positive");
  if (x < 0.5) {
    // reflection: ln Gamma(x) = ln(pi / sin(pi x)) - ln Gamma(1 - x)
    return std::log(M_PI / std::sin(M_PI * x)) - ln_gamma_lanczos(1.0 - x);
  }
  return ln_gamma_lanczos(x);
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("gamma_p: a must be positive");
  if (x < 0.0) throw std::invalid_argument("gamma_p: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double chi2_cdf(double x, int dof) {
  if (dof < 1) throw std::invalid_argument("chi2_cdf: dof must be >= 1");
  if (x < 0.0) throw std::invalid_argument("chi2_cdf: x must be nonnegative");
  return std::clamp(regularized_gamma_p(0.5 * dof, 0.5 * x), 0.0, 1.0);
}

double chi2_pdf(double x, int dof) {
  if (dof < 1) throw std::invalid_argument("chi2_pdf: dof must be >= 1");
  if (x < 0.0) return 0.0;
  if (x == 0.0) return dof == 2 ? 0.5 : (dof == 1 ? std::numeric_limits<double>::infinity() : 0.0);
  const double half = 0.5 * dof;
  return std::exp((half - 1.0) * std::log(x) - 0.5 * x - half * std::log(2.0) -
                  ln_gamma(half));
}

double chi2_quantile(double p, int dof) {
  if (dof < 1) throw std::invalid_argument("chi2_quantile: dof must be >= 1");
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("chi2_quantile: p must be in (0,1)");
  }
  double lo = 0.0;
  double hi = dof + 40.0 * std::sqrt(static_cast<double>(dof)) + 40.0;
  while (chi2_cdf(hi, dof) < p) hi *= 2.0;  // extreme upper levels
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (chi2_cdf(mid, dof) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 2; ++i) {
    const double f = chi2_cdf(x, dof) - p;
    const double df = chi2_pdf(x, dof);
    if (df <= 0.0 || !std::isfinite(df)) break;
    const double step = f / df;
    const double next = x - step;
    if (next > 0.0 && std::isfinite(next)) x = next;
  }
  return x;
}

double regularized_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::invalid_argument("regularized_beta: a, b must be positive");
  }
  if (x < 0.0 || x > 1.0) {
    throw std::invalid_argument("regularized_beta: x must be in [0,1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double lbt = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) +
                     a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(lbt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_cf(a, b, x) / a;
  }
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("student_t_cdf: dof must be positive");
  if (t == 0.0) return 0.5;
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * regularized_beta(0.5 * dof, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("student_t_quantile: p must be in (0,1)");
  }
  if (p == 0.5) return 0.0;
  double hi = 1.0;
  while (student_t_cdf(hi, dof) < std::max(p, 1.0 - p) && hi < 1e12) hi *= 2.0;
  double lo = -hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (student_t_cdf(mid, dof) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double f_cdf(double x, double dof1, double dof2) {
  if (!(dof1 > 0.0) || !(dof2 > 0.0)) {
    throw std::invalid_argument("f_cdf: dof must be positive");
  }
  if (x <= 0.0) return 0.0;
  const double z = dof1 * x / (dof1 * x + dof2);
  return regularized_beta(0.5 * dof1, 0.5 * dof2, z);
}

double f_quantile(double p, double dof1, double dof2) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("f_quantile: p must be in (0,1)");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (f_cdf(hi, dof1, dof2) < p && hi < 1e12) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (f_cdf(mid, dof1, dof2) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

CubicRoots solve_cubic(double a, double d) {
  if (!(d > 0.0)) throw std::invalid_argument("solve_cubic: d must be positive");

  CubicRoots out;
  if (a == 0.0) {
    const double r = std::sqrt(d);
    out.roots = {r, -r, 0.0};
    out.count = 2;
    out.branch = CubicRoots::Branch::kThreeReal;
    return out;
  }

  const double a2 = a * a;
  if (d <= 4.0 / (27.0 * a2)) {
    if (27.0 * a2 * d < 1e-8) {
      // deep perturbative regime: the arccos argument is within rounding
      // of -1 and the trigonometric formula loses the two bounded roots.
      // Seed them from the a -> 0 expansion instead; the third root
      // diverges like -1/a.
      const double r = std::sqrt(d);
      out.roots = {r - 0.5 * d * a, -r - 0.5 * d * a, -1.0 / a + d * a};
    } else {
      // arccos argument clamped to absorb rounding at the branch boundary
      const double arg = std::clamp(0.5 * (27.0 * a2 * d - 2.0), -1.0, 1.0);
      const double theta = std::acos(arg);
      for (int r = 0; r < 3; ++r) {
        const double c =
            2.0 * std::cos(theta / 3.0 - 2.0 * M_PI * r / 3.0) - 1.0;
        out.roots[r] = c / (3.0 * a);
      }
    }
    out.count = 3;
    out.branch = CubicRoots::Branch::kThreeReal;
  } else {
    const double p = -1.0 / (3.0 * a2);
    const double q = 2.0 / (27.0 * a2 * a) - d / a;
    const double disc = 0.25 * q * q + p * p * p / 27.0;  // > 0 here
    const double s = std::sqrt(disc);
    // pick the cube-root argument with no cancellation, recover the
    // other factor from A*B = -p/3
    const double big = (q > 0.0) ? (-0.5 * q - s) : (-0.5 * q + s);
    const double A = std::cbrt(big);
    const double B = (A != 0.0) ? -p / (3.0 * A) : 0.0;
    out.roots[0] = A + B - 1.0 / (3.0 * a);
    out.count = 1;
    out.branch = CubicRoots::Branch::kOneReal;
  }

  // Newton polish. The closed forms lose precision for tiny |a| (the
  // arccos argument sits next to -1), so iterate to convergence; steps
  // that do not shrink the residual are rejected, which also covers the
  // double-root case where f' vanishes.
  const double target = 1e-10 * std::max(1.0, d);
  for (int i = 0; i < out.count; ++i) {
    double x = out.roots[i];
    double f = a * x * x * x + x * x - d;
    for (int step = 0; step < 16 && std::abs(f) > target; ++step) {
      const double df = 3.0 * a * x * x + 2.0 * x;
      if (df == 0.0) break;
      const double next = x - f / df;
      const double fn = a * next * next * next + next * next - d;
      if (!std::isfinite(fn) || std::abs(fn) >= std::abs(f)) break;
      x = next;
      f = fn;
    }
    // one extended-precision step clears the double-arithmetic noise of
    // the loop above; the root ends within an ulp of the true value
    const long double xl = x;
    const long double fl = a * xl * xl * xl + xl * xl - d;
    const long double dfl = 3.0L * a * xl * xl + 2.0L * xl;
    if (dfl != 0.0L && std::isfinite(static_cast<double>(fl / dfl))) {
      const double refined = static_cast<double>(xl - fl / dfl);
      const double fr = a * refined * refined * refined + refined * refined - d;
      if (std::isfinite(fr) && std::abs(fr) <= std::abs(f)) x = refined;
    }
    out.roots[i] = x;
  }

  std::sort(out.roots.begin(), out.roots.begin() + out.count,
            std::greater<double>());
  return out;
}

}  // namespace entropy_cpd::numerics
