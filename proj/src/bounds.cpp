#include "entropy_cpd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "entropy_cpd/errors.hpp"
#include "entropy_cpd/numerics.hpp"

namespace entropy_cpd::bounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_full_support(const CategoricalDistribution& p) {
  if (!(p.probs.minCoeff() > 0.0)) {
    throw ValidityError("bounds: distribution must have full support");
  }
}

// ln sum_{j=0}^{n} prod_{i<j} (1 - i/n) (t/n)^j for t in [0, n).
// Terms are strictly decreasing; the sum is bounded by n + 1, so the
// accumulation is safe. For very large n the geometric tail is truncated
// once it cannot move the sum at double precision.
double log_mgf_sum(double t, std::int64_t n) {
  const double nd = static_cast<double>(n);
  const double ratio0 = t / nd;
  double term = 1.0;
  double sum = 1.0;
  for (std::int64_t j = 1; j <= n; ++j) {
    term *= (1.0 - static_cast<double>(j - 1) / nd) * ratio0;
    sum += term;
    if (n > 20000 && j > 64) {
      const double q = (1.0 - static_cast<double>(j) / nd) * ratio0;
      if (q < 1.0 && term * q / (1.0 - q) < 1e-18 * sum) break;
    }
  }
  return std::log(sum);
}

// Golden-section minimization of a unimodal objective on [lo, hi].
template <typename F>
double golden_min(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 400 && (b - a) > tol * std::max(1.0, std::abs(b)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return std::min(fc, fd);
}

template <typename F>
double chernoff_min(F&& objective, double hi) {
  double best = golden_min(objective, 0.0, hi, 1e-10);
  // fallback dense scan in case the golden section missed the basin
  if (!std::isfinite(best)) {
    best = kInf;
    for (int i = 0; i < 1024; ++i) {
      best = std::min(best, objective(hi * (i + 0.5) / 1024.0));
    }
  }
  return best;
}

double validity_floor(const BoundSpec& spec) {
  switch (spec.family) {
    case BoundFamily::kAgrawal1:
    case BoundFamily::kAgrawal2:
    case BoundFamily::kAgrawal3:
      return static_cast<double>(spec.k - 1) / static_cast<double>(spec.n);
    case BoundFamily::kTwoSample1:
    case BoundFamily::kTwoSample2:
    case BoundFamily::kTwoSample3: {
      const double n = static_cast<double>(spec.n);
      const double m = static_cast<double>(spec.m_or_n());
      return spec.beta * static_cast<double>(spec.k - 1) * (m + n) / (m * n);
    }
    default:
      return 0.0;
  }
}

}  // namespace

BoundFamily parse_family(const std::string& tag) {
  if (tag == "asymptotic1") return BoundFamily::kAsymptotic1;
  if (tag == "asymptotic2") return BoundFamily::kAsymptotic2;
  if (tag == "be_envelope") return BoundFamily::kBeEnvelope;
  if (tag == "be2_quadratic") return BoundFamily::kBe2Quadratic;
  if (tag == "sanov_binom") return BoundFamily::kSanovBinom;
  if (tag == "sanov_simple") return BoundFamily::kSanovSimple;
  if (tag == "mardia") return BoundFamily::kMardia;
  if (tag == "agrawal1") return BoundFamily::kAgrawal1;
  if (tag == "agrawal2") return BoundFamily::kAgrawal2;
  if (tag == "agrawal3") return BoundFamily::kAgrawal3;
  if (tag == "twosample1") return BoundFamily::kTwoSample1;
  if (tag == "twosample2") return BoundFamily::kTwoSample2;
  if (tag == "twosample3") return BoundFamily::kTwoSample3;
  throw std::invalid_argument("unknown bound family '" + tag + "'");
}

std::string family_tag(BoundFamily family) {
  switch (family) {
    case BoundFamily::kAsymptotic1: return "asymptotic1";
    case BoundFamily::kAsymptotic2: return "asymptotic2";
    case BoundFamily::kBeEnvelope: return "be_envelope";
    case BoundFamily::kBe2Quadratic: return "be2_quadratic";
    case BoundFamily::kSanovBinom: return "sanov_binom";
    case BoundFamily::kSanovSimple: return "sanov_simple";
    case BoundFamily::kMardia: return "mardia";
    case BoundFamily::kAgrawal1: return "agrawal1";
    case BoundFamily::kAgrawal2: return "agrawal2";
    case BoundFamily::kAgrawal3: return "agrawal3";
    case BoundFamily::kTwoSample1: return "twosample1";
    case BoundFamily::kTwoSample2: return "twosample2";
    case BoundFamily::kTwoSample3: return "twosample3";
  }
  return "?";
}

bool is_two_sample(BoundFamily family) {
  switch (family) {
    case BoundFamily::kAsymptotic2:
    case BoundFamily::kBe2Quadratic:
    case BoundFamily::kTwoSample1:
    case BoundFamily::kTwoSample2:
    case BoundFamily::kTwoSample3:
      return true;
    default:
      return false;
  }
}

double asymptotic_threshold(double alpha, int k, std::int64_t n,
                            std::optional<std::int64_t> m) {
  if (k < 2) throw std::invalid_argument("asymptotic_threshold: k must be >= 2");
  if (n < 1) throw std::invalid_argument("asymptotic_threshold: n must be >= 1");
  const double q = numerics::chi2_quantile(1.0 - alpha, k - 1);
  if (!m.has_value()) return q / (2.0 * static_cast<double>(n));
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(*m);
  return q * (nd + md) / (2.0 * nd * md);
}

double be_error_term(std::int64_t n, const CategoricalDistribution& p) {
  if (n < 1) throw std::invalid_argument("be_error_term: n must be >= 1");
  check_full_support(p);
  const int k = p.k();
  const double cst =
      42.0 * std::pow(static_cast<double>(k - 1), 0.25) + 16.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.probs.size(); ++i) {
    const double pi = p.probs[i];
    sum += std::pow(1.0 - pi, 1.5) / std::sqrt(static_cast<double>(n) * pi);
  }
  return cst * sum;
}

double kappa(double x, std::int64_t n, double mu, KappaDirection direction) {
  if (!(x > 0.0)) throw std::invalid_argument("kappa: x must be positive");
  if (!(mu > 0.0 && mu <= 1.0)) {
    throw std::invalid_argument("kappa: mu must be in (0, 1]");
  }
  const double scale = 1.0 / std::sqrt(mu * static_cast<double>(n));
  const double a = direction == KappaDirection::kUp ? -scale : scale;
  const numerics::CubicRoots roots = numerics::solve_cubic(a, x);
  double best = kInf;  // min over the empty set
  for (int i = 0; i < roots.count; ++i) {
    if (roots.roots[i] > 0.0) best = std::min(best, roots.roots[i]);
  }
  return best * best;
}

Envelope be_envelope(double x, std::int64_t n,
                     const CategoricalDistribution& p) {
  if (!(x > 0.0)) throw std::invalid_argument("be_envelope: x must be positive");
  check_full_support(p);
  const int dof = p.k() - 1;
  const double mu = p.probs.minCoeff();
  const double err = be_error_term(n, p);
  const double kd = kappa(x, n, mu, KappaDirection::kDown);
  const double ku = kappa(x, n, mu, KappaDirection::kUp);
  const double f_down = std::isinf(kd) ? 1.0 : numerics::chi2_cdf(kd, dof);
  const double f_up = std::isinf(ku) ? 1.0 : numerics::chi2_cdf(ku, dof);
  Envelope env;
  env.lower = std::max(0.0, f_down - err);
  env.upper = std::min(1.0, f_up + err);
  return env;
}

double be2_quadratic_error(std::int64_t n, std::int64_t m,
                           const CategoricalDistribution& p) {
  if (n < 1 || m < 1) {
    throw std::invalid_argument("be2_quadratic_error: n, m must be >= 1");
  }
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double prefactor =
      (nd * nd + md * md) / (std::sqrt(nd * md) * (nd + md));
  return prefactor * be_error_term(n + m, p);
}

double sanov_bound(double x, std::int64_t n, int k, SanovVariant variant) {
  if (!(x > 0.0)) throw std::invalid_argument("sanov_bound: x must be positive");
  if (n < 1 || k < 2) {
    throw std::invalid_argument("sanov_bound: n >= 1 and k >= 2 required");
  }
  const double nd = static_cast<double>(n);
  double log_prefactor;
  if (variant == SanovVariant::kBinom) {
    log_prefactor = numerics::ln_gamma(nd + k) - numerics::ln_gamma(nd + 1.0) -
                    numerics::ln_gamma(static_cast<double>(k));
  } else {
    log_prefactor = static_cast<double>(k) * std::log(nd + 1.0);
  }
  return std::exp(log_prefactor - nd * x);
}

double mardia_bound(double x, std::int64_t n, int k) {
  if (!(x > 0.0)) throw std::invalid_argument("mardia_bound: x must be positive");
  const double nd = static_cast<double>(n);
  const double upper = 2.0 + std::sqrt(nd * std::exp(3.0) / (2.0 * M_PI));
  if (k < 3 || static_cast<double>(k) > upper) {
    throw ValidityError("mardia_bound: k outside validity window");
  }
  const double log_pref = std::log(6.0) + 2.0 - 1.5 * std::log(M_PI);
  const double log_core =
      0.5 * k * (std::log(nd) + 3.0 - std::log(2.0 * M_PI * k));
  return std::exp(log_pref + log_core - nd * x);
}

double agrawal_bound(double x, std::int64_t n, int k, AgrawalVariant variant) {
  if (n < 1 || k < 2) {
    throw std::invalid_argument("agrawal_bound: n >= 1 and k >= 2 required");
  }
  const double nd = static_cast<double>(n);
  const double km1 = static_cast<double>(k - 1);
  if (!(x > km1 / nd)) {
    throw ValidityError("agrawal_bound: requires x > (k-1)/n");
  }
  if (variant == AgrawalVariant::kM3) {
    return std::exp(-nd * x + km1 * (1.0 + std::log(nd * x / km1)));
  }
  const auto objective = [&](double t) {
    return -t * x + km1 * log_mgf_sum(t, n);
  };
  const double t_star = nd - km1 / x;
  if (variant == AgrawalVariant::kM2) return std::exp(objective(t_star));
  const double best = std::min(chernoff_min(objective, nd * (1.0 - 1e-12)),
                               objective(t_star));
  return std::exp(best);
}

double sigma_mnx(std::int64_t m, std::int64_t n, int k, double beta,
                 double x) {
  const double c = beta * static_cast<double>(k - 1) / x;
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  return 0.5 * (nd + md) - c - std::hypot(c, 0.5 * (md - nd));
}

double twosample_bound(double x, std::int64_t n, std::int64_t m, int k,
                       double beta, TwoSampleVariant variant) {
  if (n < 1 || m < 1 || k < 2) {
    throw std::invalid_argument("twosample_bound: n, m >= 1 and k >= 2 required");
  }
  if (!(beta > 0.0)) {
    throw std::invalid_argument("twosample_bound: beta must be positive");
  }
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double km1 = static_cast<double>(k - 1);
  const double floor = beta * km1 * (md + nd) / (md * nd);
  if (!(x >= floor * (1.0 - 1e-12))) {
    throw ValidityError("twosample_bound: requires x >= beta (k-1)(m+n)/(mn)");
  }
  if (variant == TwoSampleVariant::kT1) {
    const auto objective = [&](double s) {
      return -s * x / beta + km1 * (log_mgf_sum(s, m) + log_mgf_sum(s, n));
    };
    const double hi = static_cast<double>(std::min(m, n)) * (1.0 - 1e-12);
    const double sigma = std::clamp(sigma_mnx(m, n, k, beta, x), 0.0, hi);
    return std::exp(std::min(chernoff_min(objective, hi), objective(sigma)));
  }
  const double sigma = sigma_mnx(m, n, k, beta, x);
  if (variant == TwoSampleVariant::kT2) {
    return std::exp(-sigma * x / beta +
                    km1 * (log_mgf_sum(sigma, m) + log_mgf_sum(sigma, n)));
  }
  return std::exp(-sigma * x / beta +
                  (1.0 - static_cast<double>(k)) *
                      (std::log1p(-sigma / md) + std::log1p(-sigma / nd)));
}

double bound_tail(double x, const BoundSpec& spec) {
  switch (spec.family) {
    case BoundFamily::kAsymptotic1:
      return 1.0 - numerics::chi2_cdf(2.0 * static_cast<double>(spec.n) * x,
                                      spec.k - 1);
    case BoundFamily::kAsymptotic2: {
      const double nd = static_cast<double>(spec.n);
      const double md = static_cast<double>(spec.m_or_n());
      return 1.0 -
             numerics::chi2_cdf(2.0 * nd * md / (nd + md) * x, spec.k - 1);
    }
    case BoundFamily::kBeEnvelope: {
      if (!spec.p) throw std::invalid_argument("be_envelope needs p");
      const Envelope env =
          be_envelope(2.0 * static_cast<double>(spec.n) * x, spec.n, *spec.p);
      return 1.0 - env.lower;
    }
    case BoundFamily::kBe2Quadratic: {
      if (!spec.p) throw std::invalid_argument("be2_quadratic needs p");
      const double nd = static_cast<double>(spec.n);
      const double md = static_cast<double>(spec.m_or_n());
      const double stat_scale = 2.0 * nd * md / (nd + md) * x;
      const double tail = 1.0 - numerics::chi2_cdf(stat_scale, spec.k - 1) +
                          be2_quadratic_error(spec.n, spec.m_or_n(), *spec.p);
      return std::min(1.0, tail);
    }
    case BoundFamily::kSanovBinom:
      return sanov_bound(x, spec.n, spec.k, SanovVariant::kBinom);
    case BoundFamily::kSanovSimple:
      return sanov_bound(x, spec.n, spec.k, SanovVariant::kSimple);
    case BoundFamily::kMardia:
      return mardia_bound(x, spec.n, spec.k);
    case BoundFamily::kAgrawal1:
      return agrawal_bound(x, spec.n, spec.k, AgrawalVariant::kM1);
    case BoundFamily::kAgrawal2:
      return agrawal_bound(x, spec.n, spec.k, AgrawalVariant::kM2);
    case BoundFamily::kAgrawal3:
      return agrawal_bound(x, spec.n, spec.k, AgrawalVariant::kM3);
    case BoundFamily::kTwoSample1:
      return twosample_bound(x, spec.n, spec.m_or_n(), spec.k, spec.beta,
                             TwoSampleVariant::kT1);
    case BoundFamily::kTwoSample2:
      return twosample_bound(x, spec.n, spec.m_or_n(), spec.k, spec.beta,
                             TwoSampleVariant::kT2);
    case BoundFamily::kTwoSample3:
      return twosample_bound(x, spec.n, spec.m_or_n(), spec.k, spec.beta,
                             TwoSampleVariant::kT3);
  }
  throw std::invalid_argument("bound_tail: unknown family");
}

double bound_quantile(double alpha, const BoundSpec& spec) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("bound_quantile: alpha must be in (0,1)");
  }
  if (spec.family == BoundFamily::kAsymptotic1) {
    return asymptotic_threshold(alpha, spec.k, spec.n);
  }
  if (spec.family == BoundFamily::kAsymptotic2) {
    return asymptotic_threshold(alpha, spec.k, spec.n, spec.m_or_n());
  }

  constexpr double kCap = 1e3;  // nats
  double lo = validity_floor(spec);
  lo += 1e-12 * std::max(1.0, lo);
  if (bound_tail(lo, spec) <= alpha) return lo;

  double hi = std::max(2.0 * lo, 1e-6);
  while (bound_tail(hi, spec) > alpha) {
    lo = hi;
    hi *= 2.0;
    if (hi > kCap) {
      throw ValidityError("bound_quantile: level unreachable on the domain");
    }
  }
  while ((hi - lo) > 1e-10 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (bound_tail(mid, spec) > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace entropy_cpd::bounds
