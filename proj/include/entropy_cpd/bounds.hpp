#pragma once

#include <optional>
#include <string>

#include "entropy_cpd/categorical.hpp"

namespace entropy_cpd::bounds {

using categorical::CategoricalDistribution;

enum class BoundFamily {
  kAsymptotic1,
  kAsymptotic2,
  kBeEnvelope,
  kBe2Quadratic,
  kSanovBinom,
  kSanovSimple,
  kMardia,
  kAgrawal1,
  kAgrawal2,
  kAgrawal3,
  kTwoSample1,
  kTwoSample2,
  kTwoSample3,
};

enum class BetaMode { kReversePinsker, kUnit };

BoundFamily parse_family(const std::string& tag);
std::string family_tag(BoundFamily family);
bool is_two_sample(BoundFamily family);

// Scale convention: the concentration families and bound_quantile work on
// x in raw relative-entropy nats. be_envelope / kappa work on the 2nD
// scale of the one-sample CLT. The CLI normalizes to raw nats and
// converts internally.
struct BoundSpec {
  BoundFamily family = BoundFamily::kAsymptotic2;
  std::int64_t n = 0;
  std::int64_t m = 0;  // two-sample only; defaults to n when 0
  int k = 0;
  double beta = 1.0;  // resolved beta for the two-sample families
  BetaMode beta_mode = BetaMode::kUnit;
  std::optional<CategoricalDistribution> p;  // be_envelope / be2_quadratic

  std::int64_t m_or_n() const { return m > 0 ? m : n; }
};

struct Envelope {
  double lower = 0.0;
  double upper = 1.0;
};

enum class KappaDirection { kUp, kDown };

// Threshold on relative entropy (nats) from the chi-squared limit law:
// one-sample chi2_{k-1,1-alpha}/(2n); two-sample * (n+m)/(2nm).
double asymptotic_threshold(double alpha, int k, std::int64_t n,
                            std::optional<std::int64_t> m = std::nullopt);

// Uniform Berry-Esseen error term E_{n,k}:
// (42(k-1)^{1/4} + 16) sum_i (1-p_i)^{3/2} / (n p_i)^{1/2}.
double be_error_term(std::int64_t n, const CategoricalDistribution& p);

// Corrected CDF argument absorbing the error of the quadratic
// approximation: square of the smallest positive root of
// a w^3 + w^2 - x = 0 with a = -(mu n)^{-1/2} (up), +(mu n)^{-1/2}
// (down). Returns +inf when no positive root exists (min over the empty
// set). x is on the 2nD scale.
double kappa(double x, std::int64_t n, double mu, KappaDirection direction);

// Envelope of P(2n D <= x), clamped to [0, 1]; vacuous (it may be [0,1])
// when E_{n,k} >= 1 rather than an error.
Envelope be_envelope(double x, std::int64_t n,
                     const CategoricalDistribution& p);

// Kolmogorov bound for the two-sample quadratic statistic:
// (n^2 + m^2) / ((nm)^{1/2} (n+m)) * E_{n+m,k}.
double be2_quadratic_error(std::int64_t n, std::int64_t m,
                           const CategoricalDistribution& p);

enum class SanovVariant { kBinom, kSimple };

// Sanov tail bounds on P(D >= x): C(n+k-1, k-1) e^{-nx} and (n+1)^k e^{-nx}.
double sanov_bound(double x, std::int64_t n, int k, SanovVariant variant);

// (6e^2 / pi^{3/2}) (n e^3 / (2 pi k))^{k/2} e^{-nx};
// valid for 3 <= k <= 2 + sqrt(n e^3 / (2 pi)).
double mardia_bound(double x, std::int64_t n, int k);

enum class AgrawalVariant { kM1, kM2, kM3 };

// Moment-generating-function bounds, valid for x > (k-1)/n.
// m3 = e^{-nx} (e n x / (k-1))^{k-1}; m2 evaluates the exact truncated
// MGF bound at t* = n - (k-1)/x; m1 minimizes the Chernoff objective
// numerically. m1 <= m2 <= m3.
double agrawal_bound(double x, std::int64_t n, int k, AgrawalVariant variant);

// Optimal Chernoff parameter of the two-sample bound; lies in [0, min(m,n)).
double sigma_mnx(std::int64_t m, std::int64_t n, int k, double beta, double x);

enum class TwoSampleVariant { kT1, kT2, kT3 };

// Two-sample concentration bounds on P(D(p_hat || q_hat) >= x), valid for
// x >= beta (k-1)(m+n)/(mn). beta is either the reverse-Pinsker
// coefficient of the two empirical laws or 1 (the conjectured starred
// variants).
double twosample_bound(double x, std::int64_t n, std::int64_t m, int k,
                       double beta, TwoSampleVariant variant);

// Upper bound on P(D >= x) for any family, x in raw nats.
double bound_tail(double x, const BoundSpec& spec);

// Smallest x (1e-10 relative) with bound_tail(x) <= alpha, by bisection
// on the family's validity domain. Throws ValidityError when the level
// is unreachable.
double bound_quantile(double alpha, const BoundSpec& spec);

}  // namespace entropy_cpd::bounds
