#include "entropy_cpd/divergence.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "entropy_cpd/errors.hpp"

namespace entropy_cpd::divergence {

namespace {

void check_same_k(const CategoricalDistribution& p,
                  const CategoricalDistribution& q) {
  if (p.k() != q.k()) {
    throw std::invalid_argument("divergence: dimension mismatch");
  }
}

}  // namespace

double shannon_entropy(const CategoricalDistribution& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.probs.size(); ++i) {
    const double pi = p.probs[i];
    if (pi > 0.0) h -= pi * std::log(pi);
  }
  return std::max(0.0, h);
}

DivergenceValue relative_entropy(const CategoricalDistribution& p,
                                 const CategoricalDistribution& q) {
  check_same_k(p, q);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.probs.size(); ++i) {
    const double pi = p.probs[i];
    if (pi <= 0.0) continue;
    const double qi = q.probs[i];
    if (qi <= 0.0) {
      return {std::numeric_limits<double>::infinity(), false};
    }
    sum += pi * std::log(pi / qi);
  }
  return {std::max(0.0, sum), true};
}

double l1_distance(const CategoricalDistribution& p,
                   const CategoricalDistribution& q) {
  check_same_k(p, q);
  return (p.probs - q.probs).abs().sum();
}

double reverse_pinsker_coefficient(const CategoricalDistribution& p,
                                   const CategoricalDistribution& q) {
  check_same_k(p, q);
  const double min_q = q.probs.minCoeff();
  if (!(min_q > 0.0)) {
    throw ValidityError("reverse_pinsker_coefficient: zero reference probability");
  }
  const double min_ratio = (p.probs / q.probs).minCoeff();
  return 2.0 / min_q - 2.0 * min_ratio;
}

double triangle_surrogate_bound(const CategoricalDistribution& p,
                                const CategoricalDistribution& q,
                                const CategoricalDistribution& r) {
  const double beta = reverse_pinsker_coefficient(p, q);
  const DivergenceValue pr = relative_entropy(p, r);
  const DivergenceValue qr = relative_entropy(q, r);
  if (!pr.finite || !qr.finite) {
    return std::numeric_limits<double>::infinity();
  }
  return beta * (pr.value + qr.value);
}

}  // namespace entropy_cpd::divergence
