#pragma once

#include <Eigen/Dense>

#include "entropy_cpd/categorical.hpp"

namespace entropy_cpd::divergence {

using categorical::CategoricalDistribution;

// Relative entropy in nats; finite == false iff some p_i > 0 has q_i = 0.
struct DivergenceValue {
  double value = 0.0;
  bool finite = true;
};

// -sum p_i ln p_i with the 0 ln 0 = 0 convention; in [0, ln k].
double shannon_entropy(const CategoricalDistribution& p);

// sum over {p_i > 0} of p_i ln(p_i / q_i); +inf iff p puts mass where q
// has none; clamped at 0 against rounding for p ~ q.
DivergenceValue relative_entropy(const CategoricalDistribution& p,
                                 const CategoricalDistribution& q);

double l1_distance(const CategoricalDistribution& p,
                   const CategoricalDistribution& q);

// beta = 2 / min_i q_i - 2 min_i (p_i / q_i); at least 2(k-1). Requires
// full-support q.
double reverse_pinsker_coefficient(const CategoricalDistribution& p,
                                   const CategoricalDistribution& q);

// beta(p, q) * (D(p||r) + D(q||r)), an upper bound on D(p||q). The
// arguments of each divergence on the right-hand side may be exchanged
// and the inequality still holds; only this orientation is exposed.
double triangle_surrogate_bound(const CategoricalDistribution& p,
                                const CategoricalDistribution& q,
                                const CategoricalDistribution& r);

}  // namespace entropy_cpd::divergence
