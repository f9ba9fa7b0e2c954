#include <doctest.h>

#include <cmath>

#include "entropy_cpd/divergence.hpp"
#include "entropy_cpd/errors.hpp"
#include "entropy_cpd/rng.hpp"

using namespace entropy_cpd;
using namespace entropy_cpd::divergence;

namespace {

CategoricalDistribution make(std::initializer_list<double> probs) {
  CategoricalDistribution d;
  d.probs = Eigen::ArrayXd(static_cast<Eigen::Index>(probs.size()));
  Eigen::Index i = 0;
  for (double p : probs) d.probs[i++] = p;
  return d;
}

// uniform point on the simplex with a support floor
CategoricalDistribution random_simplex(rng::RandomStream& stream, int k,
                                       double floor = 0.0) {
  CategoricalDistribution d;
  d.probs = Eigen::ArrayXd(k);
  for (;;) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      d.probs[i] = -std::log(1.0 - stream.uniform01());
      sum += d.probs[i];
    }
    d.probs /= sum;
    if (d.probs.minCoeff() >= floor) return d;
  }
}

}  // namespace

TEST_SUITE_BEGIN("divergence");

TEST_CASE("shannon entropy reference values") {
  CHECK(shannon_entropy(make({0.25, 0.25, 0.25, 0.25})) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(shannon_entropy(make({1.0, 0.0, 0.0})) == 0.0);
  CHECK(shannon_entropy(make({0.5, 0.25, 0.25})) ==
        doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("relative entropy reference values") {
  const auto p = make({0.5, 0.5});
  CHECK(relative_entropy(p, p).value == 0.0);
  CHECK(relative_entropy(p, p).finite);

  const auto d = relative_entropy(p, make({0.25, 0.75}));
  CHECK(d.finite);
  CHECK(d.value == doctest::Approx(0.5 * std::log(4.0 / 3.0)).epsilon(1e-12));
  CHECK(d.value == doctest::Approx(0.1438410).epsilon(1e-6));

  const auto inf = relative_entropy(p, make({1.0, 0.0}));
  CHECK(!inf.finite);
  CHECK(std::isinf(inf.value));

  CHECK_THROWS_AS(relative_entropy(p, make({0.2, 0.3, 0.5})),
                  std::invalid_argument);
}

TEST_CASE("relative entropy against uniform equals ln k - H(p)") {
  rng::RandomStream stream(31, "divergence", 0);
  const auto uniform = make({0.25, 0.25, 0.25, 0.25});
  for (int i = 0; i < 200; ++i) {
    const auto p = random_simplex(stream, 4);
    const auto d = relative_entropy(p, uniform);
    CHECK(std::abs(d.value - (std::log(4.0) - shannon_entropy(p))) < 1e-12);
  }
}

TEST_CASE("l1 distance") {
  const auto p = make({0.5, 0.5});
  CHECK(l1_distance(p, p) == 0.0);
  CHECK(l1_distance(make({1.0, 0.0}), make({0.0, 1.0})) == doctest::Approx(2.0));
  CHECK(l1_distance(p, make({0.25, 0.75})) == doctest::Approx(0.5));
}

TEST_CASE("reverse-Pinsker coefficient reference values") {
  const auto uniform = make({0.25, 0.25, 0.25, 0.25});
  CHECK(reverse_pinsker_coefficient(uniform, uniform) == doctest::Approx(6.0));

  CHECK(reverse_pinsker_coefficient(make({0.5, 0.5}), make({0.25, 0.75})) ==
        doctest::Approx(8.0 - 4.0 / 3.0).epsilon(1e-12));

  const auto q = make({0.1, 0.9});
  CHECK(reverse_pinsker_coefficient(q, q) == doctest::Approx(18.0));

  CHECK_THROWS_AS(
      reverse_pinsker_coefficient(make({0.5, 0.5}), make({1.0, 0.0})),
      ValidityError);
}

TEST_CASE("beta is at least 2(k-1)") {
  rng::RandomStream stream(32, "divergence", 1);
  for (int k : {2, 3, 4, 6, 8}) {
    for (int i = 0; i < 400; ++i) {
      const auto p = random_simplex(stream, k, 1e-4);
      const auto q = random_simplex(stream, k, 1e-4);
      CHECK(reverse_pinsker_coefficient(p, q) >= 2.0 * (k - 1) - 1e-9);
    }
  }
}

TEST_CASE("Pinsker sandwich on random simplex pairs") {
  rng::RandomStream stream(33, "divergence", 2);
  for (int i = 0; i < 1500; ++i) {
    const int k = 2 + static_cast<int>(stream.uniform01() * 5.0);
    const auto p = random_simplex(stream, k, 1e-3);
    const auto q = random_simplex(stream, k, 1e-3);
    const double l1 = l1_distance(p, q);
    const double d = relative_entropy(p, q).value;
    const double coeff = 1.0 / q.probs.minCoeff() -
                         (p.probs / q.probs).minCoeff();
    CHECK(l1 * l1 <= 2.0 * d + 1e-12);
    CHECK(2.0 * d <= coeff * l1 * l1 + 1e-12);
  }
}

TEST_CASE("relative entropy is jointly convex") {
  rng::RandomStream stream(34, "divergence", 3);
  for (int i = 0; i < 800; ++i) {
    const auto p1 = random_simplex(stream, 4, 1e-3);
    const auto p2 = random_simplex(stream, 4, 1e-3);
    const auto q1 = random_simplex(stream, 4, 1e-3);
    const auto q2 = random_simplex(stream, 4, 1e-3);
    const double lambda = stream.uniform01();
    CategoricalDistribution pm, qm;
    pm.probs = lambda * p1.probs + (1.0 - lambda) * p2.probs;
    qm.probs = lambda * q1.probs + (1.0 - lambda) * q2.probs;
    const double lhs = relative_entropy(pm, qm).value;
    const double rhs = lambda * relative_entropy(p1, q1).value +
                       (1.0 - lambda) * relative_entropy(p2, q2).value;
    CHECK(lhs <= rhs + 1e-10);
  }
}

TEST_CASE("triangle surrogate reference cases") {
  const auto u = make({0.25, 0.25, 0.25, 0.25});
  CHECK(triangle_surrogate_bound(u, u, u) == 0.0);

  // r = p reduces the bound to beta * D(q || p)
  rng::RandomStream stream(35, "divergence", 4);
  for (int i = 0; i < 300; ++i) {
    const auto p = random_simplex(stream, 4, 1e-3);
    const auto q = random_simplex(stream, 4, 1e-3);
    const double direct = reverse_pinsker_coefficient(p, q) *
                          relative_entropy(q, p).value;
    CHECK(triangle_surrogate_bound(p, q, p) ==
          doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("triangle surrogate dominates the divergence") {
  rng::RandomStream stream(36, "divergence", 5);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_simplex(stream, 4, 1e-3);
    const auto q = random_simplex(stream, 4, 1e-3);
    const auto r = random_simplex(stream, 4, 1e-3);
    const double bound = triangle_surrogate_bound(p, q, r);
    CHECK(relative_entropy(p, q).value <= bound + 1e-10);
  }
}

TEST_SUITE_END();
