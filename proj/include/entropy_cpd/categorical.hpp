#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "entropy_cpd/io.hpp"
#include "entropy_cpd/rng.hpp"

namespace entropy_cpd::categorical {

// A length-k probability vector. count = 0 marks a theoretical law;
// count = n > 0 marks an empirical one whose entries are multiples of 1/n.
struct CategoricalDistribution {
  Eigen::ArrayXd probs;
  std::int64_t count = 0;

  int k() const { return static_cast<int>(probs.size()); }
};

// Ordered cut-points splitting the real line into k categories. A value
// equal to a cut goes to the lower bin.
struct BinningScheme {
  std::vector<double> cuts;
  int k = 0;
};

struct SignTripleEncoding {
  bool merge = false;  // false: 8 raw triples; true: 6 merged classes

  int categories() const { return merge ? 6 : 8; }
};

enum class AggregationRule { kDaily, kWeekly };

// Cuts at the empirical quantiles j/k, linear interpolation of order
// statistics. Throws DataError when the data admit fewer than k
// distinct categories.
BinningScheme quantile_bins(std::span<const double> data, int k);

std::vector<int> discretize(std::span<const double> data,
                            const BinningScheme& bins);

CategoricalDistribution empirical_distribution(std::span<const int> labels,
                                               int k);

// Empirical law from per-category counts (count = sum of counts).
CategoricalDistribution from_counts(const Eigen::ArrayXd& counts);

// Ranked-exponential family: probs[i-1] proportional to exp(-phi * i),
// i = 1..k. phi = 0 is uniform. Computed in the log domain.
CategoricalDistribution ranked_exponential(double phi, int k);

std::vector<int> sample_categorical(const CategoricalDistribution& dist,
                                    std::int64_t n, rng::RandomStream& stream);

// Increment signs (> 0 maps to 1, otherwise 0) encoded as overlapping
// windows of three consecutive indicators. Output length is N - 3.
std::vector<int> encode_sign_triples(std::span<const double> series,
                                     SignTripleEncoding enc);

// Arithmetic mean per calendar bucket (day or ISO week). Timestamps must
// be sorted ascending. Bucket timestamps are the day, resp. the week's
// Monday, at midnight.
std::pair<std::vector<io::Timestamp>, std::vector<double>> aggregate_series(
    std::span<const io::Timestamp> timestamps, std::span<const double> values,
    AggregationRule rule);

}  // namespace entropy_cpd::categorical
