#include "entropy_cpd/categorical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "entropy_cpd/errors.hpp"

namespace entropy_cpd::categorical {

BinningScheme quantile_bins(std::span<const double> data, int k) {
  if (k < 2) throw std::invalid_argument("quantile_bins: k must be >= 2");
  if (data.empty()) throw DataError("quantile_bins: empty data");

  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());

  std::size_t n_distinct = 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] != sorted[i - 1]) ++n_distinct;
  }
  if (n_distinct < static_cast<std::size_t>(k)) {
    throw DataError("quantile_bins: fewer than k distinct values");
  }

  BinningScheme out;
  out.k = k;
  const double n1 = static_cast<double>(sorted.size() - 1);
  for (int j = 1; j < k; ++j) {
    const double pos = n1 * static_cast<double>(j) / static_cast<double>(k);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - std::floor(pos);
    const double q = lo + 1 < sorted.size()
                         ? sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
                         : sorted[lo];
    out.cuts.push_back(q);
  }
  for (std::size_t i = 1; i < out.cuts.size(); ++i) {
    if (!(out.cuts[i] > out.cuts[i - 1])) {
      throw DataError("quantile_bins: degenerate data (colliding quantiles)");
    }
  }
  return out;
}

std::vector<int> discretize(std::span<const double> data,
                            const BinningScheme& bins) {
  std::vector<int> out;
  out.reserve(data.size());
  for (double v : data) {
    const auto it = std::lower_bound(bins.cuts.begin(), bins.cuts.end(), v);
    out.push_back(static_cast<int>(it - bins.cuts.begin()));
  }
  return out;
}

CategoricalDistribution empirical_distribution(std::span<const int> labels,
                                               int k) {
  if (k < 2) throw std::invalid_argument("empirical_distribution: k must be >= 2");
  if (labels.empty()) throw DataError("empirical_distribution: empty labels");
  Eigen::ArrayXd counts = Eigen::ArrayXd::Zero(k);
  for (int label : labels) {
    if (label < 0 || label >= k) {
      throw DataError("empirical_distribution: label out of range");
    }
    counts[label] += 1.0;
  }
  CategoricalDistribution out;
  out.count = static_cast<std::int64_t>(labels.size());
  out.probs = counts / static_cast<double>(out.count);
  return out;
}

CategoricalDistribution from_counts(const Eigen::ArrayXd& counts) {
  const double total = counts.sum();
  if (!(total > 0.0)) throw DataError("from_counts: empty counts");
  CategoricalDistribution out;
  out.count = static_cast<std::int64_t>(std::llround(total));
  out.probs = counts / total;
  return out;
}

CategoricalDistribution ranked_exponential(double phi, int k) {
  if (k < 2) throw std::invalid_argument("ranked_exponential: k must be >= 2");
  Eigen::ArrayXd logw(k);
  for (int i = 0; i < k; ++i) logw[i] = -phi * static_cast<double>(i + 1);
  const double mx = logw.maxCoeff();
  const Eigen::ArrayXd w = (logw - mx).exp();
  CategoricalDistribution out;
  out.probs = w / w.sum();
  out.count = 0;
  return out;
}

std::vector<int> sample_categorical(const CategoricalDistribution& dist,
                                    std::int64_t n,
                                    rng::RandomStream& stream) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    out.push_back(stream.categorical(dist.probs));
  }
  return out;
}

std::vector<int> encode_sign_triples(std::span<const double> series,
                                     SignTripleEncoding enc) {
  if (series.size() < 4) {
    throw DataError("encode_sign_triples: series must have length >= 4");
  }
  std::vector<int> indicators;
  indicators.reserve(series.size() - 1);
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    indicators.push_back(series[i + 1] - series[i] > 0.0 ? 1 : 0);
  }
  // merged classes: 0 = trend (000,111), 1 = alternation (010,101),
  // then the remaining triples {001,011,100,110} in ascending binary order
  static constexpr int kMerged[8] = {0, 2, 1, 3, 4, 1, 5, 0};
  std::vector<int> out;
  out.reserve(indicators.size() - 2);
  for (std::size_t i = 0; i + 2 < indicators.size(); ++i) {
    const int code =
        4 * indicators[i] + 2 * indicators[i + 1] + indicators[i + 2];
    out.push_back(enc.merge ? kMerged[code] : code);
  }
  return out;
}

std::pair<std::vector<io::Timestamp>, std::vector<double>> aggregate_series(
    std::span<const io::Timestamp> timestamps, std::span<const double> values,
    AggregationRule rule) {
  if (timestamps.size() != values.size()) {
    throw std::invalid_argument("aggregate_series: size mismatch");
  }
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (timestamps[i] < timestamps[i - 1]) {
      throw DataError("aggregate_series: timestamps not sorted");
    }
  }
  std::vector<io::Timestamp> out_ts;
  std::vector<double> out_vals;
  double sum = 0.0;
  std::int64_t count = 0;
  std::int64_t current = 0;
  auto bucket_of = [rule](const io::Timestamp& ts) {
    return rule == AggregationRule::kDaily ? ts.days
                                           : io::iso_week_monday(ts.days);
  };
  auto flush = [&]() {
    if (count > 0) {
      out_ts.push_back({current, 0});
      out_vals.push_back(sum / static_cast<double>(count));
    }
    sum = 0.0;
    count = 0;
  };
  for (std::size_t i = 0; i < timestamps.size(); ++i) {
    const std::int64_t b = bucket_of(timestamps[i]);
    if (count > 0 && b != current) flush();
    current = b;
    sum += values[i];
    ++count;
  }
  flush();
  return {std::move(out_ts), std::move(out_vals)};
}

}  // namespace entropy_cpd::categorical
