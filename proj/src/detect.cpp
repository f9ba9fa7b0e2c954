#include "entropy_cpd/detect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "entropy_cpd/divergence.hpp"
#include "entropy_cpd/errors.hpp"
#include "entropy_cpd/numerics.hpp"
#include "entropy_cpd/version.hpp"

namespace entropy_cpd::detect {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sample_mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_var(std::span<const double> x, double mean) {
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size() - 1);
}

struct ScanMethodSpec {
  std::string tag;            // as given, e.g. "twosample3:rp"
  bool aic = false;
  bool reverse_pinsker = false;
  bounds::BoundFamily family = bounds::BoundFamily::kAsymptotic2;

  // reverse-Pinsker betas and the envelope families depend on the
  // reference window, so their thresholds are evaluated per position
  bool position_dependent() const {
    return !aic &&
           (reverse_pinsker ||
            family == bounds::BoundFamily::kBeEnvelope ||
            family == bounds::BoundFamily::kBe2Quadratic);
  }
};

ScanMethodSpec parse_scan_method(const std::string& tag) {
  ScanMethodSpec spec;
  spec.tag = tag;
  if (tag == "aic") {
    spec.aic = true;
    return spec;
  }
  std::string base = tag;
  if (const auto pos = tag.rfind(":rp"); pos != std::string::npos &&
                                         pos + 3 == tag.size()) {
    base = tag.substr(0, pos);
    spec.reverse_pinsker = true;
  }
  spec.family = bounds::parse_family(base);
  if (spec.reverse_pinsker && !bounds::is_two_sample(spec.family)) {
    throw std::invalid_argument("scan method '" + tag +
                                "': :rp only applies to two-sample families");
  }
  return spec;
}

void run_partitioned(std::int64_t jobs, int threads,
                     const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (threads <= 1 || jobs < 2) {
    fn(0, jobs);
    return;
  }
  const int used = static_cast<int>(
      std::min<std::int64_t>(threads, jobs));
  std::vector<std::thread> pool;
  pool.reserve(used);
  const std::int64_t chunk = (jobs + used - 1) / used;
  for (int t = 0; t < used; ++t) {
    const std::int64_t begin = t * chunk;
    const std::int64_t end = std::min(jobs, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(fn, begin, end);
  }
  for (auto& th : pool) th.join();
}

}  // namespace

TestResult re_test_distributions(const CategoricalDistribution& reference,
                                 const CategoricalDistribution& recent,
                                 BoundSpec method, double alpha) {
  const auto div = divergence::relative_entropy(recent, reference);

  TestResult result;
  result.method = bounds::family_tag(method.family);
  result.alpha = alpha;
  result.statistic = div.value;
  result.infinite = !div.finite;

  method.k = reference.k();
  if (method.n == 0) method.n = recent.count;
  if (method.m == 0) method.m = reference.count;

  const bool needs_beta = method.family == bounds::BoundFamily::kTwoSample1 ||
                          method.family == bounds::BoundFamily::kTwoSample2 ||
                          method.family == bounds::BoundFamily::kTwoSample3;
  const bool needs_p = method.family == bounds::BoundFamily::kBeEnvelope ||
                       method.family == bounds::BoundFamily::kBe2Quadratic;
  const bool rp = needs_beta &&
                  method.beta_mode == bounds::BetaMode::kReversePinsker;
  if (rp) result.method += ":rp";
  if ((rp || (needs_p && !method.p)) &&
      !(reference.probs.minCoeff() > 0.0)) {
    if (result.infinite) {
      // divergent statistic: reject regardless, no threshold computable
      result.threshold = kNaN;
      result.reject = true;
      return result;
    }
    throw ValidityError(
        "re_test: zero reference probability, method threshold undefined");
  }
  if (rp) {
    method.beta = divergence::reverse_pinsker_coefficient(recent, reference);
  } else if (needs_beta) {
    method.beta = 1.0;
  }
  if (needs_p && !method.p) method.p = reference;

  result.threshold = bounds::bound_quantile(alpha, method);
  result.reject = result.statistic > result.threshold;
  return result;
}

TestResult re_test(std::span<const int> first, std::span<const int> second,
                   int k, BoundSpec method, double alpha) {
  const auto q_hat = categorical::empirical_distribution(first, k);
  const auto p_hat = categorical::empirical_distribution(second, k);
  return re_test_distributions(q_hat, p_hat, method, alpha);
}

TestResult t_test_moments(double mean_x, double var_x, std::int64_t n_x,
                          double mean_y, double var_y, std::int64_t n_y,
                          double alpha) {
  if (n_x < 2 || n_y < 2) {
    throw std::invalid_argument("t_test: each sample needs length >= 2");
  }
  const double sx = var_x / static_cast<double>(n_x);
  const double sy = var_y / static_cast<double>(n_y);
  const double se2 = sx + sy;
  if (!(se2 > 0.0)) {
    throw ValidityError("t_test: zero variance in both samples");
  }
  const double dof =
      se2 * se2 / (sx * sx / static_cast<double>(n_x - 1) +
                   sy * sy / static_cast<double>(n_y - 1));
  TestResult result;
  result.method = "t_test";
  result.alpha = alpha;
  result.statistic = std::abs(mean_x - mean_y) / std::sqrt(se2);
  result.threshold = numerics::student_t_quantile(1.0 - alpha / 2.0, dof);
  result.reject = result.statistic > result.threshold;
  return result;
}

TestResult t_test(std::span<const double> x, std::span<const double> y,
                  double alpha) {
  if (x.size() < 2 || y.size() < 2) {
    throw std::invalid_argument("t_test: each sample needs length >= 2");
  }
  const double mx = sample_mean(x);
  const double my = sample_mean(y);
  return t_test_moments(mx, sample_var(x, mx), x.size(), my,
                        sample_var(y, my), y.size(), alpha);
}

TestResult f_test_moments(double var_x, std::int64_t n_x, double var_y,
                          std::int64_t n_y, double alpha) {
  if (n_x < 2 || n_y < 2) {
    throw std::invalid_argument("f_test: each sample needs length >= 2");
  }
  if (!(var_x > 0.0) || !(var_y > 0.0)) {
    throw ValidityError("f_test: zero variance");
  }
  const double ratio = var_x / var_y;
  const double cdf = numerics::f_cdf(ratio, static_cast<double>(n_x - 1),
                                     static_cast<double>(n_y - 1));
  TestResult result;
  result.method = "f_test";
  result.alpha = alpha;
  result.statistic = std::max(cdf, 1.0 - cdf);  // folded two-sided position
  result.threshold = 1.0 - alpha / 2.0;
  result.reject = result.statistic > result.threshold;
  return result;
}

TestResult f_test(std::span<const double> x, std::span<const double> y,
                  double alpha) {
  if (x.size() < 2 || y.size() < 2) {
    throw std::invalid_argument("f_test: each sample needs length >= 2");
  }
  const double mx = sample_mean(x);
  const double my = sample_mean(y);
  return f_test_moments(sample_var(x, mx), x.size(), sample_var(y, my),
                        y.size(), alpha);
}

std::pair<double, bool> delta_aic(const CategoricalDistribution& p_hat,
                                  const CategoricalDistribution& q_hat) {
  if (p_hat.k() != q_hat.k()) {
    throw std::invalid_argument("delta_aic: dimension mismatch");
  }
  if (p_hat.count <= 0 || p_hat.count != q_hat.count) {
    throw std::invalid_argument("delta_aic: counts must match and be positive");
  }
  const double n = static_cast<double>(p_hat.count);
  double ell1 = 0.0;
  double ell0 = 0.0;
  for (Eigen::Index i = 0; i < p_hat.probs.size(); ++i) {
    const double pi = p_hat.probs[i];
    const double qi = q_hat.probs[i];
    if (pi > 0.0) ell1 += pi * std::log(pi);
    if (qi > 0.0) ell1 += qi * std::log(qi);
    const double avg = 0.5 * (pi + qi);
    if (avg > 0.0) ell0 += (pi + qi) * std::log(avg);
  }
  ell1 *= n;
  ell0 *= n;
  const double value =
      -2.0 * static_cast<double>(p_hat.k() - 1) - 2.0 * (ell0 - ell1);
  return {value, value > 0.0};
}

double aic_equivalent_threshold(int k, std::int64_t n) {
  if (k < 2) throw std::invalid_argument("aic_equivalent_threshold: k >= 2");
  if (n < 1) throw std::invalid_argument("aic_equivalent_threshold: n >= 1");
  return 2.0 * static_cast<double>(k - 1) / static_cast<double>(n);
}

ScanResult rolling_scan_labels(std::span<const int> labels,
                               std::span<const io::Timestamp> timestamps,
                               const ScanConfig& config) {
  const std::int64_t w = config.window;
  const std::int64_t n_labels = static_cast<std::int64_t>(labels.size());
  if (w < 1) throw std::invalid_argument("rolling_scan: window must be >= 1");
  if (n_labels < 2 * w) {
    throw DataError("rolling_scan: series too short for two windows");
  }
  const int k = config.k;

  // prefix counts; window counts in O(k) per position
  std::vector<std::vector<std::int64_t>> prefix(
      k, std::vector<std::int64_t>(n_labels + 1, 0));
  for (std::int64_t i = 0; i < n_labels; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= k) {
      throw DataError("rolling_scan: label out of range");
    }
    for (int c = 0; c < k; ++c) {
      prefix[c][i + 1] = prefix[c][i] + (c == label ? 1 : 0);
    }
  }
  auto window_counts = [&](std::int64_t begin, std::int64_t end) {
    Eigen::ArrayXd counts(k);
    for (int c = 0; c < k; ++c) {
      counts[c] = static_cast<double>(prefix[c][end] - prefix[c][begin]);
    }
    return counts;
  };

  std::vector<ScanMethodSpec> methods;
  for (const auto& tag : config.methods) {
    methods.push_back(parse_scan_method(tag));
  }

  // fixed thresholds, one per method (n = m = window)
  std::vector<double> fixed(methods.size(), kNaN);
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const auto& m = methods[i];
    if (m.aic) {
      fixed[i] = aic_equivalent_threshold(k, w);
    } else if (!m.position_dependent()) {
      BoundSpec spec;
      spec.family = m.family;
      spec.n = w;
      spec.m = w;
      spec.k = k;
      spec.beta = 1.0;
      fixed[i] = bounds::bound_quantile(config.alpha, spec);
    }
  }

  std::vector<std::int64_t> positions;
  for (std::int64_t t = 2 * w; t <= n_labels; t += config.step) {
    positions.push_back(t);
  }
  const std::int64_t n_pos = static_cast<std::int64_t>(positions.size());

  ScanResult result;
  result.timestamps.resize(n_pos);
  result.re_prev.resize(n_pos);
  result.re_ref.resize(n_pos);
  for (const auto& m : methods) result.method_tags.push_back(m.tag);
  result.thresholds.assign(methods.size(), std::vector<double>(n_pos, kNaN));
  result.detections.assign(methods.size(),
                           std::vector<std::uint8_t>(n_pos, 0));

  const auto q_first = categorical::from_counts(window_counts(0, w));
  std::vector<std::uint8_t> empty_suppressed(n_pos, 0);
  std::vector<std::uint8_t> level_suppressed(n_pos, 0);

  run_partitioned(n_pos, config.threads, [&](std::int64_t begin,
                                             std::int64_t end) {
    for (std::int64_t idx = begin; idx < end; ++idx) {
      const std::int64_t t = positions[idx];
      const auto p_hat = categorical::from_counts(window_counts(t - w, t));
      const auto q_prev =
          categorical::from_counts(window_counts(t - 2 * w, t - w));

      result.re_prev[idx] =
          divergence::relative_entropy(p_hat, q_prev).value;
      result.re_ref[idx] =
          divergence::relative_entropy(p_hat, q_first).value;

      const auto& q_sel = config.reference == Reference::kPreviousWindow
                              ? q_prev
                              : q_first;
      const double stat = config.reference == Reference::kPreviousWindow
                              ? result.re_prev[idx]
                              : result.re_ref[idx];

      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const auto& m = methods[mi];
        double threshold = fixed[mi];
        if (m.position_dependent()) {
          if (!(q_sel.probs.minCoeff() > 0.0)) {
            empty_suppressed[idx] = 1;
            continue;  // threshold stays NaN, no detection emitted
          }
          BoundSpec spec;
          spec.family = m.family;
          spec.n = w;
          spec.m = w;
          spec.k = k;
          spec.beta =
              m.reverse_pinsker
                  ? divergence::reverse_pinsker_coefficient(p_hat, q_sel)
                  : 1.0;
          if (m.family == bounds::BoundFamily::kBeEnvelope ||
              m.family == bounds::BoundFamily::kBe2Quadratic) {
            spec.p = q_sel;
          }
          try {
            threshold = bounds::bound_quantile(config.alpha, spec);
          } catch (const ValidityError&) {
            level_suppressed[idx] = 1;
            continue;  // e.g. envelope vacuous at this window size
          }
        }
        result.thresholds[mi][idx] = threshold;
        result.detections[mi][idx] = stat > threshold ? 1 : 0;
      }
    }
  });

  for (std::int64_t idx = 0; idx < n_pos; ++idx) {
    const std::int64_t t = positions[idx];
    if (!timestamps.empty()) {
      result.timestamps[idx] =
          io::format_date(timestamps[static_cast<std::size_t>(t - 1)].days);
    } else {
      result.timestamps[idx] = std::to_string(t - 1);
    }
  }
  const std::int64_t empties =
      std::count(empty_suppressed.begin(), empty_suppressed.end(), 1);
  if (empties > 0) {
    result.warnings.push_back(
        "empty category in the reference window at " +
        std::to_string(empties) +
        " positions; data-dependent thresholds suppressed there");
  }
  const std::int64_t unreachable =
      std::count(level_suppressed.begin(), level_suppressed.end(), 1);
  if (unreachable > 0) {
    result.warnings.push_back(
        "threshold level unreachable at " + std::to_string(unreachable) +
        " positions (bound never drops to alpha at this window size)");
  }
  return result;
}

ScanResult rolling_scan(const io::Series& series, const ScanConfig& config) {
  std::vector<int> labels;
  std::vector<io::Timestamp> label_times;
  if (config.preprocess == Preprocess::kQuantileBins) {
    // cuts fitted on the whole series
    const auto bins = categorical::quantile_bins(series.values, config.k);
    labels = categorical::discretize(series.values, bins);
    if (series.has_dates) {
      label_times.assign(series.timestamps.begin(), series.timestamps.end());
    }
  } else {
    categorical::SignTripleEncoding enc{config.merge_triples};
    if (config.k != enc.categories()) {
      throw std::invalid_argument(
          "rolling_scan: k must equal the sign-triple category count (" +
          std::to_string(enc.categories()) + ")");
    }
    labels = categorical::encode_sign_triples(series.values, enc);
    if (series.has_dates) {
      // label i closes the triple of increments ending at sample i + 3
      label_times.assign(series.timestamps.begin() + 3,
                         series.timestamps.end());
    }
  }
  return rolling_scan_labels(labels, label_times, config);
}

void write_scan_csv(const ScanResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "timestamp,re_prev,re_ref";
  for (const auto& tag : result.method_tags) out << "," << tag << "_threshold";
  for (const auto& tag : result.method_tags) out << "," << tag << "_detect";
  out << "\n";
  for (std::size_t i = 0; i < result.timestamps.size(); ++i) {
    out << result.timestamps[i] << "," << io::format_double(result.re_prev[i])
        << "," << io::format_double(result.re_ref[i]);
    for (const auto& column : result.thresholds) {
      out << "," << io::format_double(column[i]);
    }
    for (const auto& column : result.detections) {
      out << "," << static_cast<int>(column[i]);
    }
    out << "\n";
  }
}

void write_scan_json(const ScanResult& result, const ScanConfig& config,
                     const std::string& path) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = {
      {"window", config.window},
      {"k", config.k},
      {"preprocess", config.preprocess == Preprocess::kQuantileBins
                         ? "quantile"
                         : (config.merge_triples ? "sign-triples:merge"
                                                 : "sign-triples")},
      {"reference", config.reference == Reference::kPreviousWindow
                        ? "previous"
                        : "first"},
      {"methods", config.methods},
      {"alpha", config.alpha},
      {"step", config.step},
  };
  j["timestamps"] = result.timestamps;
  auto dump_doubles = [](const std::vector<double>& xs) {
    nlohmann::json arr = nlohmann::json::array();
    for (double x : xs) {
      if (std::isfinite(x)) {
        arr.push_back(x);
      } else {
        arr.push_back(nullptr);  // inf / suppressed
      }
    }
    return arr;
  };
  j["re_prev"] = dump_doubles(result.re_prev);
  j["re_ref"] = dump_doubles(result.re_ref);
  nlohmann::json thresholds = nlohmann::json::object();
  nlohmann::json detections = nlohmann::json::object();
  for (std::size_t mi = 0; mi < result.method_tags.size(); ++mi) {
    thresholds[result.method_tags[mi]] = dump_doubles(result.thresholds[mi]);
    nlohmann::json det = nlohmann::json::array();
    for (auto b : result.detections[mi]) det.push_back(b != 0);
    detections[result.method_tags[mi]] = det;
  }
  j["thresholds"] = thresholds;
  j["detections"] = detections;
  j["warnings"] = result.warnings;
  nlohmann::json notes = nlohmann::json::array();
  for (const auto& tag : result.method_tags) {
    if (tag.rfind("twosample", 0) == 0 && tag.find(":rp") == std::string::npos) {
      notes.push_back(tag + " uses the conjectured unit-beta variant");
    }
  }
  j["notes"] = notes;

  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace entropy_cpd::detect
