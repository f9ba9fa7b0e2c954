#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "entropy_cpd/bounds.hpp"
#include "entropy_cpd/categorical.hpp"
#include "entropy_cpd/io.hpp"

namespace entropy_cpd::detect {

using bounds::BoundSpec;
using categorical::CategoricalDistribution;

struct TestResult {
  double statistic = 0.0;
  double threshold = 0.0;
  std::string method;
  double alpha = 0.0;
  bool reject = false;    // statistic > threshold, strict
  bool infinite = false;  // statistic diverged (reference had empty support)
};

// Relative-entropy change-point test. The later window is p_hat, the
// earlier one the reference q_hat: statistic = D(p_hat || q_hat). The
// threshold comes from the asymptotic law or from bound_quantile; for the
// two-sample concentration families beta is the reverse-Pinsker
// coefficient of (p_hat, q_hat) or 1, per method.beta_mode.
TestResult re_test(std::span<const int> first, std::span<const int> second,
                   int k, BoundSpec method, double alpha);

// Same decision computed from the two empirical laws directly.
TestResult re_test_distributions(const CategoricalDistribution& reference,
                                 const CategoricalDistribution& recent,
                                 BoundSpec method, double alpha);

// Welch two-sample t test (two-sided). statistic = |t|, threshold =
// Student quantile at 1 - alpha/2 with Welch-Satterthwaite dof.
TestResult t_test(std::span<const double> x, std::span<const double> y,
                  double alpha);
TestResult t_test_moments(double mean_x, double var_x, std::int64_t n_x,
                          double mean_y, double var_y, std::int64_t n_y,
                          double alpha);

// Two-sided variance-ratio test. To keep reject <=> statistic > threshold
// the stored statistic is the folded CDF position max(P, 1-P) of the
// ratio, with threshold 1 - alpha/2.
TestResult f_test(std::span<const double> x, std::span<const double> y,
                  double alpha);
TestResult f_test_moments(double var_x, std::int64_t n_x, double var_y,
                          std::int64_t n_y, double alpha);

// Difference of AICs between the one-regime and two-regime categorical
// models; positive value flags a change-point. Both laws must carry the
// same positive count.
std::pair<double, bool> delta_aic(const CategoricalDistribution& p_hat,
                                  const CategoricalDistribution& q_hat);

// 2(k-1)/n, the relative-entropy level at which delta_aic changes sign
// to second order.
double aic_equivalent_threshold(int k, std::int64_t n);

enum class Preprocess { kQuantileBins, kSignTriples };
enum class Reference { kPreviousWindow, kFirstWindow };

// A scan method is a bound family tag, "aic", or a two-sample tag with a
// ":rp" suffix selecting the data-dependent reverse-Pinsker beta.
struct ScanConfig {
  std::int64_t window = 0;
  int k = 0;
  Preprocess preprocess = Preprocess::kQuantileBins;
  bool merge_triples = false;
  Reference reference = Reference::kPreviousWindow;
  std::vector<std::string> methods;
  double alpha = 0.05;
  std::int64_t step = 1;
  int threads = 1;
};

struct ScanResult {
  std::vector<std::string> timestamps;
  std::vector<double> re_prev;  // D(p_hat || q_hat previous window)
  std::vector<double> re_ref;   // D(p_hat || q_hat reference window)
  std::vector<std::string> method_tags;
  // per method, per position; NaN marks a suppressed threshold
  std::vector<std::vector<double>> thresholds;
  std::vector<std::vector<std::uint8_t>> detections;
  std::vector<std::string> warnings;
};

// Rolling two-window scan over a raw series (discretized per config) or
// over pre-labelled data. Quantile cuts are fitted on the whole series.
ScanResult rolling_scan(const io::Series& series, const ScanConfig& config);
ScanResult rolling_scan_labels(std::span<const int> labels,
                               std::span<const io::Timestamp> timestamps,
                               const ScanConfig& config);

void write_scan_csv(const ScanResult& result, const std::string& path);
void write_scan_json(const ScanResult& result, const ScanConfig& config,
                     const std::string& path);

}  // namespace entropy_cpd::detect
