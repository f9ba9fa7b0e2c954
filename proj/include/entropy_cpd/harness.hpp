#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "entropy_cpd/categorical.hpp"

namespace entropy_cpd::harness {

struct ExperimentConfig {
  std::string experiment;  // cdf_envelope | quantile_vs_n | quantile_vs_k |
                           // power_vs_psi | equal_mean_power
  int k = 4;
  std::int64_t n = 100;
  std::int64_t m = 0;  // defaults to n
  double phi = 0.0;
  std::vector<double> psi_grid;
  std::vector<double> p1_grid;
  std::vector<std::int64_t> n_grid;
  std::vector<int> k_grid;
  std::vector<double> alphas;  // quantile levels are 1 - alpha
  std::int64_t trials = 10000;
  std::uint64_t seed = 0;
  std::vector<std::string> methods;  // empty = experiment defaults
  int x_grid_points = 50;
  int threads = 1;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  void validate() const;
  std::int64_t m_or_n() const { return m > 0 ? m : n; }
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> notes;
};

// Simulated CDF of 2n D(p_hat || p) under uniform p on a chi-squared
// quantile grid, with the limit CDF and the Berry-Esseen envelope.
Table run_cdf_envelope(const ExperimentConfig& cfg);

// Empirical one- and two-sample quantiles against the asymptotic and
// concentration thresholds, over a grid in n or in k.
Table run_quantile_experiment(const ExperimentConfig& cfg);

// Rejection rates of the change-point tests over a grid of psi
// (ranked-exponential shift) or p1 (equal-mean alternative).
Table run_power_experiment(const ExperimentConfig& cfg);
Table run_equal_mean_experiment(const ExperimentConfig& cfg);

Table run_experiment(const ExperimentConfig& cfg);

void write_table_csv(const Table& table, const std::string& path);

// JSON sidecar with the full configuration and library version.
void write_sidecar(const ExperimentConfig& cfg, const Table& table,
                   const std::string& csv_path);

}  // namespace entropy_cpd::harness
