#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entropy_cpd/bounds.hpp"
#include "entropy_cpd/categorical.hpp"
#include "entropy_cpd/detect.hpp"
#include "entropy_cpd/divergence.hpp"
#include "entropy_cpd/errors.hpp"
#include "entropy_cpd/harness.hpp"
#include "entropy_cpd/io.hpp"
#include "entropy_cpd/version.hpp"

namespace {

using namespace entropy_cpd;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitValidity = 4;

std::vector<double> parse_prob_list(const std::string& csv) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string item =
        csv.substr(start, comma == std::string::npos ? std::string::npos
                                                     : comma - start);
    if (!item.empty()) out.push_back(std::stod(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

categorical::CategoricalDistribution make_distribution(
    const std::vector<double>& probs) {
  categorical::CategoricalDistribution dist;
  dist.probs = Eigen::Map<const Eigen::ArrayXd>(probs.data(),
                                                static_cast<Eigen::Index>(probs.size()));
  const double total = dist.probs.sum();
  if (!(std::abs(total - 1.0) < 1e-9)) {
    throw std::invalid_argument("--p probabilities must sum to 1");
  }
  dist.count = 0;
  return dist;
}

std::vector<std::string> split_tags(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = csv.find(',', start);
    const std::string item =
        csv.substr(start, comma == std::string::npos ? std::string::npos
                                                     : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<int> labels_from_series(const io::Series& series, int k) {
  std::vector<int> labels;
  labels.reserve(series.values.size());
  for (double v : series.values) {
    const int label = static_cast<int>(std::llround(v));
    if (std::abs(v - label) > 1e-9 || label < 0 || label >= k) {
      throw DataError("test: inputs must be integer labels in [0, k)");
    }
    labels.push_back(label);
  }
  return labels;
}

std::string json_path_for(const std::string& csv_path) {
  if (csv_path.size() > 4 &&
      csv_path.compare(csv_path.size() - 4, 4, ".csv") == 0) {
    return csv_path.substr(0, csv_path.size() - 4) + ".json";
  }
  return csv_path + ".json";
}

nlohmann::json test_result_json(const detect::TestResult& result) {
  nlohmann::json j;
  j["method"] = result.method;
  j["alpha"] = result.alpha;
  if (std::isfinite(result.statistic)) {
    j["statistic"] = result.statistic;
  } else {
    j["statistic"] = nullptr;
  }
  if (std::isfinite(result.threshold)) {
    j["threshold"] = result.threshold;
  } else {
    j["threshold"] = nullptr;
  }
  j["reject"] = result.reject;
  j["infinite"] = result.infinite;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline change-point detection via empirical relative entropy"};
  app.set_version_flag("--version", std::string("entropy-cpd ") + kVersion);

  std::uint64_t seed = 0;
  int threads = 1;
  app.add_option("--seed", seed, "Master seed for simulations")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads")->capture_default_str();

  // ---- bounds ----
  auto* cmd_bounds = app.add_subcommand("bounds", "Evaluate a tail bound at x");
  std::string b_family, b_beta = "unit", b_probs;
  std::int64_t b_n = 0, b_m = 0;
  int b_k = 0;
  double b_x = 0.0;
  cmd_bounds->add_option("--family", b_family)->required();
  cmd_bounds->add_option("--n", b_n)->required();
  cmd_bounds->add_option("--m", b_m);
  cmd_bounds->add_option("--k", b_k)->required();
  cmd_bounds->add_option("--x", b_x, "Relative entropy in nats")->required();
  cmd_bounds->add_option("--beta", b_beta, "float | unit (auto needs data; use `test`)");
  cmd_bounds->add_option("--p", b_probs, "Comma-separated probabilities");

  // ---- quantile ----
  auto* cmd_quantile = app.add_subcommand("quantile", "Invert a bound into a threshold");
  std::string q_family, q_beta = "unit", q_probs;
  std::int64_t q_n = 0, q_m = 0;
  int q_k = 0;
  double q_alpha = 0.05;
  cmd_quantile->add_option("--family", q_family)->required();
  cmd_quantile->add_option("--alpha", q_alpha)->required();
  cmd_quantile->add_option("--n", q_n)->required();
  cmd_quantile->add_option("--m", q_m);
  cmd_quantile->add_option("--k", q_k)->required();
  cmd_quantile->add_option("--beta", q_beta);
  cmd_quantile->add_option("--p", q_probs);

  // ---- test ----
  auto* cmd_test = app.add_subcommand("test", "Two-window change-point test");
  std::string t_first, t_second, t_method;
  int t_k = 0;
  double t_alpha = 0.05;
  cmd_test->add_option("--first", t_first)->required();
  cmd_test->add_option("--second", t_second)->required();
  cmd_test->add_option("--k", t_k)->required();
  cmd_test->add_option("--method", t_method)->required();
  cmd_test->add_option("--alpha", t_alpha)->required();

  // ---- simulate ----
  auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo experiments");
  std::string s_kind, s_config, s_out;
  cmd_sim->add_option("kind", s_kind, "cdf | quantiles | power | equal-mean")
      ->required();
  cmd_sim->add_option("--config", s_config, "JSON config file")->required();
  cmd_sim->add_option("--out", s_out, "Output CSV path")->required();

  // ---- scan ----
  auto* cmd_scan = app.add_subcommand("scan", "Rolling-window scan of a series");
  std::string sc_input, sc_preprocess = "quantile", sc_reference = "previous";
  std::string sc_methods = "asymptotic1,asymptotic2,agrawal3,twosample3,aic";
  std::string sc_aggregate, sc_out;
  std::int64_t sc_window = 0, sc_step = 1;
  int sc_k = 0;
  double sc_alpha = 0.05;
  cmd_scan->add_option("--input", sc_input)->required();
  cmd_scan->add_option("--window", sc_window)->required();
  cmd_scan->add_option("--k", sc_k)->required();
  cmd_scan->add_option("--preprocess", sc_preprocess,
                       "quantile | sign-triples | sign-triples:merge");
  cmd_scan->add_option("--reference", sc_reference, "previous | first");
  cmd_scan->add_option("--methods", sc_methods, "Comma-separated method tags");
  cmd_scan->add_option("--alpha", sc_alpha);
  cmd_scan->add_option("--aggregate", sc_aggregate, "daily | weekly");
  cmd_scan->add_option("--step", sc_step);
  cmd_scan->add_option("--out", sc_out)->required();

  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*cmd_bounds || *cmd_quantile) {
      const bool is_bounds = static_cast<bool>(*cmd_bounds);
      bounds::BoundSpec spec;
      spec.family = bounds::parse_family(is_bounds ? b_family : q_family);
      spec.n = is_bounds ? b_n : q_n;
      spec.m = is_bounds ? b_m : q_m;
      spec.k = is_bounds ? b_k : q_k;
      const std::string beta_arg = is_bounds ? b_beta : q_beta;
      if (beta_arg == "auto") {
        throw std::invalid_argument(
            "--beta auto requires empirical data; use the `test` subcommand");
      }
      spec.beta = beta_arg == "unit" ? 1.0 : std::stod(beta_arg);
      const std::string probs_arg = is_bounds ? b_probs : q_probs;
      if (!probs_arg.empty()) {
        spec.p = make_distribution(parse_prob_list(probs_arg));
        if (spec.p->k() != spec.k) {
          throw std::invalid_argument("--p length must equal --k");
        }
      }
      if (is_bounds) {
        if (spec.family == bounds::BoundFamily::kBeEnvelope) {
          if (!spec.p) throw std::invalid_argument("be_envelope requires --p");
          const auto env = bounds::be_envelope(
              2.0 * static_cast<double>(spec.n) * b_x, spec.n, *spec.p);
          std::printf("%s %s\n", io::format_double(env.lower).c_str(),
                      io::format_double(env.upper).c_str());
        } else {
          std::printf("%s\n",
                      io::format_double(bounds::bound_tail(b_x, spec)).c_str());
        }
      } else {
        std::printf(
            "%s\n",
            io::format_double(bounds::bound_quantile(q_alpha, spec)).c_str());
      }
      return kExitOk;
    }

    if (*cmd_test) {
      const auto first = io::read_series_csv(t_first);
      const auto second = io::read_series_csv(t_second);
      detect::TestResult result;
      if (t_method == "t_test" || t_method == "f_test") {
        result = t_method == "t_test"
                     ? detect::t_test(first.values, second.values, t_alpha)
                     : detect::f_test(first.values, second.values, t_alpha);
      } else if (t_method == "aic") {
        const auto q_hat = categorical::empirical_distribution(
            labels_from_series(first, t_k), t_k);
        const auto p_hat = categorical::empirical_distribution(
            labels_from_series(second, t_k), t_k);
        const auto [value, change] = detect::delta_aic(p_hat, q_hat);
        result.method = "aic";
        result.alpha = t_alpha;
        result.statistic = value;
        result.threshold = 0.0;
        result.reject = change;
      } else {
        bounds::BoundSpec spec;
        std::string base = t_method;
        if (const auto pos = base.rfind(":rp");
            pos != std::string::npos && pos + 3 == base.size()) {
          base = base.substr(0, pos);
          spec.beta_mode = bounds::BetaMode::kReversePinsker;
        }
        spec.family = bounds::parse_family(base);
        result = detect::re_test(labels_from_series(first, t_k),
                                 labels_from_series(second, t_k), t_k, spec,
                                 t_alpha);
      }
      std::printf("%s\n", test_result_json(result).dump(2).c_str());
      return kExitOk;
    }

    if (*cmd_sim) {
      std::ifstream in(s_config);
      if (!in) throw DataError("cannot open '" + s_config + "'");
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad config JSON: ") + e.what());
      }
      auto cfg = harness::ExperimentConfig::from_json(j);
      if (s_kind == "cdf") {
        cfg.experiment = "cdf_envelope";
      } else if (s_kind == "quantiles") {
        if (cfg.experiment != "quantile_vs_k") cfg.experiment = cfg.k_grid.empty() ? "quantile_vs_n" : "quantile_vs_k";
      } else if (s_kind == "power") {
        cfg.experiment = "power_vs_psi";
      } else if (s_kind == "equal-mean") {
        cfg.experiment = "equal_mean_power";
      } else {
        throw std::invalid_argument("unknown simulate kind '" + s_kind + "'");
      }
      if (app.count("--seed") > 0) cfg.seed = seed;
      if (app.count("--threads") > 0) cfg.threads = threads;
      const auto table = harness::run_experiment(cfg);
      harness::write_table_csv(table, s_out);
      harness::write_sidecar(cfg, table, s_out);
      return kExitOk;
    }

    if (*cmd_scan) {
      auto series = io::read_series_csv(sc_input);
      if (!sc_aggregate.empty()) {
        if (!series.has_dates) {
          throw DataError("scan: --aggregate requires a date column");
        }
        const auto rule = sc_aggregate == "daily"
                              ? categorical::AggregationRule::kDaily
                              : categorical::AggregationRule::kWeekly;
        if (sc_aggregate != "daily" && sc_aggregate != "weekly") {
          throw std::invalid_argument("--aggregate must be daily or weekly");
        }
        auto [ts, vals] = categorical::aggregate_series(series.timestamps,
                                                        series.values, rule);
        series.timestamps = std::move(ts);
        series.values = std::move(vals);
      }
      detect::ScanConfig config;
      config.window = sc_window;
      config.k = sc_k;
      if (sc_preprocess == "quantile") {
        config.preprocess = detect::Preprocess::kQuantileBins;
      } else if (sc_preprocess == "sign-triples") {
        config.preprocess = detect::Preprocess::kSignTriples;
      } else if (sc_preprocess == "sign-triples:merge") {
        config.preprocess = detect::Preprocess::kSignTriples;
        config.merge_triples = true;
      } else {
        throw std::invalid_argument("unknown --preprocess '" + sc_preprocess + "'");
      }
      if (sc_reference == "previous") {
        config.reference = detect::Reference::kPreviousWindow;
      } else if (sc_reference == "first") {
        config.reference = detect::Reference::kFirstWindow;
      } else {
        throw std::invalid_argument("unknown --reference '" + sc_reference + "'");
      }
      config.methods = split_tags(sc_methods);
      config.alpha = sc_alpha;
      config.step = sc_step;
      config.threads = threads;
      const auto result = detect::rolling_scan(series, config);
      detect::write_scan_csv(result, sc_out);
      detect::write_scan_json(result, config, json_path_for(sc_out));
      for (const auto& warning : result.warnings) {
        std::fprintf(stderr, "warning: %s\n", warning.c_str());
      }
      return kExitOk;
    }

    std::cout << app.help();
    return kExitOk;
  } catch (const ValidityError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidity;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
