#include "entropy_cpd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "entropy_cpd/bounds.hpp"
#include "entropy_cpd/detect.hpp"
#include "entropy_cpd/divergence.hpp"
#include "entropy_cpd/errors.hpp"
#include "entropy_cpd/io.hpp"
#include "entropy_cpd/numerics.hpp"
#include "entropy_cpd/rng.hpp"
#include "entropy_cpd/version.hpp"

namespace entropy_cpd::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Trajectories are independent work items with their own streams; any
// thread split reproduces the serial outputs exactly.
void parallel_trials(std::int64_t trials, int threads,
                     const std::function<void(std::int64_t)>& body) {
  if (threads <= 1 || trials < 2) {
    for (std::int64_t i = 0; i < trials; ++i) body(i);
    return;
  }
  const int used =
      static_cast<int>(std::min<std::int64_t>(threads, trials));
  const std::int64_t chunk = (trials + used - 1) / used;
  std::vector<std::thread> pool;
  for (int t = 0; t < used; ++t) {
    const std::int64_t begin = t * chunk;
    const std::int64_t end = std::min(trials, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end]() {
      for (std::int64_t i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

// type-7 quantile of an unsorted copy
double empirical_quantile(std::vector<double> values, double level) {
  std::sort(values.begin(), values.end());
  const double pos = (static_cast<double>(values.size()) - 1.0) * level;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - std::floor(pos);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double mean_of_counts(const Eigen::ArrayXd& counts) {
  // category values are 1..k
  double total = 0.0, weighted = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    total += counts[i];
    weighted += counts[i] * static_cast<double>(i + 1);
  }
  return weighted / total;
}

double var_of_counts(const Eigen::ArrayXd& counts, double mean) {
  double total = 0.0, ss = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    const double v = static_cast<double>(i + 1) - mean;
    total += counts[i];
    ss += counts[i] * v * v;
  }
  return ss / (total - 1.0);
}

std::vector<double> default_levels(const ExperimentConfig& cfg) {
  return cfg.alphas.empty() ? std::vector<double>{0.25, 0.05} : cfg.alphas;
}

struct PowerAccumulator {
  std::int64_t asymptotic2 = 0;
  std::int64_t twosample3 = 0;
  std::int64_t delta_aic = 0;
  std::int64_t t_test = 0;
  std::int64_t f_test = 0;
};

// One power-style grid point: first window ~ law_q, second ~ law_p.
PowerAccumulator power_point(const ExperimentConfig& cfg,
                             const Eigen::ArrayXd& law_q,
                             const Eigen::ArrayXd& law_p,
                             const std::string& tag,
                             std::int64_t trajectory_offset, double alpha) {
  const std::int64_t n = cfg.n;
  const int k = cfg.k;
  const double thr_asym2 =
      bounds::asymptotic_threshold(alpha, k, n, n);
  bounds::BoundSpec ts3;
  ts3.family = bounds::BoundFamily::kTwoSample3;
  ts3.n = n;
  ts3.m = n;
  ts3.k = k;
  ts3.beta = 1.0;  // conjectured starred variant
  const double thr_ts3 = bounds::bound_quantile(alpha, ts3);

  std::vector<std::uint8_t> rej(static_cast<std::size_t>(cfg.trials) * 5, 0);
  parallel_trials(cfg.trials, cfg.threads, [&](std::int64_t trial) {
    rng::RandomStream stream(cfg.seed, tag, trajectory_offset + trial);
    const Eigen::ArrayXd counts_q = stream.multinomial(n, law_q);
    const Eigen::ArrayXd counts_p = stream.multinomial(n, law_p);
    const auto q_hat = categorical::from_counts(counts_q);
    const auto p_hat = categorical::from_counts(counts_p);

    const auto div = divergence::relative_entropy(p_hat, q_hat);
    auto* slot = &rej[static_cast<std::size_t>(trial) * 5];
    slot[0] = div.value > thr_asym2 ? 1 : 0;
    slot[1] = div.value > thr_ts3 ? 1 : 0;
    slot[2] = detect::delta_aic(p_hat, q_hat).second ? 1 : 0;

    // t / F baselines take the category values 1..k as reals
    const double mq = mean_of_counts(counts_q);
    const double mp = mean_of_counts(counts_p);
    const double vq = var_of_counts(counts_q, mq);
    const double vp = var_of_counts(counts_p, mp);
    if (vq > 0.0 || vp > 0.0) {
      slot[3] =
          detect::t_test_moments(mq, vq, n, mp, vp, n, alpha).reject ? 1 : 0;
    }
    if (vq > 0.0 && vp > 0.0) {
      slot[4] = detect::f_test_moments(vq, n, vp, n, alpha).reject ? 1 : 0;
    }
  });

  PowerAccumulator acc;
  for (std::int64_t trial = 0; trial < cfg.trials; ++trial) {
    const auto* slot = &rej[static_cast<std::size_t>(trial) * 5];
    acc.asymptotic2 += slot[0];
    acc.twosample3 += slot[1];
    acc.delta_aic += slot[2];
    acc.t_test += slot[3];
    acc.f_test += slot[4];
  }
  return acc;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  auto get = [&j](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key).template get<std::decay_t<decltype(out)>>();
  };
  get("experiment", cfg.experiment);
  get("k", cfg.k);
  get("n", cfg.n);
  get("m", cfg.m);
  get("phi", cfg.phi);
  get("psi_grid", cfg.psi_grid);
  get("p1_grid", cfg.p1_grid);
  get("n_grid", cfg.n_grid);
  get("k_grid", cfg.k_grid);
  get("trials", cfg.trials);
  get("seed", cfg.seed);
  get("methods", cfg.methods);
  get("x_grid_points", cfg.x_grid_points);
  get("threads", cfg.threads);
  if (j.contains("alpha")) {
    const auto& a = j.at("alpha");
    if (a.is_array()) {
      cfg.alphas = a.get<std::vector<double>>();
    } else {
      cfg.alphas = {a.get<double>()};
    }
  }
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["k"] = k;
  j["n"] = n;
  if (m > 0) j["m"] = m;
  j["phi"] = phi;
  if (!psi_grid.empty()) j["psi_grid"] = psi_grid;
  if (!p1_grid.empty()) j["p1_grid"] = p1_grid;
  if (!n_grid.empty()) j["n_grid"] = n_grid;
  if (!k_grid.empty()) j["k_grid"] = k_grid;
  j["alpha"] = alphas;
  j["trials"] = trials;
  j["seed"] = seed;
  if (!methods.empty()) j["methods"] = methods;
  j["x_grid_points"] = x_grid_points;
  j["threads"] = threads;
  return j;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (k < 2) throw std::invalid_argument("config: k must be >= 2");
  if (n < 1) throw std::invalid_argument("config: n must be >= 1");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      throw std::invalid_argument("config: alpha must be in (0,1)");
    }
  }
}

Table run_cdf_envelope(const ExperimentConfig& cfg) {
  cfg.validate();
  const int k = cfg.k;
  const std::int64_t n = cfg.n;
  const auto uniform = categorical::ranked_exponential(0.0, k);

  std::vector<double> stats(static_cast<std::size_t>(cfg.trials));
  parallel_trials(cfg.trials, cfg.threads, [&](std::int64_t trial) {
    rng::RandomStream stream(cfg.seed, "cdf_envelope", trial);
    const auto counts = stream.multinomial(n, uniform.probs);
    const auto p_hat = categorical::from_counts(counts);
    stats[static_cast<std::size_t>(trial)] =
        2.0 * static_cast<double>(n) *
        divergence::relative_entropy(p_hat, uniform).value;
  });
  std::vector<double> sorted(stats);
  std::sort(sorted.begin(), sorted.end());

  Table table;
  table.columns = {"x", "empirical_cdf", "asymptotic_cdf", "lower", "upper"};
  const int points = cfg.x_grid_points;
  for (int i = 1; i <= points; ++i) {
    const double level = static_cast<double>(i) / (points + 1.0);
    const double x = numerics::chi2_quantile(level, k - 1);
    const double ecdf =
        static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) -
                            sorted.begin()) /
        static_cast<double>(sorted.size());
    const auto env = bounds::be_envelope(x, n, uniform);
    table.rows.push_back(
        {x, ecdf, numerics::chi2_cdf(x, k - 1), env.lower, env.upper});
  }
  return table;
}

Table run_quantile_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const bool vary_n = cfg.experiment != "quantile_vs_k";
  std::vector<double> grid;
  if (vary_n) {
    auto ns = cfg.n_grid;
    if (ns.empty()) ns = {25, 50, 100, 200, 350, 500};
    for (auto v : ns) grid.push_back(static_cast<double>(v));
  } else {
    auto ks = cfg.k_grid;
    if (ks.empty()) ks = {2, 3, 4, 5, 6, 7, 8, 9, 10};
    for (auto v : ks) grid.push_back(static_cast<double>(v));
  }
  const auto levels = default_levels(cfg);

  struct MethodColumn {
    std::string name;
    bounds::BoundFamily family;
    bool two_sample;
  };
  static const std::vector<MethodColumn> kAllMethods = {
      {"sanov_binom", bounds::BoundFamily::kSanovBinom, false},
      {"sanov_simple", bounds::BoundFamily::kSanovSimple, false},
      {"mardia", bounds::BoundFamily::kMardia, false},
      {"agrawal1", bounds::BoundFamily::kAgrawal1, false},
      {"agrawal2", bounds::BoundFamily::kAgrawal2, false},
      {"agrawal3", bounds::BoundFamily::kAgrawal3, false},
      {"twosample2_star", bounds::BoundFamily::kTwoSample2, true},
      {"twosample3_star", bounds::BoundFamily::kTwoSample3, true},
  };
  std::vector<MethodColumn> selected;
  if (cfg.methods.empty()) {
    selected = kAllMethods;
  } else {
    for (const auto& m : kAllMethods) {
      const bool wanted =
          std::find(cfg.methods.begin(), cfg.methods.end(), m.name) !=
              cfg.methods.end() ||
          std::find(cfg.methods.begin(), cfg.methods.end(),
                    bounds::family_tag(m.family)) != cfg.methods.end();
      if (wanted) selected.push_back(m);
    }
    if (selected.empty()) {
      throw std::invalid_argument("config: no recognized quantile methods");
    }
  }

  Table table;
  table.columns = {vary_n ? "n" : "k", "alpha",          "empirical_one",
                   "empirical_two",    "asymptotic_one", "asymptotic_two"};
  for (const auto& m : selected) table.columns.push_back(m.name);

  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const std::int64_t n = vary_n ? static_cast<std::int64_t>(grid[gi]) : cfg.n;
    const int k = vary_n ? cfg.k : static_cast<int>(grid[gi]);
    const auto uniform = categorical::ranked_exponential(0.0, k);
    const bool two_sample_ok = k <= 8;  // empty categories beyond that at n=100
    if (!two_sample_ok) {
      table.notes.push_back("two-sample quantiles skipped at k = " +
                            std::to_string(k));
    }
    if (k < 3) {
      table.notes.push_back("mardia bound skipped at k = " +
                            std::to_string(k) + " (validity window)");
    }

    std::vector<double> one(static_cast<std::size_t>(cfg.trials));
    std::vector<double> two(static_cast<std::size_t>(cfg.trials));
    const std::int64_t offset =
        static_cast<std::int64_t>(gi) * cfg.trials;
    parallel_trials(cfg.trials, cfg.threads, [&](std::int64_t trial) {
      rng::RandomStream stream(cfg.seed, cfg.experiment, offset + trial);
      const auto counts_p = stream.multinomial(n, uniform.probs);
      const auto p_hat = categorical::from_counts(counts_p);
      one[static_cast<std::size_t>(trial)] =
          divergence::relative_entropy(p_hat, uniform).value;
      if (two_sample_ok) {
        const auto counts_q = stream.multinomial(n, uniform.probs);
        const auto q_hat = categorical::from_counts(counts_q);
        two[static_cast<std::size_t>(trial)] =
            divergence::relative_entropy(p_hat, q_hat).value;
      }
    });

    for (double alpha : levels) {
      const double level = 1.0 - alpha;
      auto quantile_of = [&](bounds::BoundFamily family) {
        bounds::BoundSpec spec;
        spec.family = family;
        spec.n = n;
        spec.m = n;
        spec.k = k;
        spec.beta = 1.0;
        return bounds::bound_quantile(alpha, spec);
      };
      std::vector<double> row;
      row.push_back(grid[gi]);
      row.push_back(alpha);
      row.push_back(empirical_quantile(one, level));
      row.push_back(two_sample_ok ? empirical_quantile(two, level) : kNaN);
      row.push_back(bounds::asymptotic_threshold(alpha, k, n));
      row.push_back(bounds::asymptotic_threshold(alpha, k, n, n));
      for (const auto& m : selected) {
        const bool skip =
            (m.family == bounds::BoundFamily::kMardia && k < 3) ||
            (m.two_sample && !two_sample_ok);
        row.push_back(skip ? kNaN : quantile_of(m.family));
      }
      table.rows.push_back(std::move(row));
    }
  }
  table.notes.push_back(
      "twosample*_star columns use the conjectured unit-beta variant");
  return table;
}

Table run_power_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<double> psis = cfg.psi_grid;
  if (psis.empty()) {
    for (int i = -8; i <= 8; ++i) psis.push_back(0.1 * i);
  }
  const double alpha = cfg.alphas.empty() ? 0.05 : cfg.alphas.front();

  Table table;
  table.columns = {"psi",       "asymptotic2", "twosample3_star",
                   "delta_aic", "t_test",      "f_test"};
  table.notes.push_back(
      "twosample3_star uses the conjectured unit-beta variant");
  const auto law_q = categorical::ranked_exponential(cfg.phi, cfg.k);
  for (std::size_t gi = 0; gi < psis.size(); ++gi) {
    const auto law_p =
        categorical::ranked_exponential(cfg.phi + psis[gi], cfg.k);
    const auto acc =
        power_point(cfg, law_q.probs, law_p.probs, "power_vs_psi",
                    static_cast<std::int64_t>(gi) * cfg.trials, alpha);
    const double t = static_cast<double>(cfg.trials);
    table.rows.push_back({psis[gi], acc.asymptotic2 / t, acc.twosample3 / t,
                          acc.delta_aic / t, acc.t_test / t, acc.f_test / t});
  }
  return table;
}

Table run_equal_mean_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.k != 4) {
    throw std::invalid_argument("equal_mean_power: the generator family is defined for k = 4");
  }
  std::vector<double> p1s = cfg.p1_grid;
  if (p1s.empty()) p1s = {0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40};
  const double alpha = cfg.alphas.empty() ? 0.05 : cfg.alphas.front();

  Table table;
  table.columns = {"p1",        "asymptotic2", "twosample3_star",
                   "delta_aic", "t_test",      "f_test"};
  table.notes.push_back(
      "twosample3_star uses the conjectured unit-beta variant");
  const auto law_q = categorical::ranked_exponential(0.0, 4);
  for (std::size_t gi = 0; gi < p1s.size(); ++gi) {
    const double p1 = p1s[gi];
    if (!(p1 > 0.0 && p1 < 0.5)) {
      throw std::invalid_argument("equal_mean_power: p1 must be in (0, 0.5)");
    }
    Eigen::ArrayXd law_p(4);
    law_p << p1, 0.5 - p1, 0.5 - p1, p1;
    const auto acc =
        power_point(cfg, law_q.probs, law_p, "equal_mean",
                    static_cast<std::int64_t>(gi) * cfg.trials, alpha);
    const double t = static_cast<double>(cfg.trials);
    table.rows.push_back({p1, acc.asymptotic2 / t, acc.twosample3 / t,
                          acc.delta_aic / t, acc.t_test / t, acc.f_test / t});
  }
  return table;
}

Table run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "cdf_envelope") return run_cdf_envelope(cfg);
  if (cfg.experiment == "quantile_vs_n" || cfg.experiment == "quantile_vs_k") {
    return run_quantile_experiment(cfg);
  }
  if (cfg.experiment == "power_vs_psi") return run_power_experiment(cfg);
  if (cfg.experiment == "equal_mean_power") return run_equal_mean_experiment(cfg);
  throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
}

void write_table_csv(const Table& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << io::format_double(row[i]);
    }
    out << "\n";
  }
}

void write_sidecar(const ExperimentConfig& cfg, const Table& table,
                   const std::string& csv_path) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["config"] = cfg.to_json();
  j["columns"] = table.columns;
  j["notes"] = table.notes;
  const std::string path = csv_path + ".meta.json";
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace entropy_cpd::harness
