#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "dpopt/config.hpp"
#include "dpopt/descent.hpp"
#include "dpopt/evcharging.hpp"
#include "dpopt/model.hpp"
#include "dpopt/privacy.hpp"

namespace dpopt {

enum class SweepAxis { None, Epsilon, K, C };

struct ExperimentConfig {
  ScenarioConfig scenario_config;
  double epsilon = 0.1;
  AdjacencyParams adjacency{13.2, 12.0};
  DescentConfig descent;
  SweepAxis sweep = SweepAxis::None;
  Vec epsilon_grid;
  Vec k_grid;
  Vec c_grid;
  std::vector<std::uint64_t> seeds;
  bool optimize_k = true;
  std::size_t k_max = 60;
  std::size_t threads = 1;
};

namespace detail {

inline void require_strictly_increasing(const Vec& grid, const char* what) {
  if (grid.empty()) throw ConfigError(std::string(what) + ": empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw ConfigError(std::string(what) + ": grid must be strictly increasing");
    }
  }
}

}  // namespace detail

// Desk-scale defaults: the full study shape at a size that runs in minutes.
inline ExperimentConfig load_experiment(const Config& cfg) {
  ExperimentConfig ex;
  const std::size_t T = static_cast<std::size_t>(cfg.get_int("horizon", 52));
  const std::size_t n = static_cast<std::size_t>(cfg.get_int("n_users", 10000));
  const std::size_t m = static_cast<std::size_t>(cfg.get_int("n_households", 50000));
  const std::size_t N = static_cast<std::size_t>(cfg.get_int("n_groups", 100));

  ex.scenario_config.horizon = T;
  ex.scenario_config.n_users = n;
  ex.scenario_config.n_households = m;

  if (cfg.has("rate_cap")) {
    // explicit single-group spec for small hand-built instances
    ChargingSpec spec;
    spec.rate_cap = cfg.get_list("rate_cap", {});
    spec.energy = cfg.get_double("energy", 0.0);
    ex.scenario_config.group_specs = {spec};
  } else {
    const auto spec_seed = static_cast<std::uint64_t>(cfg.get_int("spec_seed", 1));
    ex.scenario_config.group_specs = generate_specs(N, T, spec_seed);
  }

  BaseLoadConfig bl;
  bl.source = cfg.get_string("base_load", "synthetic");
  bl.mid = cfg.get_double("base_mid", 1.0);
  bl.amp = cfg.get_double("base_amp", 0.3);
  bl.peak_slot = cfg.get_double("base_peak_slot", 10.0);
  ex.scenario_config.base_load = generate_base_load(T, bl);

  ex.epsilon = cfg.get_double("epsilon", 0.1);
  ex.adjacency.delta_r = cfg.get_double("delta_r", 13.2);
  ex.adjacency.delta_E = cfg.get_double("delta_E", 12.0);

  ex.descent.K = static_cast<std::size_t>(cfg.get_int("K", 6));
  ex.descent.c = cfg.get_double("c", 10.0);
  ex.descent.eta = cfg.get_double("eta", 1.0);
  ex.descent.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 42));
  ex.descent.is_private = cfg.get_bool("private", true);
  ex.threads = static_cast<std::size_t>(cfg.get_int("threads", 1));
  ex.descent.threads = ex.threads;

  const std::string axis = cfg.get_string("sweep", "none");
  if (axis == "none") ex.sweep = SweepAxis::None;
  else if (axis == "epsilon") ex.sweep = SweepAxis::Epsilon;
  else if (axis == "K") ex.sweep = SweepAxis::K;
  else if (axis == "c") ex.sweep = SweepAxis::C;
  else throw ConfigError("unknown sweep axis '" + axis + "'");

  if (ex.sweep == SweepAxis::Epsilon) {
    ex.epsilon_grid = cfg.get_list("epsilon_grid", {0.02, 0.04, 0.08, 0.16, 0.32, 0.64, 1.0});
    detail::require_strictly_increasing(ex.epsilon_grid, "epsilon_grid");
  } else if (ex.sweep == SweepAxis::K) {
    Vec def;
    for (double k = 2; k <= 60; k += 2) def.push_back(k);
    ex.k_grid = cfg.get_list("K_grid", def);
    detail::require_strictly_increasing(ex.k_grid, "K_grid");
  } else if (ex.sweep == SweepAxis::C) {
    ex.c_grid = cfg.get_list("c_grid", {10, 12, 14, 16, 18, 20});
    detail::require_strictly_increasing(ex.c_grid, "c_grid");
  }

  Vec seed_list = cfg.get_list("seeds", {});
  if (seed_list.empty()) {
    for (std::uint64_t s = 1; s <= 20; ++s) ex.seeds.push_back(s);
  } else {
    for (double s : seed_list) ex.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  std::vector<std::uint64_t> sorted = ex.seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("seeds must be distinct");
  }

  ex.optimize_k = cfg.get_bool("optimize_K", true);
  ex.k_max = static_cast<std::size_t>(cfg.get_int("K_max", 60));
  return ex;
}

// Fixed-order result row; the schema is the CSV contract.
struct CsvRow {
  double epsilon = 0.0;
  std::size_t K = 0;
  double c = 0.0;
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t T = 0;
  double U_value = 0.0;
  double U_star = 0.0;
  double rel_subopt = 0.0;
  double budget = 0.0;
  double wall_ms = 0.0;
};

inline std::string csv_header() {
  return "epsilon,K,c,eta,seed,n,m,T,U_value,U_star,rel_subopt,budget,wall_ms";
}

inline std::string format_csv_row(const CsvRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%.17g,%zu,%.17g,%.17g,%llu,%zu,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.6g",
                r.epsilon, r.K, r.c, r.eta,
                static_cast<unsigned long long>(r.seed), r.n, r.m, r.T, r.U_value,
                r.U_star, r.rel_subopt, r.budget, r.wall_ms);
  return std::string(buf);
}

struct RunPoint {
  double epsilon;
  std::size_t K;
  double c;
  double eta;
  std::uint64_t seed;
  bool is_private;
};

// One engine execution at the given point; the scenario, objective, and
// reference optimum are shared across points.
inline CsvRow run_point(const Scenario& scenario, const EVObjective& objective,
                        double u_star, const RunPoint& pt,
                        const AdjacencyParams& adjacency, std::size_t threads,
                        RunRecord* record_out = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  DescentConfig dc;
  dc.K = pt.K;
  dc.c = pt.c;
  dc.eta = pt.eta;
  dc.seed = pt.seed;
  dc.is_private = pt.is_private;
  dc.threads = threads;

  std::optional<NoiseSchedule> schedule;
  if (pt.is_private) {
    schedule = build_schedule(pt.K, objective.lipschitz(),
                              sensitivity_bound(adjacency), pt.epsilon);
  }
  RunRecord rec = run(scenario, objective, dc, schedule);

  CsvRow row;
  row.epsilon = pt.is_private ? pt.epsilon : 0.0;
  row.K = pt.K;
  row.c = pt.c;
  row.eta = pt.eta;
  row.seed = pt.seed;
  row.n = scenario.n_users;
  row.m = scenario.n_households;
  row.T = scenario.horizon;
  row.U_value = rec.objective;
  row.U_star = u_star;
  row.rel_subopt = (rec.objective - u_star) / u_star;
  row.budget = rec.budget_spent;
  row.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  if (record_out) *record_out = std::move(rec);
  return row;
}

namespace detail {

inline void parallel_tasks(std::size_t n_tasks, std::size_t threads,
                           const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || n_tasks <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  const std::size_t n_workers = std::min(threads, n_tasks);
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) {
        body(i);
      }
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace detail

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const Vec& x, const Vec& y) {
  const std::size_t n = x.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double nd = static_cast<double>(n);
  return (nd * sxy - sx * sy) / (nd * sxx - sx * sx);
}

struct SweepResult {
  std::vector<CsvRow> rows;       // sorted by (grid point, seed)
  Vec grid;                       // swept values
  Vec mean_rel_subopt;            // per grid value, mean over seeds
  std::vector<std::size_t> best_K;  // per grid value (epsilon sweeps with K opt)
  double slope = 0.0;             // log-log slope (epsilon sweeps)
};

// Mean relative suboptimality over the seed list at one (eps, K, c) point.
inline double mean_subopt(const Scenario& scenario, const EVObjective& objective,
                          double u_star, double epsilon, std::size_t K, double c,
                          double eta, const std::vector<std::uint64_t>& seeds,
                          const AdjacencyParams& adjacency, bool is_private,
                          std::size_t threads, std::vector<CsvRow>* rows_out = nullptr) {
  std::vector<CsvRow> rows(seeds.size());
  detail::parallel_tasks(seeds.size(), threads, [&](std::size_t i) {
    const RunPoint pt{epsilon, K, c, eta, seeds[i], is_private};
    rows[i] = run_point(scenario, objective, u_star, pt, adjacency, 1);
  });
  double mean = 0.0;
  for (const CsvRow& r : rows) mean += r.rel_subopt;
  mean /= static_cast<double>(rows.size());
  if (rows_out) *rows_out = std::move(rows);
  return mean;
}

inline SweepResult sweep(const ExperimentConfig& ex) {
  const Scenario scenario = build_scenario(ex.scenario_config);
  const EVObjective objective(scenario.base_load, scenario.n_households);
  const double u_star = oracle_optimum(scenario, objective);

  SweepResult res;
  switch (ex.sweep) {
    case SweepAxis::Epsilon: {
      for (double eps : ex.epsilon_grid) {
        std::size_t best_k = ex.descent.K;
        double best_mean = std::numeric_limits<double>::infinity();
        std::vector<CsvRow> best_rows;
        if (ex.optimize_k) {
          // the per-epsilon K choice: plain grid search on the seed mean
          for (std::size_t K = 2; K <= ex.k_max; ++K) {
            std::vector<CsvRow> rows;
            const double mean =
                mean_subopt(scenario, objective, u_star, eps, K, ex.descent.c,
                            ex.descent.eta, ex.seeds, ex.adjacency, true,
                            ex.threads, &rows);
            if (mean < best_mean) {
              best_mean = mean;
              best_k = K;
              best_rows = std::move(rows);
            }
          }
        } else {
          best_mean = mean_subopt(scenario, objective, u_star, eps, ex.descent.K,
                                  ex.descent.c, ex.descent.eta, ex.seeds,
                                  ex.adjacency, true, ex.threads, &best_rows);
          best_k = ex.descent.K;
        }
        res.grid.push_back(eps);
        res.mean_rel_subopt.push_back(best_mean);
        res.best_K.push_back(best_k);
        for (CsvRow& r : best_rows) res.rows.push_back(std::move(r));
      }
      res.slope = loglog_slope(res.grid, res.mean_rel_subopt);
      break;
    }
    case SweepAxis::K: {
      for (double kd : ex.k_grid) {
        const std::size_t K = static_cast<std::size_t>(kd);
        std::vector<CsvRow> rows;
        const double mean =
            mean_subopt(scenario, objective, u_star, ex.epsilon, K, ex.descent.c,
                        ex.descent.eta, ex.seeds, ex.adjacency,
                        ex.descent.is_private, ex.threads, &rows);
        res.grid.push_back(kd);
        res.mean_rel_subopt.push_back(mean);
        for (CsvRow& r : rows) res.rows.push_back(std::move(r));
      }
      break;
    }
    case SweepAxis::C: {
      for (double c : ex.c_grid) {
        std::vector<CsvRow> rows;
        const double mean =
            mean_subopt(scenario, objective, u_star, ex.epsilon, ex.descent.K, c,
                        ex.descent.eta, ex.seeds, ex.adjacency,
                        ex.descent.is_private, ex.threads, &rows);
        res.grid.push_back(c);
        res.mean_rel_subopt.push_back(mean);
        for (CsvRow& r : rows) res.rows.push_back(std::move(r));
      }
      break;
    }
    case SweepAxis::None:
      throw ConfigError("sweep requires a sweep axis");
  }
  return res;
}

}  // namespace dpopt
