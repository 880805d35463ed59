#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "dpopt/evcharging.hpp"
#include "dpopt/linalg.hpp"
#include "dpopt/privacy.hpp"
#include "dpopt/projection.hpp"
#include "dpopt/rng.hpp"
#include "dpopt/sensitivity.hpp"

namespace dpopt {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline std::ostream& operator<<(std::ostream& os, const CheckResult& c) {
  return os << (c.pass ? "PASS" : "FAIL") << ' ' << c.name << ": " << c.detail;
}

namespace detail {

struct RandomInstance {
  Vec x0;
  Vec a;
  double b = 0.0;
};

inline RandomInstance random_instance(std::size_t T, std::mt19937_64& rng,
                                      double margin = 0.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> cap(0.1, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RandomInstance inst;
  inst.x0.resize(T);
  inst.a.resize(T);
  for (std::size_t i = 0; i < T; ++i) {
    inst.x0[i] = 1.5 * gauss(rng);
    inst.a[i] = cap(rng);
  }
  const double cap_sum = sum(inst.a);
  inst.b = margin + unit(rng) * (cap_sum - 2.0 * margin);
  return inst;
}

inline double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// Breakpoint projection vs exhaustive active-set oracle on random instances.
inline CheckResult verify_projection_oracle(std::size_t trials = 1000,
                                            std::uint64_t seed = 2024) {
  const auto t0 = std::chrono::steady_clock::now();
  double max_err = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng = make_stream(seed, trial);
    std::uniform_int_distribution<std::size_t> dim(2, 8);
    const std::size_t T = dim(rng);
    const auto inst = detail::random_instance(T, rng);
    const BoxBudgetSet set{inst.a, inst.b};
    const Vec fast = project(inst.x0, set);
    const Vec slow = project_oracle(inst.x0, set);
    max_err = std::max(max_err, dist_inf(fast, slow));
  }
  CheckResult c;
  c.name = "projection-oracle equivalence";
  c.pass = max_err < 1e-8;
  c.detail = std::to_string(trials) + " instances, max linf error " +
             std::to_string(max_err) + ", " + std::to_string(detail::elapsed_s(t0)) + " s";
  return c;
}

// ||x*(a,b') - x*(a,b)||_1 == |b' - b| on random feasible instances.
inline CheckResult verify_global_sensitivity_b(std::size_t trials = 500,
                                               std::uint64_t seed = 11) {
  double worst = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng = make_stream(seed, trial);
    std::uniform_int_distribution<std::size_t> dim(2, 8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t T = dim(rng);
    const auto inst = detail::random_instance(T, rng);
    const double b2 = unit(rng) * sum(inst.a);
    const double measured = global_sensitivity_b(inst.x0, inst.a, inst.b, b2);
    worst = std::max(worst, std::abs(measured - std::abs(b2 - inst.b)));
  }
  CheckResult c;
  c.name = "global b-sensitivity equality";
  c.pass = worst < 1e-9;
  c.detail = std::to_string(trials) + " instances, worst deviation " + std::to_string(worst);
  return c;
}

// ||x*(a',b) - x*(a,b)||_1 <= 2||a' - a||_1, plus a constructed tight pair.
inline CheckResult verify_global_sensitivity_a(std::size_t trials = 500,
                                               std::uint64_t seed = 12) {
  double worst_excess = -1e300;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng = make_stream(seed, trial);
    std::uniform_int_distribution<std::size_t> dim(2, 8);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t T = dim(rng);
    auto inst = detail::random_instance(T, rng);
    Vec a2 = inst.a;
    do {  // both cap vectors must stay feasible for b
      for (std::size_t i = 0; i < T; ++i) {
        a2[i] = std::max(0.0, inst.a[i] + 0.3 * gauss(rng));
      }
    } while (sum(a2) < inst.b);
    const double measured = global_sensitivity_a(inst.x0, inst.a, a2, inst.b);
    worst_excess = std::max(worst_excess, measured - 2.0 * dist1(inst.a, a2));
  }
  // tight case: x0 pushed onto a capped coordinate; lowering that cap moves
  // the solution by twice the cap change
  const Vec x0{2.0, 0.0};
  const Vec a{1.0, 1.0};
  const Vec a2{0.5, 1.0};
  const double tight = global_sensitivity_a(x0, a, a2, 1.0);
  const double ratio = tight / (2.0 * dist1(a, a2));

  CheckResult c;
  c.name = "global a-sensitivity bound";
  c.pass = worst_excess <= 1e-9 && ratio > 0.99;
  c.detail = "worst excess over 2||da||_1: " + std::to_string(worst_excess) +
             ", tight-case ratio " + std::to_string(ratio);
  return c;
}

// Monte Carlo probe of the projection sensitivity bound with the default
// EV adjacency constants.
inline CheckResult verify_sensitivity_probe(std::size_t trials = 10000,
                                            std::uint64_t seed = 77) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t T = 52;
  const auto specs = generate_specs(1, T, seed);
  const AdjacencyParams adj{13.2, 12.0};
  const SensitivityReport rep = adjacency_probe(specs[0], adj, trials, seed);
  CheckResult c;
  c.name = "projection sensitivity probe";
  c.pass = !rep.violated && rep.max_l2 <= rep.bound + 1e-9;
  c.detail = "max l2 deviation " + std::to_string(rep.max_l2) + " vs bound " +
             std::to_string(rep.bound) + " over " + std::to_string(trials) +
             " trials, " + std::to_string(detail::elapsed_s(t0)) + " s";
  return c;
}

// Finite-difference local sensitivities on non-degenerate random instances.
// d/db entries are nonnegative and sum to one. Every cap column has l1 norm
// at most two; the column norms additionally sum to at most two when no more
// than one cap binds at the optimum. Instances with several simultaneously
// active caps sit on the boundary of that regime and are excluded from the
// total-norm check (their fraction is reported), while the per-column bound
// is still enforced on them.
inline CheckResult verify_local_sensitivities(std::size_t trials_b = 1000,
                                              std::size_t trials_a = 400,
                                              std::uint64_t seed = 13) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t skipped = 0;
  std::size_t multi_cap = 0;
  double worst_entry = 0.0;
  double worst_sum = 0.0;
  double worst_a_col = 0.0;
  double worst_a_total = 0.0;
  const double h = 1e-5;

  for (std::size_t trial = 0; trial < trials_b; ++trial) {
    std::mt19937_64 rng = make_stream(seed, trial);
    std::uniform_int_distribution<std::size_t> dim(2, 8);
    const std::size_t T = dim(rng);
    const auto inst = detail::random_instance(T, rng, 10.0 * h);
    try {
      const Vec d = local_sensitivity_b(inst.x0, inst.a, inst.b, h);
      for (double v : d) worst_entry = std::min(worst_entry, v);
      worst_sum = std::max(worst_sum, std::abs(sum(d) - 1.0));
    } catch (const DegenerateInstance&) {
      ++skipped;
    }
  }
  for (std::size_t trial = 0; trial < trials_a; ++trial) {
    std::mt19937_64 rng = make_stream(seed + 1, trial);
    std::uniform_int_distribution<std::size_t> dim(2, 8);
    const std::size_t T = dim(rng);
    const auto inst = detail::random_instance(T, rng, 10.0 * h);
    try {
      const auto cols = local_sensitivity_a(inst.x0, inst.a, inst.b, h);
      double total = 0.0;
      for (const Vec& col : cols) {
        const double n = norm1(col);
        worst_a_col = std::max(worst_a_col, n);
        total += n;
      }
      const Vec x = project(inst.x0, BoxBudgetSet{inst.a, inst.b});
      std::size_t active_caps = 0;
      for (int p : detail::active_pattern(x, inst.a, 1e-9)) {
        if (p == 1) ++active_caps;
      }
      if (active_caps > 1) {
        ++multi_cap;
      } else {
        worst_a_total = std::max(worst_a_total, total);
      }
    } catch (const DegenerateInstance&) {
      ++skipped;
    }
  }

  const double skip_rate =
      static_cast<double>(skipped) / static_cast<double>(trials_b + trials_a);
  const double multi_cap_rate =
      static_cast<double>(multi_cap) / static_cast<double>(trials_a);
  CheckResult c;
  c.name = "local sensitivity battery";
  c.pass = worst_entry >= -1e-4 && worst_sum <= 1e-4 &&
           worst_a_col <= 2.0 + 1e-3 && worst_a_total <= 2.0 + 1e-3 &&
           skip_rate < 0.01 && multi_cap_rate < 0.5;
  c.detail = "min d/db entry " + std::to_string(worst_entry) + ", sum dev " +
             std::to_string(worst_sum) + ", max cap column l1 " +
             std::to_string(worst_a_col) + ", max total cap l1 " +
             std::to_string(worst_a_total) + " (single-cap instances; " +
             std::to_string(multi_cap_rate) + " multi-cap excluded), skip rate " +
             std::to_string(skip_rate) + ", " +
             std::to_string(detail::elapsed_s(t0)) + " s";
  return c;
}

// Budget telescoping: the per-step budgets sum to epsilon for every K.
inline CheckResult verify_budget_identity(std::size_t K_max = 200,
                                          double epsilon = 0.1) {
  double worst_rel = 0.0;
  bool first_free = true;
  for (std::size_t K = 2; K <= K_max; ++K) {
    const NoiseSchedule s = build_schedule(K, 1.0, 1.0, epsilon);
    CompensatedSum total;
    for (double e : s.per_step_epsilon) total.add(e);
    worst_rel = std::max(worst_rel, std::abs(total.value() - epsilon) / epsilon);
    first_free = first_free && s.per_step_epsilon.front() == 0.0;
  }
  CheckResult c;
  c.name = "budget identity";
  c.pass = worst_rel <= 1e-15 && first_free;
  c.detail = "worst relative total error " + std::to_string(worst_rel) +
             " over K in [2," + std::to_string(K_max) + "], first step free: " +
             (first_free ? "yes" : "no");
  return c;
}

// Sample moments of the gradient noise against the Gamma radial law and the
// variance bound used in the suboptimality analysis.
inline CheckResult verify_noise_calibration(std::size_t draws = 100000,
                                            std::uint64_t seed = 5) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t T = 52;
  const std::size_t K = 6;
  const double m = 500000.0;
  const double L = 1.0 / (m * m);
  const double delta = 38.4;
  const double epsilon = 0.1;
  const NoiseSchedule s = build_schedule(K, L, delta, epsilon);

  std::mt19937_64 rng = make_stream(seed, 0);
  CompensatedSum sum_norm, sum_norm2;
  for (std::size_t i = 0; i < draws; ++i) {
    const NoiseDraw d = sample_noise(s, 2, T, rng);
    sum_norm.add(d.norm);
    sum_norm2.add(d.norm * d.norm);
  }
  const double mean_norm = sum_norm.value() / static_cast<double>(draws);
  const double mean_norm2 = sum_norm2.value() / static_cast<double>(draws);
  const double Td = static_cast<double>(T);
  const double expect_norm = Td * s.lambda;
  const double expect_norm2 = Td * (Td + 1.0) * s.lambda * s.lambda;
  const double analysis_bound = 2.0 * Td * Td * s.lambda * s.lambda;

  const double rel1 = std::abs(mean_norm - expect_norm) / expect_norm;
  const double rel2 = std::abs(mean_norm2 - expect_norm2) / expect_norm2;
  CheckResult c;
  c.name = "noise calibration";
  c.pass = rel1 < 0.02 && rel2 < 0.05 && mean_norm2 < analysis_bound;
  c.detail = "mean||w|| rel err " + std::to_string(rel1) + ", mean||w||^2 rel err " +
             std::to_string(rel2) + ", second moment " + std::to_string(mean_norm2) +
             " < bound " + std::to_string(analysis_bound) + ", " +
             std::to_string(detail::elapsed_s(t0)) + " s";
  return c;
}

// Analytic EV gradient against central finite differences of the objective.
inline CheckResult verify_gradient(std::size_t trials = 50, std::uint64_t seed = 9) {
  double worst = 0.0;
  const std::size_t T = 52;
  const std::size_t m = 50000;
  const Vec d = generate_base_load(T, BaseLoadConfig{});
  const EVObjective obj(d, m);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng = make_stream(seed, trial);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec agg(T);
    for (double& v : agg) v = 5000.0 * gauss(rng);
    const Vec g = obj.gradient(agg);
    const double scale = std::max(1.0, norm_inf(agg));
    const double h = 1e-4 * scale;
    Vec fd(T);
    for (std::size_t t = 0; t < T; ++t) {
      Vec hi = agg, lo = agg;
      hi[t] += h;
      lo[t] -= h;
      fd[t] = (obj.value(hi) - obj.value(lo)) / (2.0 * h);
    }
    worst = std::max(worst, dist2(g, fd) / std::max(1e-300, norm2(g)));
  }
  CheckResult c;
  c.name = "gradient finite-difference check";
  c.pass = worst < 1e-6;
  c.detail = "worst relative error " + std::to_string(worst) + " over " +
             std::to_string(trials) + " aggregates";
  return c;
}

}  // namespace dpopt
