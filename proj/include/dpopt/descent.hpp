#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "dpopt/errors.hpp"
#include "dpopt/linalg.hpp"
#include "dpopt/model.hpp"
#include "dpopt/privacy.hpp"
#include "dpopt/projection.hpp"
#include "dpopt/rng.hpp"

namespace dpopt {

// Objective U acting on the aggregate profile sum_i r_i, with an
// L-Lipschitz gradient.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double value(std::span<const double> aggregate) const = 0;
  virtual Vec gradient(std::span<const double> aggregate) const = 0;
  virtual double lipschitz() const = 0;
};

struct DescentConfig {
  std::size_t K = 1;       // iteration count
  double c = 1.0;          // step constant, alpha_k = c / sqrt(k)
  double eta = 1.0;        // averaging parameter, theta_k = (eta+1)/(eta+k)
  std::uint64_t seed = 0;
  bool is_private = false;
  std::size_t threads = 1;

  void validate() const {
    if (K < 1) throw NonPositiveParam("K");
    if (!(c > 0.0)) throw NonPositiveParam("step constant c");
    if (!(eta >= 1.0)) throw NonPositiveParam("eta must be >= 1");
  }
};

// Per-group iterates: r holds one representative profile per group, r_hat the
// polynomial-decay averages. The aggregate is the user-weighted row sum.
struct IterateState {
  std::vector<Vec> r;
  std::vector<Vec> r_hat;
  Vec aggregate;
  std::size_t k = 1;
};

struct IterationTrace {
  std::size_t k = 0;
  double objective = 0.0;   // U at the aggregate of the raw iterates
  double noise_norm = 0.0;  // ||w_k||
  double budget = 0.0;      // budget spent through step k
};

struct RunRecord {
  std::vector<Vec> r_hat;       // final averaged profiles, one per group
  Vec aggregate_hat;            // user-weighted aggregate of r_hat
  double objective = 0.0;       // U at aggregate_hat
  double budget_spent = 0.0;    // epsilon for completed private runs, else 0
  std::vector<IterationTrace> trace;
};

namespace detail {

inline Vec weighted_aggregate(const std::vector<Vec>& rows, double weight,
                              std::size_t T) {
  // fixed group order keeps the reduction bitwise deterministic
  Vec agg(T, 0.0);
  for (const Vec& row : rows) axpy(1.0, row, agg);
  for (double& v : agg) v *= weight;
  return agg;
}

inline void parallel_over_groups(std::size_t n_groups, std::size_t threads,
                                 const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || n_groups <= 1) {
    for (std::size_t g = 0; g < n_groups; ++g) body(g);
    return;
  }
  const std::size_t n_workers = std::min(threads, n_groups);
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t g = w; g < n_groups; g += n_workers) body(g);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace detail

// Deterministic feasible start: every group at the projection of the origin
// onto its constraint set.
inline IterateState initial_iterate(const Scenario& scenario) {
  IterateState st;
  const Vec origin(scenario.horizon, 0.0);
  st.r.reserve(scenario.n_groups);
  for (const ChargingSpec& spec : scenario.group_specs) {
    st.r.push_back(project(origin, spec.constraint_set()));
  }
  st.r_hat = st.r;
  st.aggregate = detail::weighted_aggregate(st.r, scenario.group_weight(), scenario.horizon);
  st.k = 1;
  return st;
}

// Projected gradient descent with polynomial-decay averaging, optionally with
// the calibrated gradient perturbation. The coordinator draws w_k and
// broadcasts the noisy gradient; group projections run independently.
inline RunRecord run(const Scenario& scenario, const Objective& objective,
                     const DescentConfig& config,
                     const std::optional<NoiseSchedule>& privacy,
                     const IterateState& start) {
  config.validate();
  if (config.is_private) {
    if (!privacy) throw InconsistentSchedule("private run without a schedule");
    if (privacy->K != config.K) throw InconsistentSchedule("schedule K != config K");
    if (privacy->L != objective.lipschitz()) {
      throw InconsistentSchedule("schedule L != objective L");
    }
  }

  const std::size_t T = scenario.horizon;
  const std::size_t N = scenario.n_groups;
  const double weight = scenario.group_weight();

  std::vector<Vec> r = start.r;
  std::vector<Vec> r_hat = start.r_hat;
  Vec aggregate = start.aggregate;

  std::vector<BoxBudgetSet> sets;
  sets.reserve(N);
  for (const ChargingSpec& spec : scenario.group_specs) {
    sets.push_back(spec.constraint_set());
  }

  std::mt19937_64 noise_rng = make_stream(config.seed, 0x6e6f697365ULL);

  RunRecord rec;
  rec.trace.reserve(config.K);

  for (std::size_t k = 1; k <= config.K; ++k) {
    Vec p = objective.gradient(aggregate);
    double noise_norm = 0.0;
    double budget = 0.0;
    if (config.is_private) {
      const NoiseDraw w = sample_noise(*privacy, k, T, noise_rng);
      axpy(1.0, w.w, p);
      noise_norm = w.norm;
      budget = budget_spent(*privacy, k);
    }
    const double alpha = config.c / std::sqrt(static_cast<double>(k));
    const double theta = (config.eta + 1.0) / (config.eta + static_cast<double>(k));

    detail::parallel_over_groups(N, config.threads, [&](std::size_t g) {
      Vec target(T);
      for (std::size_t t = 0; t < T; ++t) target[t] = r[g][t] - alpha * p[t];
      r[g] = project(target, sets[g]);
      for (std::size_t t = 0; t < T; ++t) {
        r_hat[g][t] = (1.0 - theta) * r_hat[g][t] + theta * r[g][t];
      }
    });

    aggregate = detail::weighted_aggregate(r, weight, T);
    rec.trace.push_back({k, objective.value(aggregate), noise_norm, budget});
  }

  rec.r_hat = std::move(r_hat);
  rec.aggregate_hat = detail::weighted_aggregate(rec.r_hat, weight, T);
  rec.objective = objective.value(rec.aggregate_hat);
  rec.budget_spent = config.is_private ? budget_spent(*privacy, config.K) : 0.0;
  return rec;
}

inline RunRecord run(const Scenario& scenario, const Objective& objective,
                     const DescentConfig& config,
                     const std::optional<NoiseSchedule>& privacy = std::nullopt) {
  return run(scenario, objective, config, privacy, initial_iterate(scenario));
}

struct Suboptimality {
  double absolute = 0.0;
  double relative = 0.0;
};

inline Suboptimality suboptimality(const RunRecord& record, double reference) {
  if (!(reference > 0.0)) throw NonPositiveReference("U* must be positive");
  const double abs = record.objective - reference;
  return Suboptimality{abs, abs / reference};
}

// Reference optimum by fixed-step projected gradient iterated to a fixed
// point. The step 1/(L * sum_g w_g^2) equals the inverse Lipschitz constant
// of the stacked per-group gradient map, so the iteration is a descent method
// with a unique fixed point at the optimum.
inline double oracle_optimum(const Scenario& scenario, const Objective& objective,
                             std::optional<IterateState> start = std::nullopt,
                             double tol = 1e-12, std::size_t max_iter = 100000) {
  const std::size_t T = scenario.horizon;
  const std::size_t N = scenario.n_groups;
  const double weight = scenario.group_weight();
  const double step =
      1.0 / (objective.lipschitz() * weight * weight * static_cast<double>(N));

  std::vector<BoxBudgetSet> sets;
  sets.reserve(N);
  for (const ChargingSpec& spec : scenario.group_specs) {
    sets.push_back(spec.constraint_set());
  }

  IterateState st = start ? *start : initial_iterate(scenario);
  std::vector<Vec>& r = st.r;
  Vec aggregate = detail::weighted_aggregate(r, weight, T);

  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < max_iter; ++it) {
    const Vec p = objective.gradient(aggregate);
    residual = 0.0;
    for (std::size_t g = 0; g < N; ++g) {
      Vec target(T);
      // gradient w.r.t. the group profile carries the group weight
      for (std::size_t t = 0; t < T; ++t) target[t] = r[g][t] - step * weight * p[t];
      Vec next = project(target, sets[g]);
      residual += dist2(next, r[g]) * dist2(next, r[g]);
      r[g] = std::move(next);
    }
    residual = std::sqrt(residual);
    aggregate = detail::weighted_aggregate(r, weight, T);
    if (residual < tol) return objective.value(aggregate);
  }
  if (residual > 1e-9) throw NoConvergence("oracle_optimum: residual " + std::to_string(residual));
  return objective.value(aggregate);
}

}  // namespace dpopt
