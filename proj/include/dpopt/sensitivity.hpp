#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dpopt/errors.hpp"
#include "dpopt/linalg.hpp"
#include "dpopt/model.hpp"
#include "dpopt/projection.hpp"
#include "dpopt/rng.hpp"

namespace dpopt {

namespace detail {

// Active pattern of a projection output: -1 at the lower bound, +1 at the
// cap, 0 interior. Strict complementarity is not observable from x alone, so
// degeneracy is detected by pattern instability under a +-h perturbation.
inline std::vector<int> active_pattern(const Vec& x, const Vec& a, double tol) {
  std::vector<int> p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= tol) p[i] = -1;
    else if (x[i] >= a[i] - tol) p[i] = 1;
    else p[i] = 0;
  }
  return p;
}

}  // namespace detail

// Finite-difference derivative of the projection with respect to the budget.
// On non-degenerate instances the entries are nonnegative and sum to one.
inline Vec local_sensitivity_b(const Vec& x0, const Vec& a, double b, double h) {
  const double cap_sum = sum(a);
  if (b - h <= 0.0 || b + h >= cap_sum) {
    throw DegenerateInstance("budget within h of the feasible boundary");
  }
  const Vec lo = project(x0, BoxBudgetSet{a, b - h});
  const Vec mid = project(x0, BoxBudgetSet{a, b});
  const Vec hi = project(x0, BoxBudgetSet{a, b + h});

  const double act_tol = 1e-12;
  const auto p_lo = detail::active_pattern(lo, a, act_tol);
  const auto p_mid = detail::active_pattern(mid, a, act_tol);
  const auto p_hi = detail::active_pattern(hi, a, act_tol);
  if (p_lo != p_mid || p_mid != p_hi) {
    throw DegenerateInstance("active set changes within +-h of b");
  }

  Vec d(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) d[i] = (hi[i] - lo[i]) / (2.0 * h);
  return d;
}

// Finite-difference derivative of the projection with respect to each cap.
// Column j approximates d x* / d a_j and has l1 norm at most two. When at
// most one cap binds at the optimum the column norms also sum to at most
// two; with several caps simultaneously active the total can exceed it.
inline std::vector<Vec> local_sensitivity_a(const Vec& x0, const Vec& a, double b,
                                            double h) {
  const std::size_t T = a.size();
  std::vector<Vec> cols(T, Vec(T, 0.0));
  const double act_tol = 1e-12;
  for (std::size_t j = 0; j < T; ++j) {
    if (a[j] - h <= 0.0) throw DegenerateInstance("cap within h of zero");
    Vec a_lo = a, a_hi = a;
    a_lo[j] -= h;
    a_hi[j] += h;
    if (sum(a_lo) < b) throw DegenerateInstance("caps within h of the budget");
    const Vec lo = project(x0, BoxBudgetSet{a_lo, b});
    const Vec mid = project(x0, BoxBudgetSet{a, b});
    const Vec hi = project(x0, BoxBudgetSet{a_hi, b});
    const auto p_lo = detail::active_pattern(lo, a_lo, act_tol);
    const auto p_mid = detail::active_pattern(mid, a, act_tol);
    const auto p_hi = detail::active_pattern(hi, a_hi, act_tol);
    if (p_lo != p_mid || p_mid != p_hi) {
      throw DegenerateInstance("active set changes within +-h of a_" + std::to_string(j));
    }
    for (std::size_t i = 0; i < T; ++i) cols[j][i] = (hi[i] - lo[i]) / (2.0 * h);
  }
  return cols;
}

// Measured l1 distance between projections under a budget change; equal to
// |b' - b| whenever both budgets are feasible.
inline double global_sensitivity_b(const Vec& x0, const Vec& a, double b, double b2) {
  const Vec x = project(x0, BoxBudgetSet{a, b});
  const Vec y = project(x0, BoxBudgetSet{a, b2});
  return dist1(x, y);
}

// Measured l1 distance between projections under a cap change; at most
// 2 * ||a' - a||_1.
inline double global_sensitivity_a(const Vec& x0, const Vec& a, const Vec& a2,
                                   double b) {
  const Vec x = project(x0, BoxBudgetSet{a, b});
  const Vec y = project(x0, BoxBudgetSet{a2, b});
  return dist1(x, y);
}

struct SensitivityReport {
  std::size_t horizon = 0;
  std::size_t trials = 0;
  double delta_r = 0.0;
  double delta_E = 0.0;
  double bound = 0.0;           // 2*delta_r + delta_E
  double max_l2 = 0.0;          // worst observed projection deviation
  double max_l1 = 0.0;
  double max_l1_bound_ratio = 0.0;  // max of l1 distance / (2||da||_1 + |db|)
  bool violated = false;
};

namespace detail {

// Probe points: half scaled Gaussians, half Cauchy-tailed, stressing the
// projection both near and far outside the feasible set.
inline Vec random_probe_point(std::size_t T, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::cauchy_distribution<double> cauchy(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const bool heavy = coin(rng);
  Vec r(T);
  for (std::size_t i = 0; i < T; ++i) {
    r[i] = scale * (heavy ? cauchy(rng) : gauss(rng));
  }
  return r;
}

}  // namespace detail

// Monte Carlo check of the projection's l2-sensitivity over adjacent specs:
// random probe points, random feasible (a', b') with ||a'-a||_1 <= delta_r and
// |b'-b| <= delta_E, recording the worst l2 deviation against 2*dr + dE.
inline SensitivityReport adjacency_probe(const ChargingSpec& spec,
                                         const AdjacencyParams& adj,
                                         std::size_t trials, std::uint64_t seed) {
  spec.validate();
  adj.validate();
  const std::size_t T = spec.rate_cap.size();
  const double scale = std::max(1.0, norm_inf(spec.rate_cap));

  SensitivityReport rep;
  rep.horizon = T;
  rep.trials = trials;
  rep.delta_r = adj.delta_r;
  rep.delta_E = adj.delta_E;
  rep.bound = 2.0 * adj.delta_r + adj.delta_E;

  const BoxBudgetSet base{spec.rate_cap, spec.energy};

  for (std::size_t trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng = make_stream(seed, trial + 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // adjacent caps: random direction, l1 length uniform in [0, delta_r],
    // clipped at zero from below
    Vec a2 = spec.rate_cap;
    double da_l1 = 0.0;
    if (adj.delta_r > 0.0) {
      Vec dir(T);
      for (std::size_t i = 0; i < T; ++i) dir[i] = gauss(rng);
      const double l1 = norm1(dir);
      const double len = unit(rng) * adj.delta_r;
      double used = 0.0;
      for (std::size_t i = 0; i < T; ++i) {
        const double step = len * dir[i] / l1;
        const double next = std::max(0.0, a2[i] + step);
        used += std::abs(next - a2[i]);
        a2[i] = next;
      }
      da_l1 = used;
    }
    // adjacent budget: uniform within +-delta_E, clipped to feasibility
    double b2 = spec.energy;
    if (adj.delta_E > 0.0) {
      b2 = spec.energy + (2.0 * unit(rng) - 1.0) * adj.delta_E;
    }
    b2 = std::clamp(b2, 0.0, sum(a2));
    const double db = std::abs(b2 - spec.energy);

    const Vec r = detail::random_probe_point(T, scale, rng);
    const Vec x = project(r, base);
    const Vec y = project(r, BoxBudgetSet{a2, b2});
    const double l2 = dist2(x, y);
    const double l1 = dist1(x, y);
    rep.max_l2 = std::max(rep.max_l2, l2);
    rep.max_l1 = std::max(rep.max_l1, l1);
    const double pair_bound = 2.0 * da_l1 + db;
    if (pair_bound > 1e-12) {
      rep.max_l1_bound_ratio = std::max(rep.max_l1_bound_ratio, l1 / pair_bound);
    }
    if (l2 > rep.bound + 1e-9 || l1 > pair_bound + 1e-9) rep.violated = true;
  }
  return rep;
}

}  // namespace dpopt
