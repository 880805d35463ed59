#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "dpopt/errors.hpp"
#include "dpopt/linalg.hpp"

namespace dpopt {

// The box-plus-budget constraint family {x : 0 <= x <= a, 1'x = b}.
struct BoxBudgetSet {
  Vec a;     // per-coordinate upper caps, all >= 0
  double b;  // budget, 0 <= b <= sum(a)

  std::size_t dim() const { return a.size(); }

  void validate() const {
    if (!all_finite(a) || !std::isfinite(b)) throw NonFiniteInput("BoxBudgetSet");
    for (double v : a) {
      if (v < 0.0) throw InfeasibleSet("negative cap");
    }
    if (b < 0.0) throw InfeasibleSet("negative budget");
    if (b > sum(a)) throw InfeasibleSet("budget exceeds cap sum");
  }

  bool contains(std::span<const double> x, double tol) const {
    if (x.size() != a.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < -tol || x[i] > a[i] + tol) return false;
    }
    return std::abs(sum(x) - b) <= tol * std::max(1.0, std::abs(b));
  }
};

namespace detail {

inline Vec clamp_shift(std::span<const double> x0, std::span<const double> a, double nu) {
  Vec x(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    x[i] = std::clamp(x0[i] + nu, 0.0, a[i]);
  }
  return x;
}

}  // namespace detail

// Euclidean projection of x0 onto {x : 0 <= x <= a, 1'x = b} via the dual
// water-filling form x*(nu) = clamp(x0 + nu, 0, a). The budget function
// g(nu) = 1'x*(nu) is piecewise linear and nondecreasing; nu is located by an
// exact scan over the sorted 2T breakpoints {-x0_i, a_i - x0_i}, O(T log T).
inline Vec project(std::span<const double> x0, const BoxBudgetSet& set) {
  set.validate();
  if (x0.size() != set.a.size()) throw DimensionMismatch("project: x0 vs caps");
  if (!all_finite(x0)) throw NonFiniteInput("project: x0");

  const std::size_t T = x0.size();
  const Vec& a = set.a;
  const double b = set.b;
  const double cap_sum = sum(a);

  if (b == 0.0) return Vec(T, 0.0);
  if (b == cap_sum) return a;

  // Events: at nu = -x0_i coordinate i leaves the lower clamp (slope +1);
  // at nu = a_i - x0_i it hits the upper clamp (slope -1, constant +a_i).
  struct Event {
    double nu;
    std::size_t idx;
    bool is_cap;
  };
  std::vector<Event> events;
  events.reserve(2 * T);
  for (std::size_t i = 0; i < T; ++i) {
    events.push_back({-x0[i], i, false});
    events.push_back({a[i] - x0[i], i, true});
  }
  std::sort(events.begin(), events.end(), [](const Event& l, const Event& r) {
    if (l.nu != r.nu) return l.nu < r.nu;
    return l.is_cap < r.is_cap;  // free before cap at ties (zero-cap coords)
  });

  // State between events: g(nu) = sum_capped + n_free * nu + sum_x0_free.
  double sum_capped = 0.0;
  double sum_x0_free = 0.0;
  std::size_t n_free = 0;
  double prev_nu = -std::numeric_limits<double>::infinity();

  for (const Event& e : events) {
    const double g_here = sum_capped + static_cast<double>(n_free) * e.nu + sum_x0_free;
    if (g_here >= b) {
      double nu;
      if (n_free > 0) {
        nu = e.nu - (g_here - b) / static_cast<double>(n_free);
      } else {
        // flat segment already at level b; take the left endpoint
        nu = prev_nu;
      }
      return detail::clamp_shift(x0, a, nu);
    }
    if (e.is_cap) {
      --n_free;
      sum_x0_free -= x0[e.idx];
      sum_capped += a[e.idx];
    } else {
      ++n_free;
      sum_x0_free += x0[e.idx];
    }
    prev_nu = e.nu;
  }
  // g reaches sum(a) only past the last event; b <= sum(a) was checked, so
  // floating-point slack at b == sum(a) lands here.
  return a;
}

// Exhaustive active-set oracle: enumerate all 3^T patterns (each coordinate at
// its lower bound, at its cap, or free with x_i = x0_i + nu), solve for nu,
// and return the pattern satisfying primal feasibility and the KKT sign
// conditions. Exponential; restricted to T <= 10.
inline Vec project_oracle(std::span<const double> x0, const BoxBudgetSet& set) {
  set.validate();
  if (x0.size() != set.a.size()) throw DimensionMismatch("project_oracle: x0 vs caps");
  const std::size_t T = x0.size();
  if (T > 10) throw TooLarge("project_oracle: T > 10");

  const Vec& a = set.a;
  const double b = set.b;
  const double tol = 1e-9;

  std::size_t n_patterns = 1;
  for (std::size_t i = 0; i < T; ++i) n_patterns *= 3;

  for (std::size_t code = 0; code < n_patterns; ++code) {
    // digit 0: x_i = 0; digit 1: x_i = a_i; digit 2: free
    std::size_t c = code;
    double cap_mass = 0.0;
    double free_x0 = 0.0;
    std::size_t n_interior = 0;
    std::vector<int> state(T);
    for (std::size_t i = 0; i < T; ++i) {
      state[i] = static_cast<int>(c % 3);
      c /= 3;
      if (state[i] == 1) cap_mass += a[i];
      if (state[i] == 2) {
        free_x0 += x0[i];
        ++n_interior;
      }
    }

    double nu;
    if (n_interior > 0) {
      nu = (b - cap_mass - free_x0) / static_cast<double>(n_interior);
    } else {
      if (std::abs(cap_mass - b) > tol * std::max(1.0, std::abs(b))) continue;
      // nu only needs to satisfy the sign conditions; pick any point of the
      // admissible interval [max over capped (a_i - x0_i), min over lower -x0_i]
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < T; ++i) {
        if (state[i] == 1) lo = std::max(lo, a[i] - x0[i]);
        if (state[i] == 0) hi = std::min(hi, -x0[i]);
      }
      if (lo > hi + tol) continue;
      nu = std::clamp(0.0, lo, hi);
    }

    bool ok = true;
    Vec x(T);
    for (std::size_t i = 0; i < T && ok; ++i) {
      const double s = x0[i] + nu;
      switch (state[i]) {
        case 0:  // lower active: multiplier lambda_i = -(x0_i + nu) >= 0
          x[i] = 0.0;
          if (s > tol) ok = false;
          break;
        case 1:  // cap active: multiplier mu_i = x0_i + nu - a_i >= 0
          x[i] = a[i];
          if (s < a[i] - tol) ok = false;
          break;
        default:  // interior: 0 <= x0_i + nu <= a_i
          x[i] = s;
          if (s < -tol || s > a[i] + tol) ok = false;
          break;
      }
    }
    if (ok) return x;
  }
  throw InfeasibleSet("project_oracle: no KKT pattern found");
}

// Worst violation of the KKT system at x for the projection of x0 onto the
// set: stationarity x - x0 - lambda + mu - nu*1 = 0, primal feasibility,
// dual feasibility, complementary slackness. Multipliers are reconstructed
// from the active pattern of x.
inline double kkt_residual(std::span<const double> x, std::span<const double> x0,
                           const BoxBudgetSet& set) {
  const std::size_t T = x.size();
  const Vec& a = set.a;
  const double act_tol = 1e-9;

  // nu from any interior coordinate; otherwise any value in the admissible
  // interval (midpoint of [lo, hi]).
  double nu = 0.0;
  bool have_interior = false;
  for (std::size_t i = 0; i < T; ++i) {
    if (x[i] > act_tol && x[i] < a[i] - act_tol) {
      nu = x[i] - x0[i];
      have_interior = true;
      break;
    }
  }
  if (!have_interior) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < T; ++i) {
      if (x[i] >= a[i] - act_tol) lo = std::max(lo, a[i] - x0[i]);
      else hi = std::min(hi, -x0[i]);
    }
    if (lo == -std::numeric_limits<double>::infinity()) nu = hi;
    else if (hi == std::numeric_limits<double>::infinity()) nu = lo;
    else nu = 0.5 * (lo + hi);
  }

  double res = std::abs(sum(x) - set.b);
  for (std::size_t i = 0; i < T; ++i) {
    res = std::max(res, -x[i]);
    res = std::max(res, x[i] - a[i]);
    double lambda = 0.0, mu = 0.0;
    const double g = x[i] - x0[i] - nu;  // = lambda_i - mu_i
    if (g >= 0.0) lambda = g; else mu = -g;
    res = std::max(res, -lambda);
    res = std::max(res, -mu);
    res = std::max(res, std::abs(lambda * x[i]));
    res = std::max(res, std::abs(mu * (x[i] - a[i])));
  }
  return res;
}

}  // namespace dpopt
