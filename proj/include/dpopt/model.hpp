#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dpopt/errors.hpp"
#include "dpopt/linalg.hpp"
#include "dpopt/projection.hpp"

namespace dpopt {

// One user's private constraint parameters: the per-slot rate caps and the
// total energy requirement, defining the set {0 <= r <= rate_cap, 1'r = energy}.
// Rates are in kW per 15-minute slot; energy is pre-normalized against the
// slot length so both carry the same unit.
struct ChargingSpec {
  Vec rate_cap;
  double energy = 0.0;

  void validate() const {
    if (!all_finite(rate_cap) || !std::isfinite(energy)) {
      throw NonFiniteInput("ChargingSpec");
    }
    for (double v : rate_cap) {
      if (v < 0.0) throw InfeasibleSpec("negative rate cap");
    }
    if (energy < 0.0) throw InfeasibleSpec("negative energy");
    if (sum(rate_cap) < energy) {
      throw InfeasibleSpec("cap sum " + std::to_string(sum(rate_cap)) +
                           " < energy " + std::to_string(energy));
    }
  }

  BoxBudgetSet constraint_set() const { return BoxBudgetSet{rate_cap, energy}; }
};

// Radii of the adjacency relation: one user's rate caps may change by at most
// delta_r in l1 and the energy by at most delta_E.
struct AdjacencyParams {
  double delta_r = 0.0;
  double delta_E = 0.0;

  void validate() const {
    if (delta_r < 0.0 || delta_E < 0.0) throw NonPositiveParam("adjacency radii");
  }
};

struct PrivacyParams {
  double epsilon = 0.0;
  AdjacencyParams adjacency;
  double delta_proj = 0.0;  // l2-sensitivity of the projection: 2*delta_r + delta_E

  static PrivacyParams make(double epsilon, AdjacencyParams adj) {
    adj.validate();
    if (!(epsilon > 0.0)) throw NonPositiveParam("epsilon");
    return PrivacyParams{epsilon, adj, 2.0 * adj.delta_r + adj.delta_E};
  }
};

// A full problem instance. Users are partitioned into groups that share one
// charging spec (and one initial iterate), so the per-iteration projection is
// computed once per group and weighted by n/N users.
struct Scenario {
  std::size_t horizon = 0;       // T
  std::size_t n_users = 0;       // n
  std::size_t n_households = 0;  // m
  std::size_t n_groups = 0;      // N, divides n
  std::vector<ChargingSpec> group_specs;
  Vec base_load;  // d, kW per household
  double gamma = 0.0;  // n / m

  double group_weight() const {
    return static_cast<double>(n_users) / static_cast<double>(n_groups);
  }
};

struct ScenarioConfig {
  std::size_t horizon = 0;
  std::size_t n_users = 0;
  std::size_t n_households = 0;
  std::vector<ChargingSpec> group_specs;
  Vec base_load;
};

inline Scenario build_scenario(const ScenarioConfig& config) {
  if (config.horizon == 0 || config.n_users == 0 || config.n_households == 0 ||
      config.group_specs.empty()) {
    throw NonPositiveCount("scenario counts must be positive");
  }
  const std::size_t n_groups = config.group_specs.size();
  if (config.n_users % n_groups != 0) {
    throw NonPositiveCount("group count must divide user count");
  }
  if (config.base_load.size() != config.horizon) {
    throw DimensionMismatch("base load length vs horizon");
  }
  if (!all_finite(config.base_load)) throw NonFiniteInput("base load");
  for (const ChargingSpec& spec : config.group_specs) {
    if (spec.rate_cap.size() != config.horizon) {
      throw DimensionMismatch("rate cap length vs horizon");
    }
    spec.validate();
  }
  Scenario s;
  s.horizon = config.horizon;
  s.n_users = config.n_users;
  s.n_households = config.n_households;
  s.n_groups = n_groups;
  s.group_specs = config.group_specs;
  s.base_load = config.base_load;
  s.gamma = static_cast<double>(config.n_users) / static_cast<double>(config.n_households);
  return s;
}

}  // namespace dpopt
