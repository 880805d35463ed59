#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "dpopt/errors.hpp"
#include "dpopt/linalg.hpp"
#include "dpopt/model.hpp"

namespace dpopt {

// Sensitivity of the projection operator to an adjacent spec change.
inline double sensitivity_bound(const AdjacencyParams& adj) {
  adj.validate();
  return 2.0 * adj.delta_r + adj.delta_E;
}

// Per-iteration privacy budget split and noise scale for the K-step gradient
// mechanism. The first broadcast depends only on the (public) initial iterate,
// so it is free; afterwards the budget grows linearly with the step index and
// the scale lambda = K(K-1)*L*Delta / (2*eps) is shared by all steps.
struct NoiseSchedule {
  std::size_t K = 0;
  double L = 0.0;
  double delta_proj = 0.0;
  double epsilon = 0.0;
  double lambda = 0.0;
  Vec per_step_epsilon;      // eps_k = 2(k-1) eps / (K(K-1)), k = 1..K
  Vec per_step_sensitivity;  // Delta^(k) = (k-1) L Delta
};

inline NoiseSchedule build_schedule(std::size_t K, double L, double delta_proj,
                                    double epsilon) {
  if (K < 2) throw BadK("schedule needs K >= 2");
  if (!(L > 0.0) || !(delta_proj > 0.0) || !(epsilon > 0.0)) {
    throw NonPositiveParam("schedule parameters must be positive");
  }
  NoiseSchedule s;
  s.K = K;
  s.L = L;
  s.delta_proj = delta_proj;
  s.epsilon = epsilon;
  const double pairs = static_cast<double>(K) * static_cast<double>(K - 1);
  s.lambda = pairs * L * delta_proj / (2.0 * epsilon);
  s.per_step_epsilon.resize(K);
  s.per_step_sensitivity.resize(K);
  for (std::size_t k = 1; k <= K; ++k) {
    s.per_step_epsilon[k - 1] = 2.0 * static_cast<double>(k - 1) * epsilon / pairs;
    s.per_step_sensitivity[k - 1] = static_cast<double>(k - 1) * L * delta_proj;
  }
  return s;
}

// Budget consumed by the first upto_k broadcasts: eps * k(k-1) / (K(K-1)).
// Evaluated from the closed form so the total is exact at upto_k = K.
inline double budget_spent(const NoiseSchedule& s, std::size_t upto_k) {
  if (upto_k > s.K) throw IndexOutOfRange("budget_spent");
  const double num = static_cast<double>(upto_k) * static_cast<double>(upto_k - (upto_k > 0 ? 1 : 0));
  const double den = static_cast<double>(s.K) * static_cast<double>(s.K - 1);
  return s.epsilon * (num / den);
}

struct NoiseDraw {
  Vec w;
  double norm = 0.0;
  std::size_t step_index = 0;
};

// Sample the gradient perturbation for step k: density proportional to
// exp(-||w|| / lambda) on R^T, drawn as a Gamma(T, lambda) radius times a
// uniformly random unit direction. Step 1 is noiseless.
inline NoiseDraw sample_noise(const NoiseSchedule& s, std::size_t k, std::size_t T,
                              std::mt19937_64& rng) {
  if (k < 1 || k > s.K) throw IndexOutOfRange("sample_noise");
  NoiseDraw d;
  d.step_index = k;
  d.w.assign(T, 0.0);
  if (k == 1) return d;

  std::gamma_distribution<double> radius(static_cast<double>(T), s.lambda);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double r = radius(rng);
  Vec dir(T);
  double nrm = 0.0;
  do {
    for (std::size_t i = 0; i < T; ++i) dir[i] = gauss(rng);
    nrm = norm2(dir);
  } while (nrm < 1e-300);
  for (std::size_t i = 0; i < T; ++i) d.w[i] = r * dir[i] / nrm;
  d.norm = r;
  return d;
}

}  // namespace dpopt
