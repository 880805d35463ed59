#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dpopt/privacy.hpp"
#include "dpopt/rng.hpp"

using namespace dpopt;

namespace {

// Erlang CDF: P(R <= x) for R ~ Gamma(shape = T integer, scale = lambda).
double gamma_cdf(double x, std::size_t T, double lambda) {
  const double z = x / lambda;
  double term = 1.0;  // z^0 / 0!
  double acc = 1.0;
  for (std::size_t k = 1; k < T; ++k) {
    term *= z / static_cast<double>(k);
    acc += term;
  }
  return 1.0 - std::exp(-z) * acc;
}

}  // namespace

TEST_CASE("schedule values for K=6") {
  const NoiseSchedule s = build_schedule(6, 1.0, 1.0, 0.1);
  REQUIRE(s.per_step_epsilon.size() == 6);
  for (std::size_t k = 1; k <= 6; ++k) {
    CHECK(s.per_step_epsilon[k - 1] ==
          doctest::Approx(static_cast<double>(k - 1) / 150.0).epsilon(1e-15));
  }
  double total = 0.0;
  for (double e : s.per_step_epsilon) total += e;
  CHECK(total == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("noise scale from the study constants") {
  const double m = 500000.0;
  const double L = 1.0 / (m * m);
  const NoiseSchedule s = build_schedule(6, L, 38.4, 0.1);
  CHECK(s.lambda == doctest::Approx(2.304e-8).epsilon(1e-12));
  // per-step sensitivity over per-step budget is the shared scale
  for (std::size_t k = 2; k <= 6; ++k) {
    CHECK(s.per_step_sensitivity[k - 1] / s.per_step_epsilon[k - 1] ==
          doctest::Approx(s.lambda).epsilon(1e-12));
  }
}

TEST_CASE("smallest valid K") {
  const NoiseSchedule s = build_schedule(2, 1.0, 1.0, 1.0);
  CHECK(s.lambda == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.per_step_epsilon[0] == 0.0);
  CHECK(s.per_step_epsilon[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("schedule rejects bad parameters") {
  CHECK_THROWS_AS(build_schedule(1, 1.0, 1.0, 1.0), BadK);
  CHECK_THROWS_AS(build_schedule(6, 0.0, 1.0, 1.0), NonPositiveParam);
  CHECK_THROWS_AS(build_schedule(6, 1.0, -1.0, 1.0), NonPositiveParam);
  CHECK_THROWS_AS(build_schedule(6, 1.0, 1.0, 0.0), NonPositiveParam);
}

TEST_CASE("sensitivity bound arithmetic") {
  CHECK(sensitivity_bound(AdjacencyParams{13.2, 12.0}) ==
        doctest::Approx(38.4).epsilon(1e-15));
  CHECK(sensitivity_bound(AdjacencyParams{0.0, 0.0}) == 0.0);
  CHECK(sensitivity_bound(AdjacencyParams{1.0, 0.0}) == 2.0);
}

TEST_CASE("budget accounting") {
  const NoiseSchedule s = build_schedule(6, 1.0, 1.0, 0.1);
  CHECK(budget_spent(s, 0) == 0.0);
  CHECK(budget_spent(s, 1) == 0.0);
  CHECK(budget_spent(s, 3) == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(budget_spent(s, 6) == 0.1);  // exact at the final step
  double prev = 0.0;
  for (std::size_t k = 0; k <= 6; ++k) {
    const double b = budget_spent(s, k);
    CHECK(b >= prev);
    prev = b;
  }
  CHECK_THROWS_AS(budget_spent(s, 7), IndexOutOfRange);
}

TEST_CASE("first step is noiseless") {
  const NoiseSchedule s = build_schedule(6, 1.0, 1.0, 0.1);
  std::mt19937_64 rng = make_stream(1, 0);
  const NoiseDraw d = sample_noise(s, 1, 52, rng);
  CHECK(d.norm == 0.0);
  for (double v : d.w) CHECK(v == 0.0);
  CHECK_THROWS_AS(sample_noise(s, 0, 52, rng), IndexOutOfRange);
  CHECK_THROWS_AS(sample_noise(s, 7, 52, rng), IndexOutOfRange);
}

TEST_CASE("radial law moments and distribution") {
  const std::size_t T = 52;
  const std::size_t draws = 100000;
  const NoiseSchedule s = build_schedule(6, 1.0, 1.0, 0.1);  // lambda = 150
  std::mt19937_64 rng = make_stream(3, 0);

  std::vector<double> norms;
  norms.reserve(draws);
  CompensatedSum m1, m2;
  for (std::size_t i = 0; i < draws; ++i) {
    const NoiseDraw d = sample_noise(s, 2, T, rng);
    CHECK(std::abs(norm2(d.w) - d.norm) <= 1e-9 * d.norm);
    norms.push_back(d.norm);
    m1.add(d.norm);
    m2.add(d.norm * d.norm);
  }
  const double Td = static_cast<double>(T);
  const double mean1 = m1.value() / static_cast<double>(draws);
  const double mean2 = m2.value() / static_cast<double>(draws);
  CHECK(std::abs(mean1 - Td * s.lambda) / (Td * s.lambda) < 0.02);
  const double exact2 = Td * (Td + 1.0) * s.lambda * s.lambda;
  CHECK(std::abs(mean2 - exact2) / exact2 < 0.05);
  CHECK(mean2 < 2.0 * Td * Td * s.lambda * s.lambda);

  // Kolmogorov-Smirnov against the Gamma(T, lambda) CDF at significance 1e-3
  std::sort(norms.begin(), norms.end());
  double D = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double F = gamma_cdf(norms[i], T, s.lambda);
    const double lo = static_cast<double>(i) / static_cast<double>(draws);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(draws);
    D = std::max({D, std::abs(F - lo), std::abs(F - hi)});
  }
  const double crit = 1.9495 / std::sqrt(static_cast<double>(draws));
  CHECK(D < crit);
}

TEST_CASE("direction isotropy") {
  const std::size_t T = 8;
  const std::size_t draws = 100000;
  const NoiseSchedule s = build_schedule(6, 1.0, 1.0, 0.1);
  std::mt19937_64 rng = make_stream(4, 0);

  Vec mean(T, 0.0);
  double corr01 = 0.0, corr35 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const NoiseDraw d = sample_noise(s, 3, T, rng);
    Vec u = d.w;
    for (double& v : u) v /= d.norm;
    axpy(1.0, u, mean);
    corr01 += u[0] * u[1];
    corr35 += u[3] * u[5];
  }
  const double nd = static_cast<double>(draws);
  const double tol = 4.0 / std::sqrt(nd);
  for (double v : mean) CHECK(std::abs(v / nd) < tol);
  CHECK(std::abs(corr01 / nd) < tol);
  CHECK(std::abs(corr35 / nd) < tol);
}

TEST_CASE("sampling is reproducible per stream") {
  const NoiseSchedule s = build_schedule(4, 1.0, 1.0, 0.5);
  std::mt19937_64 r1 = make_stream(10, 20);
  std::mt19937_64 r2 = make_stream(10, 20);
  const NoiseDraw a = sample_noise(s, 2, 16, r1);
  const NoiseDraw b = sample_noise(s, 2, 16, r2);
  CHECK(a.w == b.w);
  CHECK(a.norm == b.norm);
}
