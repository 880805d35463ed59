#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dpopt/projection.hpp"
#include "dpopt/rng.hpp"

using namespace dpopt;

namespace {

struct Instance {
  Vec x0;
  BoxBudgetSet set;
};

Instance random_instance(std::uint64_t seed, std::uint64_t counter) {
  std::mt19937_64 rng = make_stream(seed, counter);
  std::uniform_int_distribution<std::size_t> dim(2, 8);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> cap(0.0, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t T = dim(rng);
  Instance inst;
  inst.x0.resize(T);
  inst.set.a.resize(T);
  for (std::size_t i = 0; i < T; ++i) {
    inst.x0[i] = 2.0 * gauss(rng);
    inst.set.a[i] = cap(rng);
  }
  inst.set.b = unit(rng) * sum(inst.set.a);
  return inst;
}

}  // namespace

TEST_CASE("feasible point projects to itself") {
  const Vec x0{0.5, 0.5};
  const BoxBudgetSet set{{1.0, 1.0}, 1.0};
  const Vec x = project(x0, set);
  CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("budget equal to cap sum forces the caps") {
  const Vec x0{0.0, 0.0};
  const BoxBudgetSet set{{1.0, 1.0}, 2.0};
  const Vec x = project(x0, set);
  CHECK(x[0] == 1.0);
  CHECK(x[1] == 1.0);
}

TEST_CASE("cap-active instance") {
  const Vec x0{2.0, 0.0};
  const BoxBudgetSet set{{1.0, 1.0}, 1.0};
  const Vec fast = project(x0, set);
  const Vec slow = project_oracle(x0, set);
  CHECK(fast[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fast[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dist_inf(fast, slow) < 1e-12);
}

TEST_CASE("oracle on simple instances") {
  CHECK(dist_inf(project_oracle(Vec{0.3, 0.3, 0.3}, BoxBudgetSet{{1, 1, 1}, 0.9}),
                 Vec{0.3, 0.3, 0.3}) < 1e-12);
  CHECK(dist_inf(project_oracle(Vec{0.0, 0.0}, BoxBudgetSet{{1, 1}, 1.0}),
                 Vec{0.5, 0.5}) < 1e-12);
}

TEST_CASE("zero budget short-circuits to zero") {
  const Vec x = project(Vec{5.0, -3.0, 1.0}, BoxBudgetSet{{2, 2, 2}, 0.0});
  for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("infeasible or malformed sets are rejected") {
  CHECK_THROWS_AS(project(Vec{0.0, 0.0}, BoxBudgetSet{{1, 1}, 3.0}), InfeasibleSet);
  CHECK_THROWS_AS(project(Vec{0.0, 0.0}, BoxBudgetSet{{1, 1}, -0.5}), InfeasibleSet);
  CHECK_THROWS_AS(project(Vec{std::nan(""), 0.0}, BoxBudgetSet{{1, 1}, 1.0}),
                  NonFiniteInput);
  CHECK_THROWS_AS(project(Vec{0.0}, BoxBudgetSet{{1, 1}, 1.0}), DimensionMismatch);
  CHECK_THROWS_AS(project_oracle(Vec(11, 0.0), BoxBudgetSet{Vec(11, 1.0), 5.0}),
                  TooLarge);
}

TEST_CASE("oracle equivalence on random instances") {
  double max_err = 0.0;
  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    const Instance inst = random_instance(101, trial);
    const Vec fast = project(inst.x0, inst.set);
    const Vec slow = project_oracle(inst.x0, inst.set);
    max_err = std::max(max_err, dist_inf(fast, slow));
  }
  CHECK(max_err < 1e-8);
}

TEST_CASE("output feasibility, KKT residual, and idempotence") {
  for (std::uint64_t trial = 0; trial < 500; ++trial) {
    const Instance inst = random_instance(202, trial);
    const Vec x = project(inst.x0, inst.set);
    CHECK(inst.set.contains(x, 1e-12));
    CHECK(kkt_residual(x, inst.x0, inst.set) < 1e-10);
    const Vec xx = project(x, inst.set);
    CHECK(dist_inf(x, xx) < 1e-12);
  }
}

TEST_CASE("nonexpansiveness") {
  for (std::uint64_t trial = 0; trial < 500; ++trial) {
    const Instance inst = random_instance(303, trial);
    std::mt19937_64 rng = make_stream(304, trial);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec y(inst.x0.size());
    for (double& v : y) v = 2.0 * gauss(rng);
    const Vec px = project(inst.x0, inst.set);
    const Vec py = project(y, inst.set);
    CHECK(dist2(px, py) <= dist2(inst.x0, y) + 1e-12);
  }
}
