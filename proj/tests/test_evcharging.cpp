#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dpopt/evcharging.hpp"
#include "dpopt/rng.hpp"

using namespace dpopt;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("evcharging_test_" + name) {
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("objective arithmetic") {
  {
    const EVObjective obj(Vec{0.0, 0.0}, 1);
    CHECK(obj.value(Vec{0.0, 0.0}) == 0.0);
    const Vec g = obj.gradient(Vec{0.0, 0.0});
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
  }
  {
    const EVObjective obj(Vec{1.0, 0.0}, 1);
    CHECK(obj.value(Vec{1.0, 2.0}) == doctest::Approx(4.0).epsilon(1e-15));
    const Vec g = obj.gradient(Vec{1.0, 2.0});
    CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(g[1] == doctest::Approx(2.0).epsilon(1e-15));
  }
  const EVObjective obj(Vec{1.0, 0.0}, 1);
  CHECK_THROWS_AS(obj.value(Vec{1.0}), DimensionMismatch);
  CHECK_THROWS_AS(obj.gradient(Vec{1.0, 2.0, 3.0}), DimensionMismatch);
}

TEST_CASE("gradient Lipschitz constant is exact for the quadratic") {
  const std::size_t T = 52;
  const std::size_t m = 50000;
  const EVObjective obj(generate_base_load(T, BaseLoadConfig{}), m);
  std::mt19937_64 rng = make_stream(15, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vec x(T), y(T);
    for (std::size_t t = 0; t < T; ++t) {
      x[t] = 1000.0 * gauss(rng);
      y[t] = 1000.0 * gauss(rng);
    }
    const Vec gx = obj.gradient(x);
    const Vec gy = obj.gradient(y);
    const double ratio = dist2(gx, gy) / dist2(x, y);
    CHECK(ratio == doctest::Approx(obj.lipschitz()).epsilon(1e-12));
  }
}

TEST_CASE("spec generation at the study horizon") {
  const auto specs = generate_specs(100, 52, 7);
  REQUIRE(specs.size() == 100);
  for (const ChargingSpec& spec : specs) {
    CHECK(sum(spec.rate_cap) >= spec.energy);
    CHECK(spec.energy >= 28.0);
    CHECK(spec.energy <= 40.0);
    for (double cap : spec.rate_cap) {
      CHECK((cap == 0.0 || cap == 3.3));
    }
  }
}

TEST_CASE("energy requirement mean matches its distribution") {
  const auto specs = generate_specs(10000, 52, 19);
  double mean = 0.0;
  for (const ChargingSpec& spec : specs) mean += spec.energy;
  mean /= static_cast<double>(specs.size());
  CHECK(std::abs(mean - 34.0) < 0.5);
}

TEST_CASE("horizon too short to absorb the energy requirement") {
  CHECK_THROWS_AS(generate_specs(1, 1, 3), FeasibilityResampleExhausted);
}

TEST_CASE("spec generation is order independent") {
  const auto all = generate_specs(20, 52, 31);
  const auto prefix = generate_specs(5, 52, 31);
  for (std::size_t g = 0; g < prefix.size(); ++g) {
    CHECK(all[g].rate_cap == prefix[g].rate_cap);
    CHECK(all[g].energy == prefix[g].energy);
  }
}

TEST_CASE("synthetic base load shape") {
  const std::size_t T = 52;
  BaseLoadConfig cfg;
  const Vec d = generate_base_load(T, cfg);
  REQUIRE(d.size() == T);
  // cosine peak at peak_slot, trough half a period later
  std::size_t argmin = 0, argmax = 0;
  for (std::size_t t = 1; t < T; ++t) {
    if (d[t] < d[argmin]) argmin = t;
    if (d[t] > d[argmax]) argmax = t;
  }
  CHECK(argmax == 10);
  CHECK(argmin == 36);
  CHECK(d[argmax] == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(d[argmin] == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("base load CSV passthrough") {
  TempFile f("ok.csv", "1.5\n2.5\n3.5\n");
  BaseLoadConfig cfg;
  cfg.source = "csv:" + f.path;
  const Vec d = generate_base_load(3, cfg);
  CHECK(d == Vec{1.5, 2.5, 3.5});
}

TEST_CASE("base load CSV error handling") {
  {
    TempFile f("short.csv", "1.0\n2.0\n");
    BaseLoadConfig cfg;
    cfg.source = "csv:" + f.path;
    CHECK_THROWS_AS(generate_base_load(3, cfg), BadCSV);
  }
  {
    TempFile f("junk.csv", "1.0\noops\n3.0\n");
    BaseLoadConfig cfg;
    cfg.source = "csv:" + f.path;
    CHECK_THROWS_AS(generate_base_load(3, cfg), BadCSV);
  }
  {
    BaseLoadConfig cfg;
    cfg.source = "csv:/nonexistent/file.csv";
    CHECK_THROWS_AS(generate_base_load(3, cfg), BadCSV);
  }
  {
    BaseLoadConfig cfg;
    cfg.source = "database";
    CHECK_THROWS_AS(generate_base_load(3, cfg), UnknownSource);
  }
}

TEST_CASE("suboptimality constants") {
  ScenarioConfig cfg;
  cfg.horizon = 2;
  cfg.n_users = 1;
  cfg.n_households = 1;
  cfg.group_specs = {ChargingSpec{{1.0, 1.0}, 1.0}};
  cfg.base_load = {0.0, 0.0};
  {
    const SuboptimalityConstants sc = subopt_constants(build_scenario(cfg));
    CHECK(sc.r_max == doctest::Approx(1.0).epsilon(1e-15));  // min(sqrt(2), 1)
    CHECK(sc.rho == doctest::Approx(1.0).epsilon(1e-15));
  }
  cfg.n_users = 100;
  cfg.n_households = 100;
  {
    const SuboptimalityConstants sc = subopt_constants(build_scenario(cfg));
    CHECK(sc.rho == doctest::Approx(10.0).epsilon(1e-15));
  }
}

TEST_CASE("spec dump format") {
  const std::vector<ChargingSpec> specs = {ChargingSpec{{3.3, 0.0}, 2.0}};
  std::ostringstream out;
  dump_specs_csv(specs, out);
  CHECK(out.str() == "group,t,rate_cap,energy\n0,0,3.3,2\n0,1,0,2\n");
}
