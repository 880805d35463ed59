#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dpopt/descent.hpp"
#include "dpopt/errors.hpp"
#include "dpopt/linalg.hpp"
#include "dpopt/model.hpp"
#include "dpopt/rng.hpp"

namespace dpopt {

// Load-variance objective: U(agg) = 0.5 * ||d + agg/m||^2, where d is the
// per-household base load and agg/m the aggregate EV load per household.
class EVObjective : public Objective {
 public:
  EVObjective(Vec base_load, std::size_t m)
      : base_load_(std::move(base_load)), m_(static_cast<double>(m)) {
    if (m == 0) throw NonPositiveCount("household count");
  }

  double value(std::span<const double> aggregate) const override {
    require_same_size(aggregate, base_load_, "EVObjective::value");
    double s = 0.0;
    for (std::size_t t = 0; t < base_load_.size(); ++t) {
      const double v = base_load_[t] + aggregate[t] / m_;
      s += v * v;
    }
    return 0.5 * s;
  }

  Vec gradient(std::span<const double> aggregate) const override {
    require_same_size(aggregate, base_load_, "EVObjective::gradient");
    Vec g(base_load_.size());
    for (std::size_t t = 0; t < base_load_.size(); ++t) {
      g[t] = (base_load_[t] + aggregate[t] / m_) / m_;
    }
    return g;
  }

  double lipschitz() const override { return 1.0 / (m_ * m_); }

  const Vec& base_load() const { return base_load_; }

 private:
  Vec base_load_;
  double m_;
};

// Random group specs: each slot's cap is 3.3 kW with probability 1/2 and 0
// otherwise; the energy requirement is uniform on [28, 40] kW. Specs that
// cannot absorb their energy are redrawn.
inline std::vector<ChargingSpec> generate_specs(std::size_t N, std::size_t T,
                                                std::uint64_t seed) {
  if (N == 0 || T == 0) throw NonPositiveCount("generate_specs");
  std::vector<ChargingSpec> specs;
  specs.reserve(N);
  for (std::size_t g = 0; g < N; ++g) {
    // per-group substream: reproducible independent of generation order
    std::mt19937_64 rng = make_stream(seed, g + 1);
    std::bernoulli_distribution coin(0.5);
    std::uniform_real_distribution<double> unif(28.0, 40.0);
    ChargingSpec spec;
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      spec.rate_cap.assign(T, 0.0);
      for (std::size_t t = 0; t < T; ++t) spec.rate_cap[t] = coin(rng) ? 3.3 : 0.0;
      spec.energy = unif(rng);
      ok = sum(spec.rate_cap) >= spec.energy;
    }
    if (!ok) throw FeasibilityResampleExhausted("group " + std::to_string(g));
    specs.push_back(std::move(spec));
  }
  return specs;
}

struct BaseLoadConfig {
  std::string source = "synthetic";  // "synthetic" or "csv:<path>"
  double mid = 1.0;        // kW, diurnal mean
  double amp = 0.3;        // kW, diurnal amplitude
  double peak_slot = 10.0; // slot of the evening peak
};

// Base load profile: either read verbatim from a one-column CSV, or a smooth
// diurnal cosine with an evening peak and an overnight valley.
inline Vec generate_base_load(std::size_t T, const BaseLoadConfig& config) {
  if (config.source == "synthetic") {
    Vec d(T);
    for (std::size_t t = 0; t < T; ++t) {
      d[t] = config.mid +
             config.amp * std::cos(2.0 * std::numbers::pi *
                                   (static_cast<double>(t) - config.peak_slot) /
                                   static_cast<double>(T));
    }
    return d;
  }
  if (config.source.rfind("csv:", 0) == 0) {
    const std::string path = config.source.substr(4);
    std::ifstream in(path);
    if (!in) throw BadCSV("cannot open " + path);
    Vec d;
    std::string line;
    while (std::getline(in, line)) {
      // tolerate one value per line or comma-separated values
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        try {
          std::size_t pos = 0;
          const double v = std::stod(cell, &pos);
          while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
          if (pos != cell.size()) throw BadCSV("non-numeric cell '" + cell + "'");
          d.push_back(v);
        } catch (const std::invalid_argument&) {
          throw BadCSV("non-numeric cell '" + cell + "'");
        }
      }
    }
    if (d.size() != T) {
      throw BadCSV("expected " + std::to_string(T) + " values, got " +
                   std::to_string(d.size()));
    }
    return d;
  }
  throw UnknownSource(config.source);
}

// Constants entering the suboptimality bound: the feasible-set radius and the
// gradient norm bound. Per-user profiles satisfy ||r|| <= ||rate_cap|| and
// ||r|| <= energy.
struct SuboptimalityConstants {
  double r_max = 0.0;
  double rho = 0.0;
  double G = 0.0;
};

inline SuboptimalityConstants subopt_constants(const Scenario& scenario) {
  SuboptimalityConstants sc;
  for (const ChargingSpec& spec : scenario.group_specs) {
    sc.r_max = std::max(sc.r_max, std::min(norm2(spec.rate_cap), spec.energy));
  }
  sc.rho = std::sqrt(static_cast<double>(scenario.n_users)) * sc.r_max;
  sc.G = scenario.gamma / static_cast<double>(scenario.n_users) *
         (norm2(scenario.base_load) + scenario.gamma * sc.r_max);
  return sc;
}

// Audit dump: one row per (group, slot) with the cap, plus the group energy.
inline void dump_specs_csv(const std::vector<ChargingSpec>& specs, std::ostream& out) {
  out << "group,t,rate_cap,energy\n";
  for (std::size_t g = 0; g < specs.size(); ++g) {
    for (std::size_t t = 0; t < specs[g].rate_cap.size(); ++t) {
      out << g << ',' << t << ',' << specs[g].rate_cap[t] << ',' << specs[g].energy
          << '\n';
    }
  }
}

}  // namespace dpopt
