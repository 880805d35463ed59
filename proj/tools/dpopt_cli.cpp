// Command-line driver: single runs, parameter sweeps, and verification
// batteries for the differentially private EV-charging simulator.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dpopt/harness.hpp"
#include "dpopt/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyViolation = 1;
constexpr int kExitConfigError = 2;

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::optional<std::size_t> threads;
  bool json_trace = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool need_config) {
  auto* c = cmd->add_option("--config", opts.config_path, "experiment config file");
  if (need_config) c->required();
  cmd->add_option("--seed", opts.seed, "override the run seed");
  cmd->add_option("--out", opts.out_path, "output CSV path (default: stdout)");
  cmd->add_option("--threads", opts.threads, "worker thread count");
  cmd->add_flag("--json-trace", opts.json_trace, "also write the per-iteration trace as JSON");
}

dpopt::ExperimentConfig load(const CommonOpts& opts) {
  dpopt::ExperimentConfig ex =
      dpopt::load_experiment(dpopt::Config::parse_file(opts.config_path));
  if (opts.seed) ex.descent.seed = *opts.seed;
  if (opts.threads) {
    ex.threads = *opts.threads;
    ex.descent.threads = *opts.threads;
  }
  return ex;
}

void write_lines(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dpopt::ConfigError("cannot open output file " + path);
  out << content;
}

nlohmann::json trace_json(const dpopt::RunRecord& rec) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : rec.trace) {
    arr.push_back({{"k", t.k},
                   {"objective", t.objective},
                   {"noise_norm", t.noise_norm},
                   {"budget", t.budget}});
  }
  return {{"trace", arr}, {"objective", rec.objective}, {"budget", rec.budget_spent}};
}

int do_run(const CommonOpts& opts, bool force_baseline) {
  dpopt::ExperimentConfig ex = load(opts);
  if (force_baseline) ex.descent.is_private = false;

  const dpopt::Scenario scenario = dpopt::build_scenario(ex.scenario_config);
  const dpopt::EVObjective objective(scenario.base_load, scenario.n_households);
  const double u_star = dpopt::oracle_optimum(scenario, objective);

  const dpopt::RunPoint pt{ex.epsilon,      ex.descent.K,    ex.descent.c,
                           ex.descent.eta,  ex.descent.seed, ex.descent.is_private};
  dpopt::RunRecord rec;
  const dpopt::CsvRow row = dpopt::run_point(scenario, objective, u_star, pt,
                                             ex.adjacency, ex.threads, &rec);

  write_lines(opts.out_path, dpopt::csv_header() + "\n" + dpopt::format_csv_row(row) + "\n");
  if (opts.json_trace) {
    const std::string trace_path =
        opts.out_path.empty() ? "" : opts.out_path + ".trace.json";
    write_lines(trace_path, trace_json(rec).dump(2) + "\n");
  }
  std::cerr << (ex.descent.is_private ? "private" : "baseline") << " run: U="
            << row.U_value << " U*=" << row.U_star << " rel_subopt=" << row.rel_subopt
            << " budget=" << row.budget << "\n";
  return kExitOk;
}

int do_sweep(const CommonOpts& opts) {
  dpopt::ExperimentConfig ex = load(opts);
  const dpopt::SweepResult res = dpopt::sweep(ex);

  std::string content = dpopt::csv_header() + "\n";
  for (const dpopt::CsvRow& row : res.rows) content += dpopt::format_csv_row(row) + "\n";
  write_lines(opts.out_path, content);

  for (std::size_t i = 0; i < res.grid.size(); ++i) {
    std::cerr << "grid=" << res.grid[i] << " mean_rel_subopt=" << res.mean_rel_subopt[i];
    if (i < res.best_K.size()) std::cerr << " best_K=" << res.best_K[i];
    std::cerr << "\n";
  }
  if (ex.sweep == dpopt::SweepAxis::Epsilon) {
    std::cerr << "log-log slope: " << res.slope << "\n";
  }
  return kExitOk;
}

int do_verify(const std::string& which, const CommonOpts& opts) {
  using dpopt::CheckResult;
  std::vector<CheckResult> checks;
  if (which == "projection") {
    checks.push_back(dpopt::verify_projection_oracle());
  } else if (which == "privacy") {
    checks.push_back(dpopt::verify_budget_identity());
    checks.push_back(dpopt::verify_noise_calibration());
  } else if (which == "gradient") {
    checks.push_back(dpopt::verify_gradient());
  } else if (which == "sensitivity") {
    checks.push_back(dpopt::verify_global_sensitivity_b());
    checks.push_back(dpopt::verify_global_sensitivity_a());
    checks.push_back(dpopt::verify_local_sensitivities());
    checks.push_back(dpopt::verify_sensitivity_probe());

    // machine-readable report for the probe
    const auto specs = dpopt::generate_specs(1, 52, 77);
    const dpopt::AdjacencyParams adj{13.2, 12.0};
    const dpopt::SensitivityReport rep = dpopt::adjacency_probe(specs[0], adj, 10000, 77);
    const nlohmann::json j = {{"horizon", rep.horizon},
                              {"trials", rep.trials},
                              {"delta_r", rep.delta_r},
                              {"delta_E", rep.delta_E},
                              {"bound", rep.bound},
                              {"max_l2", rep.max_l2},
                              {"max_l1", rep.max_l1},
                              {"max_l1_bound_ratio", rep.max_l1_bound_ratio},
                              {"violated", rep.violated}};
    write_lines(opts.out_path, j.dump(2) + "\n");
  } else {
    std::cerr << "unknown verification battery '" << which << "'\n";
    return kExitConfigError;
  }

  bool all_pass = true;
  for (const CheckResult& c : checks) {
    std::cout << c << "\n";
    all_pass = all_pass && c.pass;
  }
  return all_pass ? kExitOk : kExitPropertyViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentially private distributed EV-charging simulator"};
  app.require_subcommand(1);

  CommonOpts run_opts, baseline_opts, sweep_opts, verify_opts;
  std::string verify_which;

  auto* cmd_run = app.add_subcommand("run", "execute one experiment run");
  add_common(cmd_run, run_opts, true);
  auto* cmd_baseline =
      app.add_subcommand("baseline", "execute the non-private reference run");
  add_common(cmd_baseline, baseline_opts, true);
  auto* cmd_sweep = app.add_subcommand("sweep", "run a parameter sweep");
  add_common(cmd_sweep, sweep_opts, true);
  auto* cmd_verify = app.add_subcommand("verify", "run a verification battery");
  cmd_verify
      ->add_option("which", verify_which, "projection|sensitivity|privacy|gradient")
      ->required();
  add_common(cmd_verify, verify_opts, false);

  try {
    app.parse(argc, argv);
    if (cmd_run->parsed()) return do_run(run_opts, false);
    if (cmd_baseline->parsed()) return do_run(baseline_opts, true);
    if (cmd_sweep->parsed()) return do_sweep(sweep_opts);
    if (cmd_verify->parsed()) return do_verify(verify_which, verify_opts);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  } catch (const dpopt::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigError;
  } catch (const dpopt::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitPropertyViolation;
  }
  return kExitConfigError;
}
