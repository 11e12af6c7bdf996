// gglab — command-line front end for the global-game threshold-equilibrium
// toolkit: closed-form belief coefficients, solver sufficient conditions,
// fixed-point solves, Monte-Carlo equilibrium verification, constructive
// counterexamples to belief-threshold policies, and forward playouts.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gglab/belief.hpp"
#include "gglab/engine.hpp"
#include "gglab/game_params.hpp"
#include "gglab/grid.hpp"
#include "gglab/json_io.hpp"
#include "gglab/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  int n = 2;
  double sigma2 = 1.0;
  double tau2 = 1.0;
  double tol = 1e-6;
  int max_iter = 200;
  std::uint64_t seed = 1;
  std::string scheme = "gh";
  int gh_nodes = 32;
  std::int64_t mc_samples = 100000;
  std::vector<double> grid_lo;
  std::vector<double> grid_hi;
  std::vector<int> grid_points;
  std::string out;  // empty: print-only commands skip file artifacts
  bool dump_iterates = false;
  bool figure_view = false;
  int probes = 200;
  std::string solution;
  std::string strategy;
  std::vector<double> t;
  double eps = 0.01;
  double big_m = 1e6;
  std::string direction = "peers-safe";
  double theta = 0.0;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_json_atomic(const fs::path& path, const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  json j = json::parse(read_file(path));
  if (j.contains("n")) cfg.n = j["n"].get<int>();
  if (j.contains("sigma2")) cfg.sigma2 = j["sigma2"].get<double>();
  if (j.contains("tau2")) cfg.tau2 = j["tau2"].get<double>();
  if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
  if (j.contains("max_iter")) cfg.max_iter = j["max_iter"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("scheme")) cfg.scheme = j["scheme"].get<std::string>();
  if (j.contains("gh_nodes")) cfg.gh_nodes = j["gh_nodes"].get<int>();
  if (j.contains("mc_samples")) cfg.mc_samples = j["mc_samples"].get<std::int64_t>();
  if (j.contains("grid_lo")) cfg.grid_lo = j["grid_lo"].get<std::vector<double>>();
  if (j.contains("grid_hi")) cfg.grid_hi = j["grid_hi"].get<std::vector<double>>();
  if (j.contains("grid_points")) cfg.grid_points = j["grid_points"].get<std::vector<int>>();
  if (j.contains("out")) cfg.out = j["out"].get<std::string>();
  if (j.contains("dump_iterates")) cfg.dump_iterates = j["dump_iterates"].get<bool>();
  if (j.contains("figure_view")) cfg.figure_view = j["figure_view"].get<bool>();
  if (j.contains("probes")) cfg.probes = j["probes"].get<int>();
  if (j.contains("solution")) cfg.solution = j["solution"].get<std::string>();
  if (j.contains("strategy")) cfg.strategy = j["strategy"].get<std::string>();
  if (j.contains("t")) cfg.t = j["t"].get<std::vector<double>>();
  if (j.contains("eps")) cfg.eps = j["eps"].get<double>();
  if (j.contains("big_m")) cfg.big_m = j["big_m"].get<double>();
  if (j.contains("direction")) cfg.direction = j["direction"].get<std::string>();
  if (j.contains("theta")) cfg.theta = j["theta"].get<double>();
}

gglab::GameParams game_params(const RunConfig& cfg) {
  gglab::GameParams p{cfg.n, cfg.sigma2, cfg.tau2};
  p.validate();
  return p;
}

gglab::IntegrationScheme integration_scheme(const RunConfig& cfg) {
  if (cfg.scheme == "gh") {
    auto s = gglab::IntegrationScheme::gauss_hermite(cfg.gh_nodes);
    s.seed = cfg.seed;
    return s;
  }
  if (cfg.scheme == "mc") {
    return gglab::IntegrationScheme::monte_carlo(cfg.mc_samples, cfg.seed);
  }
  throw std::invalid_argument("scheme must be 'gh' or 'mc'");
}

template <typename T>
std::vector<T> broadcast(std::vector<T> v, int dim, const char* what) {
  if (v.size() == 1) v.assign(dim, v[0]);
  if (static_cast<int>(v.size()) != dim) {
    throw std::invalid_argument(std::string(what) + ": expected 1 or " +
                                std::to_string(dim) + " comma-separated values");
  }
  return v;
}

std::optional<gglab::GridSpec> grid_override(const RunConfig& cfg,
                                             const gglab::GameParams& params,
                                             const gglab::BeliefCoefficients& coeffs) {
  if (cfg.grid_lo.empty() && cfg.grid_hi.empty() && cfg.grid_points.empty()) {
    return std::nullopt;
  }
  gglab::GridSpec spec = gglab::default_grid(params, coeffs);
  const int dim = params.n - 1;
  if (!cfg.grid_lo.empty()) {
    auto lo = broadcast(cfg.grid_lo, dim, "--grid-lo");
    for (int a = 0; a < dim; ++a) spec.lower(a) = lo[a];
  }
  if (!cfg.grid_hi.empty()) {
    auto hi = broadcast(cfg.grid_hi, dim, "--grid-hi");
    for (int a = 0; a < dim; ++a) spec.upper(a) = hi[a];
  }
  if (!cfg.grid_points.empty()) {
    spec.points = broadcast(cfg.grid_points, dim, "--grid-points");
  }
  spec.validate();
  return spec;
}

gglab::WitnessDirection witness_direction(const std::string& name) {
  if (name == "peers-safe" || name == "low") return gglab::WitnessDirection::PeersSafe;
  if (name == "peers-risky" || name == "high") return gglab::WitnessDirection::PeersRisky;
  throw std::invalid_argument("direction must be peers-safe|peers-risky (aliases low|high)");
}

int cmd_coeffs(const RunConfig& cfg) {
  const auto coeffs = gglab::compute_coefficients(game_params(cfg));
  const json j = gglab::coefficients_to_json(coeffs);
  std::cout << j.dump(2) << "\n";
  if (!cfg.out.empty()) write_json_atomic(fs::path(cfg.out) / "coeffs.json", j);
  return 0;
}

int cmd_check(const RunConfig& cfg) {
  const auto report = gglab::check_conditions(game_params(cfg));
  const json j = gglab::condition_report_to_json(report);
  std::cout << j.dump(2) << "\n";
  if (!cfg.out.empty()) write_json_atomic(fs::path(cfg.out) / "condition.json", j);
  return report.banach_ok ? 0 : 3;
}

int cmd_solve(const RunConfig& cfg) {
  const auto params = game_params(cfg);
  const auto coeffs = gglab::compute_coefficients(params);
  const fs::path out_dir(cfg.out.empty() ? "out" : cfg.out);

  gglab::SolveOptions options;
  options.scheme = integration_scheme(cfg);
  options.grid = grid_override(cfg, params, coeffs);
  options.tol = cfg.tol;
  options.max_iter = cfg.max_iter;
  if (cfg.dump_iterates) {
    options.on_iterate = [&](int iteration, const gglab::GridFunction& g) {
      char name[32];
      std::snprintf(name, sizeof(name), "iter_%03d.csv", iteration);
      write_file_atomic(out_dir / "iterates" / name, gglab::grid_to_csv(g));
    };
  }

  gglab::SolveDiagnostics diagnostics;
  try {
    auto result = gglab::solve(params, options);
    diagnostics = result.diagnostics;
    write_file_atomic(out_dir / "solution.csv", gglab::grid_to_csv(result.threshold.g));
    write_json_atomic(out_dir / "solution.json",
                      gglab::solution_to_json(params, result.threshold));
    write_json_atomic(out_dir / "diagnostics.json",
                      gglab::diagnostics_to_json(diagnostics));
    if (cfg.figure_view) {
      if (params.n != 2) {
        throw std::invalid_argument("--figure-view is defined for two agents only");
      }
      // shifted view g - 1, the form used for plotting the solution
      gglab::GridFunction view(result.threshold.g.spec(),
                               result.threshold.g.values().array() - 1.0,
                               result.threshold.g.lipschitz_bound(), 0.0, 1.0);
      write_file_atomic(out_dir / "g_view.csv", gglab::grid_to_csv(view));
    }
  } catch (const gglab::DivergenceError& err) {
    write_json_atomic(out_dir / "diagnostics.json",
                      gglab::diagnostics_to_json(err.diagnostics));
    std::cerr << "solve: " << err.what() << "\n";
    return 4;
  }

  json status;
  status["converged"] = diagnostics.converged;
  status["iterations"] = diagnostics.iterations;
  status["last_sup_delta"] =
      diagnostics.sup_deltas.empty() ? 0.0 : diagnostics.sup_deltas.back();
  status["banach_warning"] = diagnostics.banach_warning;
  std::cout << status.dump(2) << "\n";
  std::cerr << "solve finished in " << diagnostics.wall_time_seconds << " s\n";
  return diagnostics.converged ? 0 : 4;
}

int cmd_verify(const RunConfig& cfg) {
  if (cfg.solution.empty()) throw std::invalid_argument("verify: --solution is required");
  const json j = json::parse(read_file(cfg.solution));
  auto [params, tf] = gglab::solution_from_json(j);
  const auto summary =
      gglab::verify_equilibrium(tf, cfg.probes, cfg.mc_samples, cfg.seed);
  const json out = gglab::verification_to_json(summary);
  if (!cfg.out.empty()) write_json_atomic(fs::path(cfg.out) / "verify.json", out);
  json brief = out;
  brief.erase("reports");
  std::cout << brief.dump(2) << "\n";
  return summary.pass ? 0 : 5;
}

int cmd_witness(const RunConfig& cfg) {
  const auto params = game_params(cfg);
  if (static_cast<int>(cfg.t.size()) != params.n) {
    throw std::invalid_argument("witness: --t needs exactly n thresholds");
  }
  Eigen::VectorXd t(params.n);
  for (int i = 0; i < params.n; ++i) t(i) = cfg.t[i];
  const auto result = gglab::nonexistence_witness(
      params, t, cfg.eps, cfg.big_m, witness_direction(cfg.direction),
      cfg.mc_samples, cfg.seed);
  const json j = gglab::witness_to_json(result);
  std::cout << j.dump(2) << "\n";
  if (!cfg.out.empty()) write_json_atomic(fs::path(cfg.out) / "witness.json", j);
  return 0;
}

gglab::Strategy load_strategy(const RunConfig& cfg, const gglab::GameParams& params) {
  if (!cfg.strategy.empty()) {
    const json j = json::parse(read_file(cfg.strategy));
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear-threshold") {
      const auto t = j.at("thresholds").get<std::vector<double>>();
      if (static_cast<int>(t.size()) != params.n) {
        throw std::invalid_argument("strategy: one threshold per agent required");
      }
      Eigen::VectorXd tv(params.n);
      for (int i = 0; i < params.n; ++i) tv(i) = t[i];
      return gglab::Strategy::linear(tv);
    }
    if (kind == "threshold-function") {
      const json sol = json::parse(read_file(j.at("solution").get<std::string>()));
      auto [sol_params, tf] = gglab::solution_from_json(sol);
      if (sol_params.n != params.n) {
        throw std::invalid_argument("strategy: solution was computed for a different n");
      }
      return gglab::Strategy::policy(std::move(tf));
    }
    throw std::invalid_argument("strategy: unknown kind " + kind);
  }
  if (!cfg.t.empty()) {
    if (static_cast<int>(cfg.t.size()) != params.n) {
      throw std::invalid_argument("simulate: --t needs exactly n thresholds");
    }
    Eigen::VectorXd tv(params.n);
    for (int i = 0; i < params.n; ++i) tv(i) = cfg.t[i];
    return gglab::Strategy::linear(tv);
  }
  throw std::invalid_argument("simulate: provide --strategy or --t");
}

int cmd_simulate(const RunConfig& cfg) {
  const auto params = game_params(cfg);
  const auto strategy = load_strategy(cfg, params);
  const auto result = gglab::simulate_playout(params, strategy, cfg.theta, cfg.seed);
  const json j = gglab::playout_to_json(result);
  std::cout << j.dump(2) << "\n";
  if (!cfg.out.empty()) write_json_atomic(fs::path(cfg.out) / "playout.json", j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gglab: threshold equilibria for global games with noisy information sharing"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path;

  struct SubBinding {
    CLI::App* sub = nullptr;
    int (*run)(const RunConfig&) = nullptr;
  };
  std::vector<SubBinding> bindings;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override it");
    sub->add_option("--n", flags.n, "number of agents");
    sub->add_option("--sigma2", flags.sigma2, "private-signal noise variance");
    sub->add_option("--tau2", flags.tau2, "sharing noise variance");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--out", flags.out, "output directory");
  };
  const auto add_scheme = [&](CLI::App* sub) {
    sub->add_option("--scheme", flags.scheme, "integration backend: gh or mc");
    sub->add_option("--gh-nodes", flags.gh_nodes, "Gauss-Hermite nodes per dimension");
    sub->add_option("--mc-samples", flags.mc_samples, "Monte Carlo sample count");
  };

  auto* coeffs = app.add_subcommand("coeffs", "print the belief coefficients");
  add_common(coeffs);
  bindings.push_back({coeffs, cmd_coeffs});

  auto* check = app.add_subcommand("check", "evaluate the solver's sufficient conditions");
  add_common(check);
  bindings.push_back({check, cmd_check});

  auto* solve = app.add_subcommand("solve", "iterate the fixed-point operator to convergence");
  add_common(solve);
  add_scheme(solve);
  solve->add_option("--tol", flags.tol, "sup-norm stopping tolerance");
  solve->add_option("--max-iter", flags.max_iter, "iteration cap");
  solve->add_option("--grid-lo", flags.grid_lo, "per-axis lower bounds")->delimiter(',');
  solve->add_option("--grid-hi", flags.grid_hi, "per-axis upper bounds")->delimiter(',');
  solve->add_option("--grid-points", flags.grid_points, "per-axis node counts")->delimiter(',');
  solve->add_flag("--dump-iterates", flags.dump_iterates, "write one CSV per iteration");
  solve->add_flag("--figure-view", flags.figure_view, "also write the shifted view g - 1 (two agents)");
  bindings.push_back({solve, cmd_solve});

  auto* verify = app.add_subcommand("verify", "Monte-Carlo best-response check of a solution");
  add_common(verify);
  verify->add_option("--solution", flags.solution, "solution.json produced by solve");
  verify->add_option("--probes", flags.probes, "number of probe observations");
  verify->add_option("--mc-samples", flags.mc_samples, "samples per probe");
  bindings.push_back({verify, cmd_verify});

  auto* witness = app.add_subcommand(
      "witness", "construct an observation where a belief-threshold policy fails");
  add_common(witness);
  witness->add_option("--t", flags.t, "candidate thresholds, one per agent")->delimiter(',');
  witness->add_option("--eps", flags.eps, "indifference margin");
  witness->add_option("--big-m", flags.big_m, "target magnitude for the peers' expected beliefs");
  witness->add_option("--direction", flags.direction, "peers-safe|peers-risky");
  witness->add_option("--mc-samples", flags.mc_samples, "verification sample count");
  bindings.push_back({witness, cmd_witness});

  auto* simulate = app.add_subcommand("simulate", "play one round at a fixed fundamental");
  add_common(simulate);
  simulate->add_option("--theta", flags.theta, "realized fundamental");
  simulate->add_option("--strategy", flags.strategy, "strategy JSON file");
  simulate->add_option("--t", flags.t, "inline linear thresholds")->delimiter(',');
  bindings.push_back({simulate, cmd_simulate});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // help/version exit clean, usage errors exit 2
  }

  try {
    for (const auto& binding : bindings) {
      if (!binding.sub->parsed()) continue;
      RunConfig cfg;  // defaults
      if (binding.sub->count("--config")) apply_config_file(cfg, config_path);
      // explicit flags win over the config file
      const auto pick = [&](const char* name, auto member) {
        if (binding.sub->count(name)) cfg.*member = flags.*member;
      };
      pick("--n", &RunConfig::n);
      pick("--sigma2", &RunConfig::sigma2);
      pick("--tau2", &RunConfig::tau2);
      pick("--seed", &RunConfig::seed);
      pick("--out", &RunConfig::out);
      if (binding.sub->get_option_no_throw("--scheme")) {
        pick("--scheme", &RunConfig::scheme);
        pick("--gh-nodes", &RunConfig::gh_nodes);
        pick("--mc-samples", &RunConfig::mc_samples);
      }
      if (binding.sub->get_option_no_throw("--tol")) {
        pick("--tol", &RunConfig::tol);
        pick("--max-iter", &RunConfig::max_iter);
        pick("--grid-lo", &RunConfig::grid_lo);
        pick("--grid-hi", &RunConfig::grid_hi);
        pick("--grid-points", &RunConfig::grid_points);
        pick("--dump-iterates", &RunConfig::dump_iterates);
        pick("--figure-view", &RunConfig::figure_view);
      }
      if (binding.sub->get_option_no_throw("--solution")) {
        pick("--solution", &RunConfig::solution);
        pick("--probes", &RunConfig::probes);
        pick("--mc-samples", &RunConfig::mc_samples);
      }
      if (binding.sub->get_option_no_throw("--eps")) {
        pick("--t", &RunConfig::t);
        pick("--eps", &RunConfig::eps);
        pick("--big-m", &RunConfig::big_m);
        pick("--direction", &RunConfig::direction);
        pick("--mc-samples", &RunConfig::mc_samples);
      }
      if (binding.sub->get_option_no_throw("--theta")) {
        pick("--theta", &RunConfig::theta);
        pick("--strategy", &RunConfig::strategy);
        pick("--t", &RunConfig::t);
      }
      return binding.run(cfg);
    }
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const gglab::DivergenceError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
