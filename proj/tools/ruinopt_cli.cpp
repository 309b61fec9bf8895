// Command-line interface for the ruinopt library.
//
// Subcommands:
//   diffusion        solve the diffusion-limit optimum (alpha*, rho_D, retention)
//   classical        solve the jump-model adjustment problem (rho_J, retention)
//   scaling          sandwich bounds and convergence diagnostics across n
//   simulate         Monte Carlo ruin-probability estimate for a retention
//   bounds           ruin-probability bounds on an x grid
//   retention-table  sampled table of both optimal retention functions
//
// Model parameters and options come from a JSON config (--config) and may be
// overridden by flags.  Exit codes: 0 success, 1 configuration/usage error,
// 2 numerical failure.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ruinopt/classical.hpp"
#include "ruinopt/config_io.hpp"
#include "ruinopt/diffusion.hpp"
#include "ruinopt/errors.hpp"
#include "ruinopt/scaling.hpp"
#include "ruinopt/simulate.hpp"

namespace {

using ruinopt::ConfigError;
using ruinopt::json;

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) {
        ++used;
      }
      if (used != token.size()) throw std::invalid_argument("trailing characters");
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError(what + ": cannot parse \"" + token + "\" as a number");
    }
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

ruinopt::ClaimDistribution parse_claims_flag(const std::string& s) {
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon == std::string::npos ? s.size() : colon);
  const std::string rest = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (kind == "exponential" || kind == "gamma" || kind == "uniform") {
    const auto args = parse_number_list(rest, "--claims " + kind);
    if (kind == "exponential" && args.size() == 1) return ruinopt::Exponential{args[0]};
    if (kind == "gamma" && args.size() == 2) return ruinopt::GammaClaims{args[0], args[1]};
    if (kind == "uniform" && args.size() == 1) return ruinopt::UniformClaims{args[0]};
    throw ConfigError("--claims " + kind + ": wrong number of arguments in \"" + s +
                      "\" (expected exponential:<rate>, gamma:<shape>,<rate>, "
                      "or uniform:<width>)");
  }
  throw ConfigError("--claims: unknown kind \"" + kind +
                    "\" (empirical claims require a config file)");
}

// --- typed readers over the effective command_options object ----------------

std::string type_name(const json& j) { return ruinopt::detail::json_type_name(j); }

double opt_num(const json& o, const char* key, double def) {
  if (!o.contains(key)) return def;
  if (!o[key].is_number()) {
    throw ConfigError(std::string("config field command_options.") + key +
                      ": expected a number, got " + type_name(o[key]));
  }
  return o[key].get<double>();
}

long long opt_int(const json& o, const char* key, long long def) {
  if (!o.contains(key)) return def;
  if (o[key].is_number_integer() || o[key].is_number_unsigned()) {
    return o[key].get<long long>();
  }
  if (o[key].is_number_float()) {
    const double v = o[key].get<double>();
    if (v == std::floor(v)) return static_cast<long long>(v);
  }
  throw ConfigError(std::string("config field command_options.") + key +
                    ": expected an integer, got " + type_name(o[key]));
}

std::string opt_str(const json& o, const char* key, const std::string& def) {
  if (!o.contains(key)) return def;
  if (!o[key].is_string()) {
    throw ConfigError(std::string("config field command_options.") + key +
                      ": expected a string, got " + type_name(o[key]));
  }
  return o[key].get<std::string>();
}

std::vector<double> opt_list(const json& o, const char* key, std::vector<double> def) {
  if (!o.contains(key)) return def;
  const json& v = o[key];
  if (v.is_string()) {
    return parse_number_list(v.get<std::string>(),
                             std::string("config field command_options.") + key);
  }
  if (!v.is_array()) {
    throw ConfigError(std::string("config field command_options.") + key +
                      ": expected an array or comma-separated string, got " +
                      type_name(v));
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw ConfigError(std::string("config field command_options.") + key + "[" +
                        std::to_string(i) + "]: expected a number, got " +
                        type_name(v[i]));
    }
    out.push_back(v[i].get<double>());
  }
  if (out.empty()) {
    throw ConfigError(std::string("config field command_options.") + key +
                      ": empty list");
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, long long points) {
  if (points < 2 || hi <= lo) {
    throw ConfigError("grid requires at least 2 points and a positive range");
  }
  std::vector<double> g(static_cast<std::size_t>(points));
  for (long long i = 0; i < points; ++i) {
    g[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return g;
}

// --- flag storage and config resolution -------------------------------------

struct SubFlags {
  std::string config, out, csv, claims;
  double lambda = 0, c = 0, theta = 0, eta = 0, beta = 0;
  std::string model, retention, n_list, x_grid;
  double eps = 0, x0 = 0, horizon = 0, barrier = 0, max_step = 0, y_max = 0, n = 0;
  long long paths = 0, seed = 0, batches = 0, y_points = 0;
};

void add_common_flags(CLI::App* sub, SubFlags& f) {
  sub->add_option("--config", f.config, "JSON run configuration file");
  sub->add_option("--lambda", f.lambda, "claim arrival rate");
  sub->add_option("--c", f.c, "premium income rate");
  sub->add_option("--theta", f.theta, "expectation loading of the reinsurance premium");
  sub->add_option("--eta", f.eta, "variance loading of the reinsurance premium");
  sub->add_option("--beta", f.beta, "diffusion volatility");
  sub->add_option("--claims", f.claims,
                  "claim distribution: exponential:<rate>, gamma:<shape>,<rate>, "
                  "uniform:<width>");
  sub->add_option("--out", f.out, "write the JSON result here (default: stdout)");
  sub->add_option("--csv", f.csv, "write the CSV table here (default: none)");
}

// Merges config file, parameter flags, and command-option flags into one
// RunConfig whose command_options json is the single source the commands read.
ruinopt::RunConfig resolve_config(const CLI::App* sub, const SubFlags& f) {
  auto passed = [sub](const std::string& name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  ruinopt::RunConfig cfg;
  bool have_params = false, have_claims = false;
  if (passed("--config")) {
    cfg = ruinopt::load_run_config(f.config);
    have_params = have_claims = true;
  }
  const bool l = passed("--lambda"), c = passed("--c"), t = passed("--theta"),
             e = passed("--eta"), b = passed("--beta");
  if (!have_params && !(l && c && t && e && b)) {
    throw ConfigError(
        "model parameters missing: provide --config or all of "
        "--lambda --c --theta --eta --beta");
  }
  if (l) cfg.params.lambda = f.lambda;
  if (c) cfg.params.c = f.c;
  if (t) cfg.params.theta = f.theta;
  if (e) cfg.params.eta = f.eta;
  if (b) cfg.params.beta = f.beta;
  if (passed("--claims")) {
    cfg.claims = parse_claims_flag(f.claims);
    have_claims = true;
  }
  if (!have_claims) {
    throw ConfigError("claim distribution missing: provide --config or --claims");
  }
  if (passed("--out")) cfg.output.json_path = f.out;
  if (passed("--csv")) cfg.output.csv_path = f.csv;

  json& o = cfg.command_options;
  if (passed("--model")) o["model"] = f.model;
  if (passed("--retention")) o["retention"] = f.retention;
  if (passed("--n-list")) o["n_list"] = parse_number_list(f.n_list, "--n-list");
  if (passed("--x-grid")) o["x_grid"] = parse_number_list(f.x_grid, "--x-grid");
  if (passed("--eps")) o["eps"] = f.eps;
  if (passed("--x0")) o["x0"] = f.x0;
  if (passed("--horizon")) o["horizon"] = f.horizon;
  if (passed("--barrier")) o["barrier"] = f.barrier;
  if (passed("--max-step")) o["max_step"] = f.max_step;
  if (passed("--y-max")) o["y_max"] = f.y_max;
  if (passed("--n")) o["n"] = f.n;
  if (passed("--paths")) o["paths"] = f.paths;
  if (passed("--seed")) o["seed"] = f.seed;
  if (passed("--batches")) o["batches"] = f.batches;
  if (passed("--y-points")) o["y_points"] = f.y_points;
  return cfg;
}

void emit_outputs(const ruinopt::OutputSpec& out, const json& result,
                  const ruinopt::CsvTable* table) {
  const std::string text = ruinopt::dump_json_12(result);
  if (out.json_path.empty()) {
    std::cout << text;
  } else {
    ruinopt::write_text_atomic(out.json_path, text);
  }
  if (table != nullptr && !out.csv_path.empty()) {
    ruinopt::write_text_atomic(out.csv_path, table->to_string());
  }
}

json inputs_block(const ruinopt::RunConfig& cfg) {
  return json{{"params", ruinopt::params_to_json(cfg.params)},
              {"claims", ruinopt::claims_to_json(cfg.claims)}};
}

double default_y_max(const ruinopt::ClaimDistribution& dist) {
  return ruinopt::quantile(dist, 1.0 - 1e-10);
}

// --- subcommand implementations ---------------------------------------------

int run_diffusion(const ruinopt::RunConfig& cfg) {
  const json& o = cfg.command_options;
  const auto sol = ruinopt::solve_alpha_star(cfg.params, cfg.claims);
  const auto x_grid = opt_list(o, "x_grid", {0.0, 1.0, 2.0, 4.0, 8.0});

  json psi_at = json::array();
  for (double x : x_grid) {
    psi_at.push_back(json{{"x", x}, {"psi_D", ruinopt::psi_D(sol, x)}});
  }
  json result{{"command", "diffusion"},
              {"inputs", inputs_block(cfg)},
              {"alpha_star", sol.alpha_star},
              {"rho_D", sol.rho_D},
              {"kink", cfg.params.theta / sol.rho_D},
              {"residual", sol.residual},
              {"iterations", sol.iterations},
              {"retention", ruinopt::retention_to_json(sol.retention)},
              {"psi_D_at", psi_at}};

  ruinopt::CsvTable table;
  table.header = {"y", "R_D"};
  if (!cfg.output.csv_path.empty()) {
    const double y_max = opt_num(o, "y_max", default_y_max(cfg.claims));
    const long long y_points = opt_int(o, "y_points", 513);
    for (double y : linspace(0.0, y_max, y_points)) {
      table.add_row({y, ruinopt::retention_RD(sol, y)});
    }
  }
  emit_outputs(cfg.output, result, &table);
  return 0;
}

int run_classical(const ruinopt::RunConfig& cfg) {
  const json& o = cfg.command_options;
  const auto sol = ruinopt::solve_rho_J(cfg.params, cfg.claims);
  json result{{"command", "classical"},
              {"inputs", inputs_block(cfg)},
              {"rho_J", sol.rho_J},
              {"threshold", sol.threshold},
              {"rho_D", sol.rho_D},
              {"ordering_margin", sol.rho_D - sol.rho_J},
              {"residual", sol.residual},
              {"iterations", sol.iterations},
              {"retention", ruinopt::retention_to_json(sol.retention)}};

  ruinopt::CsvTable table;
  table.header = {"y", "hRJ", "g", "R_D"};
  if (!cfg.output.csv_path.empty()) {
    const auto dsol = ruinopt::solve_alpha_star(cfg.params, cfg.claims);
    const double y_max = opt_num(o, "y_max", default_y_max(cfg.claims));
    const long long y_points = opt_int(o, "y_points", 513);
    const auto& p = cfg.params;
    for (double y : linspace(0.0, y_max, y_points)) {
      table.add_row({y, ruinopt::retention_hRJ(sol.rho_J, p.theta, p.eta, y),
                     ruinopt::asymptote_g(sol.rho_J, p.theta, p.eta, y),
                     ruinopt::retention_RD(dsol, y)});
    }
  }
  emit_outputs(cfg.output, result, &table);
  return 0;
}

int run_scaling(const ruinopt::RunConfig& cfg) {
  const json& o = cfg.command_options;
  const auto n_list = opt_list(o, "n_list", {1.0, 4.0, 16.0, 64.0, 256.0});
  const double eps = opt_num(o, "eps", 1e-3);
  const auto rep = ruinopt::convergence_report(cfg.params, cfg.claims, n_list, eps);

  json records = json::array();
  ruinopt::CsvTable table;
  table.header = {"n", "rho_J_n", "lower", "upper", "retention_dev"};
  for (const auto& r : rep.records) {
    records.push_back(json{{"n", r.n},
                           {"rho_J_n", r.rho_J_n},
                           {"lower", r.lower},
                           {"upper", r.upper},
                           {"retention_dev", r.retention_dev},
                           {"pre_asymptotic", r.pre_asymptotic}});
    table.add_row({r.n, r.rho_J_n, r.lower, r.upper, r.retention_dev});
  }
  json result{{"command", "scaling"},
              {"inputs", inputs_block(cfg)},
              {"rho_D", rep.rho_D},
              {"constants",
               json{{"C", rep.constants.C},
                    {"delta", rep.constants.delta},
                    {"m", rep.constants.m},
                    {"N", rep.constants.N},
                    {"eps", rep.constants.eps}}},
              {"records", records}};

  if (o.contains("x_grid") && !rep.records.empty()) {
    // Evaluate the probability bounds at the largest requested n.
    const auto sol = ruinopt::solve_alpha_star(cfg.params, cfg.claims);
    const auto& last = rep.records.back();
    json bounds_at = json::array();
    for (double x : opt_list(o, "x_grid", {})) {
      const auto b = ruinopt::psi_bounds(sol, last.rho_J_n, rep.constants, last.n, x);
      bounds_at.push_back(json{{"x", x},
                               {"n", last.n},
                               {"lower", b.lower},
                               {"upper", b.upper},
                               {"lundberg", b.lundberg},
                               {"pre_asymptotic", b.pre_asymptotic}});
    }
    result["bounds_at"] = bounds_at;
  }
  emit_outputs(cfg.output, result, &table);
  return 0;
}

int run_simulate(const ruinopt::RunConfig& cfg) {
  const json& o = cfg.command_options;
  const std::string model = opt_str(o, "model", "classical");
  if (model != "classical" && model != "diffusion" && model != "scaled") {
    throw ConfigError("config field command_options.model: unknown model \"" + model +
                      "\" (expected classical, diffusion, or scaled)");
  }
  const double n = opt_num(o, "n", 16.0);

  ruinopt::RetentionSpec spec;
  if (o.contains("retention")) {
    spec = ruinopt::parse_retention_spec(o["retention"], "command_options.retention");
  } else {
    spec.optimal = true;
  }
  if (spec.optimal) {
    if (model == "classical") {
      spec.retention = ruinopt::solve_rho_J(cfg.params, cfg.claims).retention;
    } else if (model == "diffusion") {
      spec.retention = ruinopt::solve_alpha_star(cfg.params, cfg.claims).retention;
    } else {
      // Diffusion-limit optimum expressed in the scaled claim coordinates.
      const auto sol = ruinopt::solve_alpha_star(cfg.params, cfg.claims);
      spec.retention = ruinopt::DiffusionOptimal{
          sol.alpha_star, cfg.params.theta / std::sqrt(n), cfg.params.eta};
    }
  }

  ruinopt::SimConfig sim;
  sim.retention = spec.retention;
  sim.x0 = opt_num(o, "x0", 1.0);
  sim.horizon = opt_num(o, "horizon", 0.0);
  sim.barrier = opt_num(o, "barrier", 0.0);
  sim.max_step = opt_num(o, "max_step", 0.0);
  sim.paths = opt_int(o, "paths", 100000);
  const long long seed = opt_int(o, "seed", 1);
  if (seed < 0) throw ConfigError("config field command_options.seed: must be >= 0");
  sim.seed = static_cast<std::uint64_t>(seed);

  long long batches = opt_int(o, "batches", 1);
  if (batches < 1) {
    throw ConfigError("config field command_options.batches: must be >= 1");
  }
  if (batches > sim.paths) batches = sim.paths;

  auto run_chunk = [&](const ruinopt::SimConfig& sc) {
    if (model == "classical") return ruinopt::simulate_classical(sc, cfg.params, cfg.claims);
    if (model == "diffusion") return ruinopt::simulate_diffusion(sc, cfg.params, cfg.claims);
    return ruinopt::simulate_scaled(sc, cfg.params, cfg.claims, n);
  };

  ruinopt::CsvTable table;
  table.header = {"batch", "paths_done", "running_estimate", "running_std_error"};
  ruinopt::SimResult res;
  if (batches == 1) {
    res = run_chunk(sim);
    if (!cfg.output.csv_path.empty()) {
      table.add_row({1.0, static_cast<double>(res.paths), res.estimate, res.std_error});
    }
  } else {
    // Chunks reuse the whole-run RNG streams via first_path, so the combined
    // tallies (and the final result) are identical to a single-shot run.
    long long ruined = 0, censored = 0, done = 0;
    for (long long b = 0; b < batches; ++b) {
      const long long lo = sim.paths * b / batches;
      const long long hi = sim.paths * (b + 1) / batches;
      ruinopt::SimConfig chunk = sim;
      chunk.paths = hi - lo;
      chunk.first_path = lo;
      const auto r = run_chunk(chunk);
      ruined += std::llround(r.estimate * static_cast<double>(r.paths));
      censored += std::llround(r.censored_fraction * static_cast<double>(r.paths));
      done = hi;
      const double est = static_cast<double>(ruined) / static_cast<double>(done);
      const double se = std::sqrt(est * (1.0 - est) / static_cast<double>(done));
      table.add_row({static_cast<double>(b + 1), static_cast<double>(done), est, se});
    }
    res = ruinopt::detail::summarize(ruined, censored, sim);
  }

  json inputs = inputs_block(cfg);
  inputs["retention"] = ruinopt::retention_to_json(spec.retention);
  if (model == "scaled") inputs["n"] = n;
  json result{{"command", "simulate"},
              {"model", model},
              {"inputs", inputs},
              {"estimate", res.estimate},
              {"std_error", res.std_error},
              {"ci_low", res.ci_low},
              {"ci_high", res.ci_high},
              {"paths", res.paths},
              {"censored_fraction", res.censored_fraction},
              {"seed", res.seed},
              {"batches", batches}};
  emit_outputs(cfg.output, result, &table);
  return 0;
}

int run_bounds(const ruinopt::RunConfig& cfg) {
  const json& o = cfg.command_options;
  const double n = opt_num(o, "n", 1.0);
  const double eps = opt_num(o, "eps", 1e-3);
  const auto x_grid = opt_list(o, "x_grid", linspace(0.0, 8.0, 33));

  const auto sol = ruinopt::solve_alpha_star(cfg.params, cfg.claims);
  const auto k = ruinopt::delta_and_N(sol, cfg.params, cfg.claims, eps);
  const double rho_J = ruinopt::solve_rho_J(cfg.params, cfg.claims).rho_J;
  const double rho_J_n =
      n == 1.0 ? rho_J : ruinopt::rho_J_scaled(cfg.params, cfg.claims, n);
  const double gamma =
      2.0 * cfg.params.c / (cfg.params.beta * cfg.params.beta);

  ruinopt::CsvTable table;
  table.header = {"x", "subsolution", "supersolution", "lower", "upper",
                  "lundberg_upper"};
  bool pre_asymptotic = false;
  for (double x : x_grid) {
    const auto a = ruinopt::appendix_bounds(cfg.params, rho_J, x);
    const auto b = ruinopt::psi_bounds(sol, rho_J_n, k, n, x);
    pre_asymptotic = b.pre_asymptotic;
    table.add_row({x, a.subsolution, a.supersolution, b.lower, b.upper, b.lundberg});
  }
  json result{{"command", "bounds"},
              {"inputs", inputs_block(cfg)},
              {"n", n},
              {"rho_D", sol.rho_D},
              {"rho_J", rho_J},
              {"rho_J_n", rho_J_n},
              {"gamma", gamma},
              {"constants",
               json{{"C", k.C}, {"delta", k.delta}, {"m", k.m}, {"N", k.N},
                    {"eps", k.eps}}},
              {"pre_asymptotic", pre_asymptotic}};
  emit_outputs(cfg.output, result, &table);
  return 0;
}

int run_retention_table(const ruinopt::RunConfig& cfg) {
  const json& o = cfg.command_options;
  const auto dsol = ruinopt::solve_alpha_star(cfg.params, cfg.claims);
  const auto csol = ruinopt::solve_rho_J(cfg.params, cfg.claims);
  const double y_max = opt_num(o, "y_max", default_y_max(cfg.claims));
  const long long y_points = opt_int(o, "y_points", 513);
  const auto& p = cfg.params;

  json ys = json::array(), rds = json::array(), hrjs = json::array(),
       gs = json::array();
  ruinopt::CsvTable table;
  table.header = {"y", "R_D", "hRJ", "g"};
  for (double y : linspace(0.0, y_max, y_points)) {
    const double rd = ruinopt::retention_RD(dsol, y);
    const double hrj = ruinopt::retention_hRJ(csol.rho_J, p.theta, p.eta, y);
    const double g = ruinopt::asymptote_g(csol.rho_J, p.theta, p.eta, y);
    ys.push_back(y);
    rds.push_back(rd);
    hrjs.push_back(hrj);
    gs.push_back(g);
    table.add_row({y, rd, hrj, g});
  }
  json result{{"command", "retention-table"},
              {"inputs", inputs_block(cfg)},
              {"alpha_star", dsol.alpha_star},
              {"rho_D", dsol.rho_D},
              {"rho_J", csol.rho_J},
              {"threshold", csol.threshold},
              {"kink", p.theta / dsol.rho_D},
              {"table",
               json{{"y", ys}, {"R_D", rds}, {"hRJ", hrjs}, {"g", gs}}}};
  emit_outputs(cfg.output, result, &table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal reinsurance under a mean-variance premium principle"};
  app.require_subcommand(1);

  SubFlags flags[6];
  CLI::App* diffusion = app.add_subcommand("diffusion", "diffusion-limit optimum");
  CLI::App* classical = app.add_subcommand("classical", "jump-model optimum");
  CLI::App* scaling = app.add_subcommand("scaling", "convergence bounds across n");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo ruin probability");
  CLI::App* bounds = app.add_subcommand("bounds", "ruin-probability bounds on an x grid");
  CLI::App* table = app.add_subcommand("retention-table", "sampled retention functions");
  CLI::App* subs[6] = {diffusion, classical, scaling, simulate, bounds, table};
  for (int i = 0; i < 6; ++i) add_common_flags(subs[i], flags[i]);

  for (CLI::App* s : {diffusion, classical, table}) {
    SubFlags& f = flags[s == diffusion ? 0 : s == classical ? 1 : 5];
    s->add_option("--y-max", f.y_max, "largest claim size in the CSV table");
    s->add_option("--y-points", f.y_points, "rows in the CSV table");
  }
  diffusion->add_option("--x-grid", flags[0].x_grid,
                        "comma-separated surplus levels for psi_D");
  scaling->add_option("--n-list", flags[2].n_list, "comma-separated scaling levels");
  scaling->add_option("--x-grid", flags[2].x_grid,
                      "surplus levels for bounds at the largest n");
  scaling->add_option("--eps", flags[2].eps, "slack inside delta and the N condition");
  simulate->add_option("--model", flags[3].model, "classical, diffusion, or scaled");
  simulate->add_option("--retention", flags[3].retention,
                       "optimal, full, zero, quota:<q>, or stoploss:<d>");
  simulate->add_option("--n", flags[3].n, "scaling level for --model scaled");
  simulate->add_option("--x0", flags[3].x0, "initial surplus");
  simulate->add_option("--paths", flags[3].paths, "Monte Carlo sample size");
  simulate->add_option("--seed", flags[3].seed, "RNG seed");
  simulate->add_option("--horizon", flags[3].horizon, "time horizon (0: default)");
  simulate->add_option("--barrier", flags[3].barrier, "absorbing barrier (0: default)");
  simulate->add_option("--max-step", flags[3].max_step, "Brownian step cap (0: default)");
  simulate->add_option("--batches", flags[3].batches, "CSV progress batches");
  bounds->add_option("--x-grid", flags[4].x_grid, "comma-separated surplus levels");
  bounds->add_option("--n", flags[4].n, "scaling level");
  bounds->add_option("--eps", flags[4].eps, "slack inside delta and the N condition");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 1;
  }

  try {
    if (diffusion->parsed()) return run_diffusion(resolve_config(diffusion, flags[0]));
    if (classical->parsed()) return run_classical(resolve_config(classical, flags[1]));
    if (scaling->parsed()) return run_scaling(resolve_config(scaling, flags[2]));
    if (simulate->parsed()) return run_simulate(resolve_config(simulate, flags[3]));
    if (bounds->parsed()) return run_bounds(resolve_config(bounds, flags[4]));
    if (table->parsed()) return run_retention_table(resolve_config(table, flags[5]));
    std::cerr << "no subcommand selected\n" << app.help() << std::flush;
    return 1;
  } catch (const ruinopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ruinopt::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
