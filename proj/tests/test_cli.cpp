// End-to-end tests of the command-line tool: exit codes, JSON/CSV contracts,
// atomic output, deterministic batching, and the tabulated-retention round
// trip.  The binary path is injected by the build as RUINOPT_CLI_PATH.

#include <sys/wait.h>

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ruinopt/diffusion.hpp"
#include "ruinopt/model.hpp"
#include "ruinopt/classical.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ruinopt;

namespace {

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "ruinopt_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  REQUIRE(out.good());
}

struct CliRun {
  int exit_code;
  std::string out;
  std::string err;
};

CliRun run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = work_dir() / ("stdout_" + std::to_string(counter) + ".txt");
  const fs::path err = work_dir() / ("stderr_" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = std::string(RUINOPT_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return CliRun{WEXITSTATUS(status), read_file(out), read_file(err)};
}

fs::path base_config() {
  static const fs::path p = [] {
    const fs::path path = work_dir() / "base.json";
    write_file(path, R"({
      "params": {"lambda": 1.0, "c": 1.25, "theta": 0.2, "eta": 0.1, "beta": 1.0},
      "claims": {"kind": "exponential", "rate": 1.0}
    })");
    return path;
  }();
  return p;
}

std::vector<std::vector<double>> parse_csv(const std::string& text,
                                           const std::string& expected_header) {
  std::istringstream in(text);
  std::string line;
  REQUIRE(std::getline(in, line));
  REQUIRE(line == expected_header);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

const ModelParams kBase{1.0, 1.25, 0.2, 0.1, 1.0};
const ClaimDistribution kExp1 = Exponential{1.0};

}  // namespace

TEST_CASE("cli: diffusion happy path and flag overrides", "[cli]") {
  const auto run = run_cli("diffusion --config " + base_config().string());
  REQUIRE(run.exit_code == 0);
  const json j = json::parse(run.out);
  REQUIRE(j.at("command") == "diffusion");

  const auto sol = solve_alpha_star(kBase, kExp1);
  REQUIRE(j.at("alpha_star").get<double>() == Catch::Approx(sol.alpha_star).epsilon(1e-11));
  REQUIRE(j.at("rho_D").get<double>() == Catch::Approx(sol.rho_D).epsilon(1e-11));
  REQUIRE(j.at("kink").get<double>() ==
          Catch::Approx(kBase.theta / sol.rho_D).epsilon(1e-11));
  REQUIRE(j.at("inputs").at("params").at("theta").get<double>() == 0.2);
  REQUIRE(j.at("psi_D_at").is_array());
  for (const auto& entry : j.at("psi_D_at")) {
    REQUIRE(entry.at("psi_D").get<double>() ==
            Catch::Approx(psi_D(sol, entry.at("x").get<double>())).epsilon(1e-11));
  }

  // A parameter flag overrides the config value and changes the solution.
  const auto over = run_cli("diffusion --config " + base_config().string() +
                            " --theta 0.1 --c 1.15");
  REQUIRE(over.exit_code == 0);
  const json jo = json::parse(over.out);
  REQUIRE(jo.at("inputs").at("params").at("theta").get<double>() == 0.1);
  REQUIRE(jo.at("rho_D").get<double>() != j.at("rho_D").get<double>());

  // Flag-only invocation (no config) must reproduce the config run.
  const auto flags = run_cli(
      "diffusion --lambda 1 --c 1.25 --theta 0.2 --eta 0.1 --beta 1 "
      "--claims exponential:1");
  REQUIRE(flags.exit_code == 0);
  REQUIRE(json::parse(flags.out).at("rho_D").get<double>() ==
          j.at("rho_D").get<double>());
}

TEST_CASE("cli: classical happy path and empirical claims config", "[cli]") {
  const auto run = run_cli("classical --config " + base_config().string());
  REQUIRE(run.exit_code == 0);
  const json j = json::parse(run.out);
  const auto sol = solve_rho_J(kBase, kExp1);
  REQUIRE(j.at("rho_J").get<double>() == Catch::Approx(sol.rho_J).epsilon(1e-11));
  REQUIRE(j.at("threshold").get<double>() ==
          Catch::Approx(sol.threshold).epsilon(1e-11));
  REQUIRE(j.at("ordering_margin").get<double>() ==
          Catch::Approx(sol.rho_D - sol.rho_J).epsilon(1e-10));
  REQUIRE(j.at("ordering_margin").get<double>() > 0.0);

  const fs::path cfg = work_dir() / "empirical.json";
  write_file(cfg, R"({
    "params": {"lambda": 1.0, "c": 1.3, "theta": 0.2, "eta": 0.1, "beta": 1.0},
    "claims": {"kind": "empirical", "atoms": [0.4, 1.1, 2.5], "weights": [0.5, 0.3, 0.2]}
  })");
  const auto emp = run_cli("classical --config " + cfg.string());
  REQUIRE(emp.exit_code == 0);
  const json je = json::parse(emp.out);
  REQUIRE(je.at("rho_J").get<double>() > 0.0);
  REQUIRE(je.at("rho_J").get<double>() < je.at("rho_D").get<double>());
}

TEST_CASE("cli: config errors exit 1 and leave no partial output", "[cli]") {
  const fs::path bad = work_dir() / "bad_premium.json";
  write_file(bad, R"({
    "params": {"lambda": 1.0, "c": 0.9, "theta": 0.2, "eta": 0.1, "beta": 1.0},
    "claims": {"kind": "exponential", "rate": 1.0}
  })");
  const fs::path target = work_dir() / "must_not_exist.json";
  const auto run = run_cli("diffusion --config " + bad.string() + " --out " +
                           target.string());
  REQUIRE(run.exit_code == 1);
  REQUIRE(run.err.find("c > lambda*E[Y]") != std::string::npos);
  REQUIRE(!fs::exists(target));

  const fs::path garbled = work_dir() / "garbled.json";
  write_file(garbled, "{\"params\": [1,2,");
  const auto g = run_cli("diffusion --config " + garbled.string());
  REQUIRE(g.exit_code == 1);
  REQUIRE(g.err.find("cannot parse") != std::string::npos);

  const fs::path extra = work_dir() / "extra_key.json";
  write_file(extra, R"({
    "params": {"lambda": 1.0, "c": 1.25, "theta": 0.2, "eta": 0.1, "beta": 1.0},
    "claims": {"kind": "exponential", "rate": 1.0},
    "paramz": {}
  })");
  const auto e = run_cli("diffusion --config " + extra.string());
  REQUIRE(e.exit_code == 1);
  REQUIRE(e.err.find("unknown top-level key") != std::string::npos);

  const fs::path missing = work_dir() / "missing_field.json";
  write_file(missing, R"({
    "params": {"lambda": 1.0, "c": 1.25, "theta": 0.2, "eta": 0.1},
    "claims": {"kind": "exponential", "rate": 1.0}
  })");
  const auto m = run_cli("diffusion --config " + missing.string());
  REQUIRE(m.exit_code == 1);
  REQUIRE(m.err.find("params.beta: missing") != std::string::npos);

  const auto incomplete = run_cli("diffusion --lambda 1 --c 1.25");
  REQUIRE(incomplete.exit_code == 1);
  REQUIRE(incomplete.err.find("model parameters missing") != std::string::npos);
}

TEST_CASE("cli: numerical failures exit 2", "[cli]") {
  const auto run = run_cli("simulate --config " + base_config().string() +
                           " --retention zero --paths 10");
  REQUIRE(run.exit_code == 2);
  REQUIRE(run.err.find("net-profit") != std::string::npos);
}

TEST_CASE("cli: unknown subcommand prints usage and exits 1", "[cli]") {
  const auto run = run_cli("frobnicate");
  REQUIRE(run.exit_code == 1);
  REQUIRE(run.err.find("Usage") != std::string::npos);

  const auto none = run_cli("");
  REQUIRE(none.exit_code == 1);
  REQUIRE(none.err.find("Usage") != std::string::npos);
}

TEST_CASE("cli: scaling CSV has monotone adjustment coefficients", "[cli]") {
  const fs::path csv = work_dir() / "scaling.csv";
  const fs::path out = work_dir() / "scaling.json";
  const auto run = run_cli("scaling --config " + base_config().string() +
                           " --n-list 1,4,16,64 --csv " + csv.string() + " --out " +
                           out.string());
  REQUIRE(run.exit_code == 0);

  const auto rows = parse_csv(read_file(csv), "n,rho_J_n,lower,upper,retention_dev");
  REQUIRE(rows.size() == 4);
  const json j = json::parse(read_file(out));
  const double rho_D = j.at("rho_D").get<double>();
  const double C = j.at("constants").at("C").get<double>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 5);
    const double n = rows[i][0], rho_J_n = rows[i][1], lower = rows[i][2],
                 upper = rows[i][3];
    REQUIRE(upper == Catch::Approx(rho_D).epsilon(1e-12));
    REQUIRE(lower == Catch::Approx(rho_D - C / std::sqrt(n)).epsilon(1e-10));
    REQUIRE(rho_J_n > lower);
    REQUIRE(rho_J_n < upper);
    if (i > 0) {
      REQUIRE(rows[i][1] > rows[i - 1][1]);       // rho_J_n increases with n
      REQUIRE(rows[i][4] < rows[i - 1][4]);       // retention deviation shrinks
    }
  }
  REQUIRE(j.at("records").size() == 4);
}

TEST_CASE("cli: batched simulation reproduces the one-shot result exactly", "[cli]") {
  const std::string common = "simulate --config " + base_config().string() +
                             " --model classical --x0 1 --paths 8000 --seed 42";
  const fs::path one = work_dir() / "one_shot.json";
  const fs::path five = work_dir() / "five_batches.json";
  const fs::path csv = work_dir() / "batches.csv";
  REQUIRE(run_cli(common + " --out " + one.string()).exit_code == 0);
  REQUIRE(run_cli(common + " --batches 5 --csv " + csv.string() + " --out " +
                  five.string())
              .exit_code == 0);

  const json a = json::parse(read_file(one));
  const json b = json::parse(read_file(five));
  for (const char* key : {"estimate", "std_error", "ci_low", "ci_high",
                          "censored_fraction"}) {
    REQUIRE(a.at(key).get<double>() == b.at(key).get<double>());
  }
  REQUIRE(a.at("paths") == b.at("paths"));
  REQUIRE(b.at("batches").get<long long>() == 5);

  const auto rows =
      parse_csv(read_file(csv), "batch,paths_done,running_estimate,running_std_error");
  REQUIRE(rows.size() == 5);
  REQUIRE(rows.back()[1] == 8000.0);
  REQUIRE(rows.back()[2] == a.at("estimate").get<double>());
}

TEST_CASE("cli: retention table round trip reproduces the retention moments", "[cli]") {
  // First pass to learn the solved kink/threshold locations.
  const auto probe = run_cli("retention-table --config " + base_config().string() +
                             " --y-points 3");
  REQUIRE(probe.exit_code == 0);
  const json pj = json::parse(probe.out);
  const double kink = pj.at("kink").get<double>();
  const double thr = pj.at("threshold").get<double>();

  QuadratureSpec spec;
  spec.max_subdiv = 60000;

  SECTION("diffusion-limit retention: exact with the kink on the grid") {
    // y_max = 16 kink with 1601 points puts the kink exactly at grid index 100,
    // so the table is the true piecewise-linear retention, not an approximation.
    std::ostringstream args;
    args << "retention-table --config " << base_config().string() << " --y-max "
         << std::setprecision(17) << 16.0 * kink << " --y-points 1601";
    const auto run = run_cli(args.str());
    REQUIRE(run.exit_code == 0);
    const json j = json::parse(run.out);
    Tabulated tab;
    tab.grid = j.at("table").at("y").get<std::vector<double>>();
    tab.values = j.at("table").at("R_D").get<std::vector<double>>();
    REQUIRE(tab.grid.size() == 1601);

    const RetentionFunction exact =
        DiffusionOptimal{pj.at("alpha_star").get<double>(), kBase.theta, kBase.eta};
    const auto mt = retention_moments(kExp1, RetentionFunction{tab}, 0.0, spec);
    const auto me = retention_moments(kExp1, exact, 0.0, spec);
    REQUIRE(std::abs(mt.er - me.er) < 1e-10);
    REQUIRE(std::abs(mt.eyr - me.eyr) < 1e-10);
    REQUIRE(std::abs(mt.er2 - me.er2) < 1e-10);
  }

  SECTION("jump-model retention: dense grid with the threshold on the grid") {
    // Spacing thr/400 keeps the piecewise-linear curvature error below 1e-8,
    // and 24 thr reaches the 1e-10 survival tail.
    std::ostringstream args;
    args << "retention-table --config " << base_config().string() << " --y-max "
         << std::setprecision(17) << 24.0 * thr << " --y-points 9601";
    const auto run = run_cli(args.str());
    REQUIRE(run.exit_code == 0);
    const json j = json::parse(run.out);
    Tabulated tab;
    tab.grid = j.at("table").at("y").get<std::vector<double>>();
    tab.values = j.at("table").at("hRJ").get<std::vector<double>>();
    REQUIRE(tab.grid.size() == 9601);

    const RetentionFunction exact =
        ClassicalOptimal{j.at("rho_J").get<double>(), kBase.theta, kBase.eta};
    const auto mt = retention_moments(kExp1, RetentionFunction{tab}, 0.0, spec);
    const auto me = retention_moments(kExp1, exact, 0.0, spec);
    REQUIRE(std::abs(mt.er - me.er) < 1e-8);
    REQUIRE(std::abs(mt.eyr - me.eyr) < 1e-8);
    REQUIRE(std::abs(mt.er2 - me.er2) < 1e-8);
  }
}

TEST_CASE("cli: numbers are serialized with 12 significant digits", "[cli]") {
  const auto run = run_cli("bounds --config " + base_config().string() +
                           " --x-grid 0,1,2 --n 4");
  REQUIRE(run.exit_code == 0);

  // Every JSON number literal carries at most 12 significant digits.
  const std::regex number_re(R"(:\s*(-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?))");
  auto begin = std::sregex_iterator(run.out.begin(), run.out.end(), number_re);
  std::size_t checked = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    std::string digits = (*it)[1].str();
    const auto epos = digits.find_first_of("eE");
    if (epos != std::string::npos) digits.resize(epos);
    digits.erase(std::remove(digits.begin(), digits.end(), '.'), digits.end());
    digits.erase(std::remove(digits.begin(), digits.end(), '-'), digits.end());
    const auto first = digits.find_first_not_of('0');
    const std::size_t sig = first == std::string::npos ? 0 : digits.size() - first;
    REQUIRE(sig <= 12);
    ++checked;
  }
  REQUIRE(checked >= 10);

  // Round values stay compact; integers are not zero-padded or decorated.
  REQUIRE(run.out.find("\"eta\": 0.1") != std::string::npos);
  REQUIRE(run.out.find("\"n\": 4") != std::string::npos);

  // CSV cells obey the same format.
  const fs::path csv = work_dir() / "fmt.csv";
  REQUIRE(run_cli("diffusion --config " + base_config().string() +
                  " --y-max 4 --y-points 5 --csv " + csv.string())
              .exit_code == 0);
  const auto rows = parse_csv(read_file(csv), "y,R_D");
  REQUIRE(rows.size() == 5);
  REQUIRE(rows[4][0] == 4.0);
}

TEST_CASE("cli: config file command_options and output paths are honored", "[cli]") {
  const fs::path out = work_dir() / "from_config.json";
  const fs::path csv = work_dir() / "from_config.csv";
  const fs::path cfg = work_dir() / "with_options.json";
  write_file(cfg, std::string(R"({
    "params": {"lambda": 1.0, "c": 1.25, "theta": 0.2, "eta": 0.1, "beta": 1.0},
    "claims": {"kind": "exponential", "rate": 1.0},
    "command_options": {"n_list": [1, 4], "eps": 0.001},
    "output": {"json": ")") + out.string() + R"(", "csv": ")" + csv.string() + R"("}
  })");
  const auto run = run_cli("scaling --config " + cfg.string());
  REQUIRE(run.exit_code == 0);
  REQUIRE(run.out.empty());  // JSON went to the file, not stdout
  const json j = json::parse(read_file(out));
  REQUIRE(j.at("records").size() == 2);
  const auto rows = parse_csv(read_file(csv), "n,rho_J_n,lower,upper,retention_dev");
  REQUIRE(rows.size() == 2);

  // A flag overrides the config's command option.
  const auto over = run_cli("scaling --config " + cfg.string() + " --n-list 1 --out " +
                            out.string());
  REQUIRE(over.exit_code == 0);
  REQUIRE(json::parse(read_file(out)).at("records").size() == 1);
}
