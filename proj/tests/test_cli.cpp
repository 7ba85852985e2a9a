#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "spatmax/io.hpp"
#include "test_helpers.hpp"

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

int g_run_counter = 0;

RunResult run_cli(const testutil::TempDir& dir, const std::string& args) {
  const char* exe = std::getenv("SPATMAX_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "SPATMAX_CLI must point at the CLI binary");
  std::string out_path = dir.file("run_" + std::to_string(g_run_counter) + ".out");
  std::string err_path = dir.file("run_" + std::to_string(g_run_counter) + ".err");
  ++g_run_counter;
  std::string cmd = "SPATMAX_THREADS=1 \"" + std::string(exe) + "\" " + args + " >" + out_path +
                    " 2>" + err_path;
  int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testutil::read_text(out_path);
  r.err = testutil::read_text(err_path);
  return r;
}

const char* kScenarioConfig =
    "scenario.model = 1\n"
    "scenario.sigma = 1\n"
    "scenario.sites = 4\n"
    "scenario.blocks = 40\n"
    "scenario.block_size = 30\n"
    "scenario.seed = 4242\n"
    "design.mu = 0,1\n";

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("version flag and bare invocation") {
  testutil::TempDir dir("cli_version");
  RunResult version = run_cli(dir, "--version");
  CHECK(version.code == 0);
  CHECK(version.out.find("spatmax") != std::string::npos);
  RunResult bare = run_cli(dir, "");
  CHECK(bare.code == 2);
  CHECK(bare.err.find("\"type\":\"usage\"") != std::string::npos);
}

TEST_CASE("simulate, decluster, fit, variance, return level, draws") {
  testutil::TempDir dir("cli_pipeline");
  std::string cfg = dir.file("run.cfg");
  testutil::write_text(cfg, kScenarioConfig);

  RunResult sim = run_cli(dir, "simulate --config " + cfg + " --out-catalog " +
                                   dir.file("catalog.csv") + " --out-panel " +
                                   dir.file("panel.csv") + " --out-maxima " +
                                   dir.file("maxima.csv"));
  REQUIRE_MESSAGE(sim.code == 0, sim.err);
  CHECK(sim.out.find("simulated model 1 over 4 sites") != std::string::npos);
  CHECK(testutil::read_text(dir.file("catalog.csv")).rfind("# spatmax", 0) == 0);

  RunResult dec = run_cli(dir, "decluster --catalog " + dir.file("catalog.csv") + " --panel " +
                                   dir.file("panel.csv") + " --quantile 0.95 --out-panel " +
                                   dir.file("declustered.csv") + " --out-thresholds " +
                                   dir.file("thresholds.csv"));
  REQUIRE_MESSAGE(dec.code == 0, dec.err);
  CHECK(data_lines(testutil::read_text(dir.file("thresholds.csv"))).size() == 5);  // header + 4

  RunResult fit = run_cli(dir, "fit --config " + cfg + " --catalog " + dir.file("catalog.csv") +
                                   " --panel " + dir.file("declustered.csv") + " --thresholds " +
                                   dir.file("thresholds.csv") + " --maxima " +
                                   dir.file("maxima.csv") + " --out " + dir.file("fit.json"));
  REQUIRE_MESSAGE(fit.code == 0, fit.err);
  CHECK(fit.out.find("fit TWO_STEP") != std::string::npos);
  spatmax::FitResult parsed = spatmax::read_fit_json(dir.file("fit.json"));
  CHECK(parsed.beta_hat.size() == 5);
  CHECK(parsed.parameter_layout.size() == 8);
  CHECK(parsed.convergence.converged);

  // warm restart through --init parses and converges too
  RunResult warm = run_cli(dir, "fit --config " + cfg + " --catalog " + dir.file("catalog.csv") +
                                    " --panel " + dir.file("declustered.csv") + " --thresholds " +
                                    dir.file("thresholds.csv") + " --maxima " +
                                    dir.file("maxima.csv") + " --init " + dir.file("fit.json") +
                                    " --out " + dir.file("fit_warm.json"));
  REQUIRE_MESSAGE(warm.code == 0, warm.err);

  RunResult var = run_cli(dir, "variance --config " + cfg + " --catalog " +
                                   dir.file("catalog.csv") + " --fit " + dir.file("fit.json") +
                                   " --panel " + dir.file("declustered.csv") + " --thresholds " +
                                   dir.file("thresholds.csv") + " --maxima " +
                                   dir.file("maxima.csv") + " --out " + dir.file("var.json"));
  REQUIRE_MESSAGE(var.code == 0, var.err);
  CHECK(var.out.find("sandwich variance (fd A)") != std::string::npos);
  spatmax::GodambeResult g = spatmax::read_variance_json(dir.file("var.json"));
  REQUIRE(g.se.size() == 8);
  for (double se : g.se) CHECK(se > 0.0);

  RunResult point = run_cli(dir, "return-level --config " + cfg + " --catalog " +
                                     dir.file("catalog.csv") + " --fit " + dir.file("fit.json") +
                                     " --pairs s01:s04 --period 50");
  REQUIRE_MESSAGE(point.code == 0, point.err);
  CHECK(point.out.find("s01:s04 T=50 level=") != std::string::npos);

  RunResult rl = run_cli(dir, "return-level --config " + cfg + " --catalog " +
                                  dir.file("catalog.csv") + " --fit " + dir.file("fit.json") +
                                  " --variance " + dir.file("var.json") +
                                  " --pairs s01:s04,s02:s03 --period 50 --draws 40 --seed 7 "
                                  "--out " + dir.file("levels.csv"));
  REQUIRE_MESSAGE(rl.code == 0, rl.err);
  auto level_lines = data_lines(testutil::read_text(dir.file("levels.csv")));
  REQUIRE(level_lines.size() == 3);  // header + two pairs
  CHECK(level_lines[0] == "site_i,site_j,period,estimate,lower,upper,n_rejected,n_failed");
  auto row = split_csv(level_lines[1]);
  REQUIRE(row.size() == 8);
  CHECK(row[0] == "s01");
  CHECK(row[1] == "s04");
  double estimate = std::stod(row[3]);
  double lower = std::stod(row[4]);
  double upper = std::stod(row[5]);
  CHECK(std::isfinite(estimate));
  CHECK(lower <= estimate);
  CHECK(estimate <= upper);

  RunResult draws = run_cli(dir, "maxima-draws --config " + cfg + " --catalog " +
                                     dir.file("catalog.csv") + " --fit " + dir.file("fit.json") +
                                     " --period 10 --draws 5 --seed 3 --out " +
                                     dir.file("draws.csv"));
  REQUIRE_MESSAGE(draws.code == 0, draws.err);
  auto draw_lines = data_lines(testutil::read_text(dir.file("draws.csv")));
  REQUIRE(draw_lines.size() == 6);  // header + 5 draws
  CHECK(draw_lines[0] == "s01,s02,s03,s04");
  for (std::size_t i = 1; i < draw_lines.size(); ++i) {
    auto fields = split_csv(draw_lines[i]);
    REQUIRE(fields.size() == 4);
    for (const auto& f : fields) CHECK(std::stod(f) > 0.0);
  }
}

TEST_CASE("usage problems exit with code 2 and a json record") {
  testutil::TempDir dir("cli_usage");
  std::string cfg = dir.file("run.cfg");
  testutil::write_text(cfg, kScenarioConfig);

  RunResult missing = run_cli(dir, "fit --config " + cfg + " --catalog none.csv");
  CHECK(missing.code == 2);
  CHECK(missing.err.find("\"error\"") != std::string::npos);
  CHECK(missing.err.find("\"type\":\"usage\"") != std::string::npos);

  CHECK(run_cli(dir, "frobnicate").code == 2);

  RunResult no_output = run_cli(dir, "simulate --config " + cfg);
  CHECK(no_output.code == 2);
  CHECK(no_output.err.find("--out-catalog") != std::string::npos);
}

TEST_CASE("broken inputs exit with code 3") {
  testutil::TempDir dir("cli_data");
  std::string cfg = dir.file("run.cfg");
  testutil::write_text(cfg, kScenarioConfig);
  std::string bad_catalog = dir.file("bad_catalog.csv");
  testutil::write_text(bad_catalog, "id,x1,x2\na,0,0\n");

  RunResult bad = run_cli(dir, "fit --config " + cfg + " --catalog " + bad_catalog +
                                   " --panel missing.csv --out " + dir.file("fit.json"));
  CHECK(bad.code == 3);
  CHECK(bad.err.find("\"type\":\"data\"") != std::string::npos);
}

TEST_CASE("numeric failures exit with code 4") {
  testutil::TempDir dir("cli_numeric");
  std::string cfg = dir.file("run.cfg");
  testutil::write_text(cfg, kScenarioConfig);

  RunResult sim = run_cli(dir, "simulate --config " + cfg + " --out-catalog " +
                                   dir.file("catalog.csv") + " --out-panel " +
                                   dir.file("panel.csv"));
  REQUIRE_MESSAGE(sim.code == 0, sim.err);

  // xi box below the default starting value leaves no feasible simplex
  std::string tight = dir.file("tight.cfg");
  testutil::write_text(tight, std::string(kScenarioConfig) + "fit.xi_upper = 0.05\n");
  RunResult fit = run_cli(dir, "fit --config " + tight + " --catalog " + dir.file("catalog.csv") +
                                   " --panel " + dir.file("panel.csv") + " --out " +
                                   dir.file("fit.json"));
  CHECK(fit.code == 4);
  CHECK(fit.err.find("\"type\":\"numeric\"") != std::string::npos);
}

TEST_CASE("benchmark command writes metrics and a replicate log") {
  testutil::TempDir dir("cli_bench");
  std::string cfg = dir.file("bench.cfg");
  testutil::write_text(cfg,
                       "benchmark.models = 1\n"
                       "benchmark.sigmas = 1\n"
                       "benchmark.sites = 4\n"
                       "benchmark.blocks = 12\n"
                       "benchmark.replicates = 2\n"
                       "benchmark.block_size = 25\n"
                       "benchmark.seed = 5\n");
  RunResult bench = run_cli(dir, "benchmark --config " + cfg + " --out " + dir.file("metrics.csv") +
                                     " --log " + dir.file("log.jsonl"));
  REQUIRE_MESSAGE(bench.code == 0, bench.err);
  CHECK(bench.out.find("benchmark complete: 16 metric rows, 2 replicate records") !=
        std::string::npos);
  auto rows = data_lines(testutil::read_text(dir.file("metrics.csv")));
  REQUIRE(rows.size() == 17);  // header + 16 metric rows
  CHECK(split_csv(rows[1])[0] == "1");
  auto log_lines = data_lines(testutil::read_text(dir.file("log.jsonl")));
  REQUIRE(log_lines.size() == 2);
  for (const auto& line : log_lines) CHECK(line.rfind("{", 0) == 0);
}

}  // TEST_SUITE
