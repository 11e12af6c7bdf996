#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gglab/grid.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = GGLAB_CLI_PATH;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gglab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("cli coeffs: reference value and derived identities") {
  auto [code, out] =
      oracle::run_command(kCli + " coeffs --n 2 --sigma2 1 --tau2 9 --out '' 2>/dev/null");
  CHECK(code == 0);
  const json j = json::parse(out);
  CHECK(j["a_n"].get<double>() == 0.9090909090909091);
  CHECK(j["b_n"].get<double>() == doctest::Approx(1.0 / 11.0).epsilon(1e-15));

  auto [code3, out3] =
      oracle::run_command(kCli + " coeffs --n 3 --sigma2 4 --tau2 5 --out '' 2>/dev/null");
  CHECK(code3 == 0);
  const json j3 = json::parse(out3);
  CHECK(j3["identities"]["a_plus_peers_b"].get<double>() == 1.0);
}

TEST_CASE("cli rejects invalid parameters with exit code 2") {
  CHECK(oracle::run_command(kCli + " coeffs --n 1 2>/dev/null").first == 2);
  CHECK(oracle::run_command(kCli + " coeffs --sigma2 -3 2>/dev/null").first == 2);
  CHECK(oracle::run_command(kCli + " coeffs --no-such-flag 2>/dev/null").first == 2);
  CHECK(oracle::run_command(kCli + " 2>/dev/null").first == 2);
}

TEST_CASE("cli check: condition verdict drives the exit code") {
  auto [code, out] =
      oracle::run_command(kCli + " check --n 2 --sigma2 1 --tau2 9 --out '' 2>/dev/null");
  CHECK(code == 3);
  const json j = json::parse(out);
  CHECK(j["banach_ok"].get<bool>() == false);
  CHECK(j["n2_reformulated_lhs"].get<double>() == doctest::Approx(60.9).epsilon(1e-9));

  // scaled up at the same noise ratio the condition holds
  auto [code2, out2] = oracle::run_command(
      kCli + " check --n 2 --sigma2 17000 --tau2 153000 --out '' 2>/dev/null");
  CHECK(code2 == 0);
  CHECK(json::parse(out2)["banach_ok"].get<bool>() == true);
}

TEST_CASE("cli solve: artifacts, exit codes, eighth-iterate proximity") {
  const auto dir = fresh_dir("solve");
  const std::string base = kCli +
      " solve --n 2 --sigma2 1 --tau2 9 --grid-lo -30 --grid-hi 40"
      " --grid-points 129 --gh-nodes 16 --tol 1e-5 --max-iter 60 --dump-iterates"
      " --figure-view --out " + dir.string();
  auto [code, out] = oracle::run_command(base + " 2>/dev/null");
  CHECK(code == 0);
  const json status = json::parse(out);
  CHECK(status["converged"].get<bool>());
  CHECK(fs::exists(dir / "solution.csv"));
  CHECK(fs::exists(dir / "solution.json"));
  CHECK(fs::exists(dir / "diagnostics.json"));
  CHECK(fs::exists(dir / "g_view.csv"));
  CHECK(fs::exists(dir / "iterates" / "iter_008.csv"));

  // the eighth iterate sits within 1e-2 of the final answer in sup norm
  const auto final_g = gglab::grid_from_csv(slurp(dir / "solution.csv"), 1.0, 1.0, 2.0);
  const auto iter8 =
      gglab::grid_from_csv(slurp(dir / "iterates" / "iter_008.csv"), 1.0, 1.0, 2.0);
  CHECK(gglab::sup_distance(final_g, iter8) <= 1e-2);

  // the figure view is the solution shifted down by one
  const auto view = gglab::grid_from_csv(slurp(dir / "g_view.csv"), 1.0, -1.0, 1.0);
  CHECK((view.values() - (final_g.values().array() - 1.0).matrix())
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // an insufficient iteration budget reports exit code 4
  const auto dir2 = fresh_dir("solve_short");
  auto [code2, out2] = oracle::run_command(
      kCli + " solve --n 2 --sigma2 1 --tau2 9 --grid-points 65 --gh-nodes 8"
             " --tol 1e-6 --max-iter 1 --out " + dir2.string() + " 2>/dev/null");
  CHECK(code2 == 4);
}

TEST_CASE("cli solve: identical configurations produce byte-identical artifacts") {
  const auto dir_a = fresh_dir("det_a");
  const auto dir_b = fresh_dir("det_b");
  const std::string args =
      " solve --n 2 --sigma2 1 --tau2 9 --grid-points 65 --gh-nodes 12"
      " --tol 1e-4 --max-iter 40 --seed 5 ";
  CHECK(oracle::run_command(kCli + args + "--out " + dir_a.string() + " 2>/dev/null").first == 0);
  CHECK(oracle::run_command(kCli + args + "--out " + dir_b.string() + " 2>/dev/null").first == 0);
  for (const char* name : {"solution.csv", "solution.json", "diagnostics.json"}) {
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
  }
}

TEST_CASE("cli config file: flags override the file, file overrides defaults") {
  const auto dir = fresh_dir("config");
  {
    std::ofstream cfg(dir / "run.json");
    cfg << R"({"n": 2, "sigma2": 1.0, "tau2": 9.0})";
  }
  // config file supplies tau2 = 9; the flag overrides sigma2
  auto [code, out] = oracle::run_command(
      kCli + " coeffs --config " + (dir / "run.json").string() +
      " --sigma2 4 --out '' 2>/dev/null");
  CHECK(code == 0);
  const json j = json::parse(out);
  CHECK(j["tau2"].get<double>() == 9.0);
  CHECK(j["sigma2"].get<double>() == 4.0);
  // missing config file is a usage error
  CHECK(oracle::run_command(kCli + " coeffs --config /nonexistent.json 2>/dev/null").first == 2);
}

TEST_CASE("cli verify: pass on a solution, usage error when the file is missing") {
  const auto dir = fresh_dir("verify");
  CHECK(oracle::run_command(
            kCli + " solve --n 2 --sigma2 1 --tau2 9 --grid-points 129 --gh-nodes 24"
                   " --tol 1e-6 --max-iter 60 --out " + dir.string() + " 2>/dev/null")
            .first == 0);
  auto [code, out] = oracle::run_command(
      kCli + " verify --solution " + (dir / "solution.json").string() +
      " --probes 40 --mc-samples 20000 --seed 9 --out " + dir.string() + " 2>/dev/null");
  CHECK(code == 0);
  const json j = json::parse(out);
  CHECK(j["pass"].get<bool>());
  CHECK(fs::exists(dir / "verify.json"));

  CHECK(oracle::run_command(kCli + " verify --solution /nonexistent.json 2>/dev/null").first == 2);

  // a tampered solution fails verification with exit code 5
  json solution = json::parse(slurp(dir / "solution.json"));
  for (auto& v : solution["g"]["values"]) v = 1.5;
  {
    std::ofstream broken(dir / "broken.json");
    broken << solution.dump();
  }
  CHECK(oracle::run_command(
            kCli + " verify --solution " + (dir / "broken.json").string() +
            " --probes 30 --mc-samples 20000 --out " + dir.string() + " 2>/dev/null")
            .first == 5);
}

TEST_CASE("cli witness and simulate") {
  const auto dir = fresh_dir("witness");
  auto [code, out] = oracle::run_command(
      kCli + " witness --n 2 --sigma2 1 --tau2 1 --t 1,1 --eps 0.01"
             " --mc-samples 20000 --out " + dir.string() + " 2>/dev/null");
  CHECK(code == 0);
  const json j = json::parse(out);
  CHECK(j["mc_peer_risky"].get<double>() < 0.01);
  CHECK(j["posterior_mean"].get<double>() == doctest::Approx(0.99).epsilon(1e-8));

  auto [scode, sout] = oracle::run_command(
      kCli + " simulate --n 2 --sigma2 1 --tau2 9 --theta -1000000 --t 1.5,1.5"
             " --out " + dir.string() + " 2>/dev/null");
  CHECK(scode == 0);
  const json sj = json::parse(sout);
  for (const auto& p : sj["payoffs"]) {
    CHECK(p.get<double>() == doctest::Approx(2.0 + 1000000.0).epsilon(1e-12));
  }
  // strategy file path: linear thresholds spelled out in JSON
  {
    std::ofstream strat(dir / "strategy.json");
    strat << R"({"kind": "linear-threshold", "thresholds": [1.5, 1.5]})";
  }
  auto [fcode, fout] = oracle::run_command(
      kCli + " simulate --n 2 --sigma2 1 --tau2 9 --theta 1000000 --strategy " +
      (dir / "strategy.json").string() + " --out " + dir.string() + " 2>/dev/null");
  CHECK(fcode == 0);
  for (const auto& p : json::parse(fout)["payoffs"]) CHECK(p.get<double>() == 0.0);
}
