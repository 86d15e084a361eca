#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "peakgrid/model.hpp"
#include "peakgrid/results.hpp"

namespace fs = std::filesystem;

namespace {

const char* kCli = PEAKGRID_CLI_PATH;

struct Tmp {
  fs::path dir;
  Tmp() {
    dir = fs::temp_directory_path() /
          ("peakgrid_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Tmp() { fs::remove_all(dir); }
  std::string operator/(const std::string& name) const {
    return (dir / name).string();
  }
};

int run(const std::string& args) {
  const std::string cmd = std::string(kCli) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

const char* kSmallConfig = R"({
  "n_customers": 2, "jobs_per_customer": 1, "horizon": 24,
  "tww": [0.2], "beta_range": [1, 2], "demand_range": [2, 5],
  "lambda_range": [0.5, 1.5], "p_max": 10,
  "kappa_set": [200, 600], "seed": 42, "replicates": 2
})";

}  // namespace

TEST_CASE("generate writes instances and a manifest, deterministically") {
  Tmp tmp;
  write(tmp / "config.json", kSmallConfig);
  REQUIRE(run("generate --config " + (tmp / "config.json") + " --out " +
              (tmp / "a")) == 0);
  REQUIRE(fs::exists(tmp.dir / "a" / "manifest.json"));
  int count = 0;
  for (const auto& e : fs::directory_iterator(tmp.dir / "a"))
    if (e.path().extension() == ".json") ++count;
  CHECK(count == 2 * 2 + 1);  // kappa x replicates + manifest
  REQUIRE(run("generate --config " + (tmp / "config.json") + " --out " +
              (tmp / "b")) == 0);
  CHECK(slurp(tmp / "a/inst_k200_tww20_r0.json") ==
        slurp(tmp / "b/inst_k200_tww20_r0.json"));
  // instances parse and validate
  const auto inst =
      peakgrid::load_instance(tmp / "a/inst_k600_tww20_r1.json");
  CHECK(peakgrid::validate(inst).empty());
}

TEST_CASE("generate rejects a bad config naming the field") {
  Tmp tmp;
  write(tmp / "bad.json", R"({"beta_range": [3, 1]})");
  const std::string cmd = std::string(kCli) + " generate --config " +
                          (tmp / "bad.json") + " --out " + (tmp / "out") +
                          " 2> " + (tmp / "err.txt");
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 1);
  CHECK(slurp(tmp / "err.txt").find("beta_range") != std::string::npos);
}

TEST_CASE("solve, verify, tamper, re-verify") {
  Tmp tmp;
  write(tmp / "config.json", kSmallConfig);
  REQUIRE(run("generate --config " + (tmp / "config.json") + " --out " +
              (tmp / "inst")) == 0);
  const std::string instance = tmp / "inst/inst_k200_tww20_r0.json";

  for (const std::string model : {"bc", "mp", "cp"}) {
    const std::string result = tmp / ("result_" + model + ".json");
    REQUIRE(run("solve --instance " + instance + " --model " + model +
                " --time-limit 10 --out " + result) == 0);
    CHECK(run("verify --result " + result) == 0);
    const auto rec = peakgrid::load_run_record(result);
    CHECK(rec.status == (model == "bc" ? "Evaluated" : rec.status));
  }

  // tampering with the outcome must fail verification
  auto rec = peakgrid::load_run_record(tmp / "result_mp.json");
  for (auto& row : rec.schedule.x)
    for (auto& x : row)
      if (x > 0.5) {
        x *= 0.5;  // demand no longer met
        goto tampered;
      }
tampered:
  peakgrid::save_run_record(rec, tmp / "tampered.json");
  CHECK(run("verify --result " + (tmp / "tampered.json")) == 1);
}

TEST_CASE("cp without competitor prices fails with a clear error") {
  Tmp tmp;
  write(tmp / "config.json", kSmallConfig);
  REQUIRE(run("generate --config " + (tmp / "config.json") + " --out " +
              (tmp / "inst")) == 0);
  auto inst = peakgrid::load_instance(tmp / "inst/inst_k200_tww20_r0.json");
  inst.competitor_prices.reset();
  peakgrid::save_instance(inst, tmp / "mono.json");
  const std::string cmd = std::string(kCli) + " solve --instance " +
                          (tmp / "mono.json") + " --model cp 2> " +
                          (tmp / "err.txt");
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 1);
  CHECK(slurp(tmp / "err.txt").find("competitor prices required") !=
        std::string::npos);
}

TEST_CASE("experiment emits byte-identical CSV tables on rerun") {
  Tmp tmp;
  write(tmp / "config.json", kSmallConfig);
  const std::string common = "experiment --config " + (tmp / "config.json") +
                             " --time-limit 2 --threads 1 --out ";
  REQUIRE(run(common + (tmp / "run1")) == 0);
  REQUIRE(run(common + (tmp / "run2")) == 0);
  for (const char* name : {"table1.csv", "table3.csv", "figures.csv",
                           "loadcurve.csv"}) {
    INFO(name);
    const std::string a = slurp(tmp / ("run1/" + std::string(name)));
    CHECK(!a.empty());
    CHECK(a == slurp(tmp / ("run2/" + std::string(name))));
  }
  CHECK(slurp(tmp / "run1/table1.csv")
            .starts_with("kappa,MP_EB,MP_IC,MP_TC,CP_EB,CP_IC,CP_TC"));
  CHECK(slurp(tmp / "run1/table3.csv")
            .starts_with("kappa,avg_time_MP,avg_time_CP,avg_gap_MP,"
                         "avg_gap_CP,unsolved_MP,unsolved_CP"));
  // every persisted result passes verification
  for (const auto& e : fs::directory_iterator(tmp.dir / "run1" / "results")) {
    INFO(e.path().string());
    CHECK(run("verify --result " + e.path().string()) == 0);
  }
}

TEST_CASE("environment variable overrides the time limit") {
  Tmp tmp;
  write(tmp / "config.json", kSmallConfig);
  REQUIRE(run("generate --config " + (tmp / "config.json") + " --out " +
              (tmp / "inst")) == 0);
  const std::string instance = tmp / "inst/inst_k600_tww20_r0.json";
  const std::string cmd = "PEAKGRID_TIME_LIMIT=0.0001 " + std::string(kCli) +
                          " solve --instance " + instance +
                          " --model mp --out " + (tmp / "res.json") +
                          " >/dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  const auto rec = peakgrid::load_run_record(tmp / "res.json");
  CHECK(rec.status == "TimeLimit");
}
