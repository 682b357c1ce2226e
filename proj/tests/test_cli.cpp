#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <unistd.h>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "spgmrf/io.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("spgmrf_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SPGMRF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("unknown flags exit with the usage code") {
  CHECK(run_cli("learn --no-such-flag") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("missing files exit with the data code") {
  TempDir dir;
  CHECK(run_cli("sample --model " + dir.file("nope.json") + " --out-dir " + dir.path.string()) ==
        3);
}

TEST_CASE("capacity violations exit with the capacity code") {
  TempDir dir;
  // p = 25 model is fine to build but beyond the enumeration cap
  std::ofstream out(dir.file("big.json"));
  out << "{\"format_version\":1,\"p\":25,\"theta\":[";
  const int m = 25 * 26 / 2;
  for (int j = 0; j < m; ++j) out << (j ? "," : "") << "0.0";
  out << "]}";
  out.close();
  CHECK(run_cli("oracle --model " + dir.file("big.json") + " --op log-partition") == 4);
}

TEST_CASE("generate, sample, learn, eval pipeline runs end to end") {
  TempDir dir;
  const std::string d = dir.path.string();
  REQUIRE(run_cli("generate --p 5 --edge-prob 0.5 --seed 3 --truth-out truth.json --out-dir " +
                  d) == 0);
  REQUIRE(fs::exists(dir.file("truth.json")));
  REQUIRE(fs::exists(dir.file("generate_config.json")));

  REQUIRE(run_cli("sample --model " + dir.file("truth.json") +
                  " --n 120 --burn-in 50 --seed 4 --data-out data.csv --out-dir " + d) == 0);
  REQUIRE(fs::exists(dir.file("data.csv")));

  REQUIRE(run_cli("learn --data " + dir.file("data.csv") +
                  " --lambda 0.05 --alpha 0.4 --q 100 --strategy tay --tau-max 40"
                  " --max-iters 8 --seed 5 --trace trace.csv --model-out model.json"
                  " --out-dir " +
                  d) == 0);
  REQUIRE(fs::exists(dir.file("model.json")));
  REQUIRE(fs::exists(dir.file("trace.csv")));
  REQUIRE(fs::exists(dir.file("learn_config.json")));

  REQUIRE(run_cli("eval --truth " + dir.file("truth.json") + " --model " +
                  dir.file("model.json") + " --out metrics.json --out-dir " + d) == 0);
  REQUIRE(fs::exists(dir.file("metrics.json")));
  const auto metrics = slurp(dir.file("metrics.json"));
  CHECK(metrics.find("auc") != std::string::npos);
}

TEST_CASE("bounds subcommand emits the tau table") {
  TempDir dir;
  const std::string d = dir.path.string();
  REQUIRE(run_cli("generate --p 4 --edge-prob 0.6 --seed 8 --truth-out t.json --out-dir " + d) ==
          0);
  REQUIRE(run_cli("bounds --model " + dir.file("t.json") +
                  " --tau-min 1 --tau-max 12 --out b.csv --out-dir " + d) == 0);
  const auto table = spgmrf::load_trace_csv(dir.file("b.csv"));
  CHECK(table.columns ==
        std::vector<std::string>{"tau", "grand_sum", "asym_bound"});
  REQUIRE(table.rows.size() == 12);
  // asym bound column is 2 sqrt(m) times the grand sum
  const double sqrt_m = std::sqrt(10.0);
  for (const auto& row : table.rows)
    REQUIRE(row[2] == doctest::Approx(2.0 * sqrt_m * row[1]).epsilon(1e-12));
}

TEST_CASE("oracle answers match the library closed forms") {
  TempDir dir;
  std::ofstream out(dir.file("m.json"));
  out << R"({"format_version":1,"p":1,"theta":[0.0]})";
  out.close();
  const std::string cmd = std::string(SPGMRF_CLI_PATH) + " oracle --model " + dir.file("m.json") +
                          " --op log-partition > " + dir.file("out.json") + " 2>/dev/null";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  const auto text = slurp(dir.file("out.json"));
  CHECK(text.find("0.6931471805599453") != std::string::npos);  // ln 2
}

TEST_CASE("identical config and seed reproduce byte-identical artifacts") {
  TempDir dir;
  const std::string d = dir.path.string();
  REQUIRE(run_cli("generate --p 4 --edge-prob 0.5 --seed 11 --truth-out t.json --out-dir " + d) ==
          0);
  REQUIRE(run_cli("sample --model " + dir.file("t.json") +
                  " --n 60 --burn-in 30 --seed 12 --data-out data.csv --out-dir " + d) == 0);
  const std::string learn_args = "learn --data " + dir.file("data.csv") +
                                 " --lambda 0.06 --q 80 --strategy fixed:3 --max-iters 5"
                                 " --seed 13 --trace {T} --model-out {M} --out-dir " +
                                 d;
  auto subst = [&](std::string s, const std::string& t, const std::string& m) {
    s.replace(s.find("{T}"), 3, t);
    s.replace(s.find("{M}"), 3, m);
    return s;
  };
  REQUIRE(run_cli(subst(learn_args, "tr1.csv", "m1.json")) == 0);
  REQUIRE(run_cli(subst(learn_args, "tr2.csv", "m2.json")) == 0);
  CHECK(slurp(dir.file("tr1.csv")) == slurp(dir.file("tr2.csv")));
  CHECK(slurp(dir.file("m1.json")) == slurp(dir.file("m2.json")));
}

}  // TEST_SUITE
