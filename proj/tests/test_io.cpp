#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <string>

#include "spgmrf/errors.hpp"
#include "spgmrf/io.hpp"
#include "spgmrf/rng.hpp"

using namespace spgmrf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("spgmrf_io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("binary csv happy path") {
  TempDir dir;
  write_file(dir.file("d.csv"), "x1,x2,x3\n0,1,0\n1,1,1\n0,0,0\n");
  const auto data = load_binary_csv(dir.file("d.csv"), false);
  CHECK(data.n() == 3);
  CHECK(data.p() == 3);
  CHECK(data.samples()[1].bit(2) == 1);
  CHECK(data.samples()[0].bit(0) == 0);
}

TEST_CASE("missing cells impute to zero only with the flag") {
  TempDir dir;
  write_file(dir.file("d.csv"), "x1,x2\n1,NA\n,1\n");
  CHECK_THROWS_AS(load_binary_csv(dir.file("d.csv"), false), data_error);
  const auto data = load_binary_csv(dir.file("d.csv"), true);
  CHECK(data.n() == 2);
  CHECK(data.samples()[0].bit(0) == 1);
  CHECK(data.samples()[0].bit(1) == 0);
  CHECK(data.samples()[1].bit(0) == 0);
  CHECK(data.samples()[1].bit(1) == 1);
}

TEST_CASE("trailing missing cells are cells, not ragged rows") {
  TempDir dir;
  write_file(dir.file("d.csv"), "x1,x2,x3\n0,0,\n1,,1\n");
  const auto data = load_binary_csv(dir.file("d.csv"), true);
  REQUIRE(data.n() == 2);
  CHECK(data.samples()[0].bit(2) == 0);
  CHECK(data.samples()[1].bit(1) == 0);
  CHECK_THROWS_AS(load_binary_csv(dir.file("d.csv"), false), data_error);
}

TEST_CASE("ragged rows name the line") {
  TempDir dir;
  write_file(dir.file("d.csv"), "x1,x2,x3\n0,1,0\n1,1\n");
  try {
    load_binary_csv(dir.file("d.csv"), true);
    FAIL("expected data_error");
  } catch (const data_error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("dataset csv round-trips") {
  TempDir dir;
  write_file(dir.file("d.csv"), "x1,x2\n1,0\n0,1\n1,1\n");
  const auto data = load_binary_csv(dir.file("d.csv"), false);
  save_dataset_csv(dir.file("d2.csv"), data);
  const auto again = load_binary_csv(dir.file("d2.csv"), false);
  REQUIRE(again.n() == data.n());
  for (int s = 0; s < data.n(); ++s) REQUIRE(again.samples()[s] == data.samples()[s]);
}

TEST_CASE("model json round-trips bit for bit") {
  TempDir dir;
  FeatureIndexer idx(5);
  CounterStream rng(7, 0);
  std::vector<double> theta(idx.m());
  for (auto& v : theta) v = 1e3 * (2.0 * rng.next_uniform() - 1.0) / 3.0;
  ModelParams model(idx, theta);
  save_model_json(dir.file("m.json"), model);
  const auto loaded = load_model_json(dir.file("m.json"));
  REQUIRE(loaded.p() == 5);
  for (int j = 0; j < idx.m(); ++j) REQUIRE(loaded.theta()[j] == theta[j]);
}

TEST_CASE("model json rejects bad inputs") {
  TempDir dir;
  write_file(dir.file("empty.json"), R"({"format_version":1,"p":2,"theta":[]})");
  CHECK_THROWS_AS(load_model_json(dir.file("empty.json")), data_error);

  write_file(dir.file("short.json"), R"({"format_version":1,"p":2,"theta":[1.0]})");
  CHECK_THROWS_AS(load_model_json(dir.file("short.json")), data_error);

  write_file(dir.file("vers.json"), R"({"format_version":2,"p":1,"theta":[0.0]})");
  CHECK_THROWS_AS(load_model_json(dir.file("vers.json")), data_error);

  write_file(dir.file("novers.json"), R"({"p":1,"theta":[0.0]})");
  CHECK_THROWS_AS(load_model_json(dir.file("novers.json")), data_error);

  write_file(dir.file("extra.json"),
             R"({"format_version":1,"p":1,"theta":[0.0],"alpha":3})");
  CHECK_THROWS_AS(load_model_json(dir.file("extra.json")), data_error);

  write_file(dir.file("nan.json"), R"({"format_version":1,"p":1,"theta":["nan"]})");
  CHECK_THROWS_AS(load_model_json(dir.file("nan.json")), data_error);
}

TEST_CASE("truth json carries the edge set") {
  TempDir dir;
  FeatureIndexer idx(3);
  std::vector<double> theta(idx.m(), 0.0);
  theta[idx.index(0, 2)] = -1.5;
  GroundTruth truth{ModelParams(idx, theta), {{0, 2}}};
  save_truth_json(dir.file("t.json"), truth);
  const auto loaded = load_truth_json(dir.file("t.json"));
  REQUIRE(loaded.edges.size() == 1);
  CHECK(loaded.edges[0].first == 0);
  CHECK(loaded.edges[0].second == 2);
  CHECK(loaded.theta_true.theta_at(0, 2) == -1.5);
}

TEST_CASE("run config round-trips and rejects unknown keys") {
  TempDir dir;
  RunConfig cfg;
  cfg.spg.alpha = 0.3;
  cfg.spg.lambda = 0.05;
  cfg.spg.q = 777;
  cfg.spg.strategy = TauStrategy::parse("fixed:12");
  cfg.spg.master_seed = 99;
  cfg.data_path = "data.csv";
  cfg.model_out_path = "model.json";
  cfg.experiment = "demo";
  save_run_config(dir.file("c.json"), cfg);
  const auto loaded = load_run_config(dir.file("c.json"));
  CHECK(loaded.spg.alpha == cfg.spg.alpha);
  CHECK(loaded.spg.lambda == cfg.spg.lambda);
  CHECK(loaded.spg.q == cfg.spg.q);
  CHECK(loaded.spg.strategy.str() == "fixed:12");
  CHECK(loaded.spg.master_seed == 99);
  CHECK(loaded.data_path == "data.csv");
  CHECK(loaded.experiment == "demo");

  write_file(dir.file("bad.json"), R"({"format_version":1,"alhpa":0.3})");
  try {
    load_run_config(dir.file("bad.json"));
    FAIL("expected data_error");
  } catch (const data_error& e) {
    CHECK(std::string(e.what()).find("alhpa") != std::string::npos);
  }
}

TEST_CASE("nan theta is rejected on save") {
  TempDir dir;
  FeatureIndexer idx(2);
  // ModelParams refuses non-finite values, so drive the writer directly
  // through a finite model and check the guard via the loader instead.
  std::vector<double> theta{1.0, 2.0, 3.0};
  ModelParams model(idx, theta);
  CHECK_NOTHROW(save_model_json(dir.file("ok.json"), model));
  CHECK_THROWS_AS(ModelParams(idx, {1.0, std::nan(""), 0.0}), std::invalid_argument);
}

TEST_CASE("trace csv writes the advertised columns") {
  TempDir dir;
  std::vector<IterateRecord> records(2);
  records[0].iter = 1;
  records[0].tau_used = 3;
  records[0].gnorm = 0.5;
  records[0].asym_bound = 0.25;
  records[0].wall_ms = 12.5;
  records[0].exact_obj = 1.25;
  records[1] = records[0];
  records[1].iter = 2;
  records[1].tau_used = 4;

  save_trace_csv(dir.file("t.csv"), records, false, false);
  auto table = load_trace_csv(dir.file("t.csv"));
  CHECK(table.columns == std::vector<std::string>{"iter", "tau", "gnorm", "asym_bound"});
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[1][1] == 4.0);

  save_trace_csv(dir.file("t2.csv"), records, true, true);
  table = load_trace_csv(dir.file("t2.csv"));
  CHECK(table.columns == std::vector<std::string>{"iter", "tau", "gnorm", "asym_bound",
                                                  "time_ms", "exact_obj"});
  CHECK(table.rows[0][5] == 1.25);
}

}  // TEST_SUITE
