#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "snl/json_io.hpp"
#include "snl/model.hpp"

using namespace snl;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("cli");

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("snl_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(SNL_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) { return read_file(path); }

}  // namespace

TEST_CASE("gen example reproduces the builtin") {
  TempDir tmp;
  const auto out = tmp.file("three.json");
  REQUIRE(run("gen example three_anchor_one_sensor --out " + out) == 0);
  const auto pf = load_problem(out);
  const auto want = problem_from_framework(example_three_anchor_one_sensor());
  CHECK(pf.problem.dim == 2);
  CHECK(pf.problem.topology.n_sensors() == 1);
  CHECK(pf.problem.topology.n_anchors() == 3);
  REQUIRE(pf.problem.dist_as.size() == 3);
  for (size_t k = 0; k < 3; ++k)
    CHECK(pf.problem.dist_as[k] == want.dist_as[k]);
  REQUIRE(pf.sensors_true.has_value());
}

TEST_CASE("gen unitdisk is schema-valid and bit-reproducible") {
  TempDir tmp;
  const auto a = tmp.file("ud_a.json");
  const auto b = tmp.file("ud_b.json");
  const std::string flags =
      "gen unitdisk --square 1 --r 0.35 --n 50 --anchors corners4 --seed 7 --out ";
  REQUIRE(run(flags + a) == 0);
  REQUIRE(run(flags + b) == 0);
  CHECK(slurp(a) == slurp(b));

  const auto j = nlohmann::json::parse(slurp(a));
  for (const char* key :
       {"dim", "n_sensors", "anchors", "sensors_true", "edges_ss", "edges_as"})
    CHECK(j.contains(key));
  CHECK(j["dim"].is_number_integer());
  CHECK(j["anchors"].is_array());
  CHECK(j["anchors"].size() == 4);
  CHECK(j["sensors_true"].is_array());
  CHECK(j["sensors_true"].size() == 50);
  for (const auto& e : j["edges_ss"]) {
    CHECK(e.is_array());
    CHECK(e.size() == 3);
  }
  const auto pf = load_problem(a);
  CHECK(pf.problem.topology.n_sensors() == 50);
}

TEST_CASE("gen trilateration keeps the ordering property") {
  TempDir tmp;
  const auto out = tmp.file("tri.json");
  REQUIRE(run("gen trilateration --dim 2 --n 5 --seed 1 --out " + out) == 0);
  const auto pf = load_problem(out);
  REQUIRE(pf.sensors_true.has_value());
  for (int s = 0; s < 5; ++s) {
    int degree = 0;
    for (const auto& e : pf.problem.topology.edges_as())
      if (e.sensor == s) degree++;
    for (const auto& e : pf.problem.topology.edges_ss())
      if ((e.j == s && e.i < s) || (e.i == s && e.j < s)) degree++;
    CHECK(degree >= 3);
  }
}

TEST_CASE("solve sdr-gd drives the loss to zero") {
  TempDir tmp;
  const auto prob = tmp.file("three.json");
  const auto out = tmp.file("result.json");
  REQUIRE(run("gen example three_anchor_one_sensor --out " + prob) == 0);
  REQUIRE(run("solve sdr-gd " + prob + " --out " + out) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["converged"].get<bool>());
  CHECK(j["loss_final"].get<double>() <= 1e-10);
}

TEST_CASE("solve gd reports at least two clusters on the 3-anchor landscape") {
  TempDir tmp;
  const auto prob = tmp.file("three.json");
  const auto out = tmp.file("gd.json");
  REQUIRE(run("gen example three_anchor_one_sensor --out " + prob) == 0);
  REQUIRE(run("solve gd " + prob +
              " --b 2 --c 2 --starts 64 --seed 5 --out " + out) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["n_clusters"].get<int>() >= 2);
  CHECK(j["clusters"][0]["loss"].get<double>() <= 1e-10);
}

TEST_CASE("solve sdr on an empty-edge problem returns objective zero") {
  TempDir tmp;
  const auto prob = tmp.file("empty.json");
  SnlProblem p;
  p.dim = 2;
  p.anchors = {Eigen::Vector2d(0, 0)};
  p.topology = Topology(2, 1);
  save_problem(prob, p);
  const auto out = tmp.file("sol.json");
  REQUIRE(run("solve sdr " + prob + " --out " + out) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["objective"].get<double>() <= 1e-9);
}

TEST_CASE("certify paths") {
  TempDir tmp;
  const auto prob = tmp.file("rad.json");
  REQUIRE(run("gen example radius_example --e 1 --h 1.99 --r 2.5 --out " + prob) == 0);

  SUBCASE("sufficient condition with true positions") {
    const auto out = tmp.file("cert.json");
    REQUIRE(run("certify " + prob + " --sufficient --out " + out) == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j.contains("lhs"));
    CHECK(j.contains("rhs"));
    CHECK(j.contains("valid"));
  }
  SUBCASE("augmented certificate matches plain validity") {
    const auto plain_f = tmp.file("plain.json");
    const auto aug_f = tmp.file("aug.json");
    REQUIRE(run("certify " + prob + " --out " + plain_f) == 0);
    REQUIRE(run("certify " + prob + " --augmented --out " + aug_f) == 0);
    const auto a = nlohmann::json::parse(slurp(plain_f));
    const auto b = nlohmann::json::parse(slurp(aug_f));
    CHECK(a["valid"] == b["valid"]);
  }
  SUBCASE("missing true positions is a usage error") {
    const auto stripped = tmp.file("noload.json");
    const auto pf = load_problem(prob);
    save_problem(stripped, pf.problem);  // drops sensors_true
    CHECK(run("certify " + stripped + " --sufficient") == 1);
  }
  SUBCASE("scan requires a seed") {
    CHECK(run("certify " + prob + " --scan --segments 10") == 1);
    CHECK(run("certify " + prob + " --scan --segments 10 --seed 3") == 0);
  }
}

TEST_CASE("mc emits the documented CSV") {
  TempDir tmp;
  const auto out = tmp.file("mc.csv");
  const std::string cmd =
      "mc --square 1 --r 0.35 --anchors corners4 --n-list 5,10 --trials 5 "
      "--seed 3 --out " +
      out;
  REQUIRE(run(cmd) == 0);
  const auto text = slurp(out);
  CHECK(text.rfind("n,trials,fraction,ci_low,ci_high,bound_raw,bound_clamped,"
                   "lemma_gate_ok\n",
                   0) == 0);
  REQUIRE(run(cmd) == 0);  // same seed, same bytes
  CHECK(slurp(out) == text);
}

TEST_CASE("landscape emits a grid CSV") {
  TempDir tmp;
  const auto prob = tmp.file("one.json");
  const auto out = tmp.file("grid.csv");
  REQUIRE(run("gen example one_anchor_one_sensor --out " + prob) == 0);
  REQUIRE(run("landscape " + prob + " --sensor 0 --res 11 --out " + out) == 0);
  const auto text = slurp(out);
  CHECK(text.rfind("x,y,loss\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 11 * 11 + 1);
}

TEST_CASE("pathcheck on the mirror pair") {
  TempDir tmp;
  // Two colinear anchors, one sensor; p the solution, q its mirror.
  Framework fw;
  fw.dim = 2;
  fw.anchors = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)};
  fw.sensors = {Eigen::Vector2d(0.3, 0.7)};
  fw.topology = Topology(1, 2);
  fw.topology.add_as(0, 0);
  fw.topology.add_as(1, 0);
  const auto prob = tmp.file("mirror.json");
  save_problem(prob, problem_from_framework(fw), fw.sensors);
  const auto pfile = tmp.file("p.json");
  const auto qfile = tmp.file("q.json");
  write_file(pfile, config_to_json({Eigen::Vector2d(0.3, 0.7)}));
  write_file(qfile, config_to_json({Eigen::Vector2d(0.3, -0.7)}));
  const std::string out = tmp.file("dev.txt");
  const std::string cmd = std::string(SNL_CLI_PATH) + " pathcheck " + prob +
                          " --p " + pfile + " --q " + qfile +
                          " --samples 101 > " + out + " 2>/dev/null";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  const double dev = std::stod(slurp(out));
  CHECK(dev <= 1e-10);

  SUBCASE("a non-solution input fails with exit 1") {
    write_file(qfile, config_to_json({Eigen::Vector2d(0.5, -0.7)}));
    CHECK(run("pathcheck " + prob + " --p " + pfile + " --q " + qfile) == 1);
  }
}

TEST_CASE("exit codes") {
  TempDir tmp;
  SUBCASE("unknown flags are rejected") {
    CHECK(run("gen example three_anchor_one_sensor --nonsense 1") != 0);
  }
  SUBCASE("missing required seed is a usage error") {
    CHECK(run("gen unitdisk --r 0.3 --n 5") != 0);
  }
  SUBCASE("non-convergence exits 2") {
    const auto prob = tmp.file("three.json");
    REQUIRE(run("gen example three_anchor_one_sensor --out " + prob) == 0);
    CHECK(run("solve gd " + prob +
              " --b 2 --c 2 --starts 1 --seed 1 --max-iters 2 --step constant "
              "--eta 1e-9") == 2);
  }
  SUBCASE("unreadable file exits 1") {
    CHECK(run("solve sdr /nonexistent/file.json") == 1);
  }
}

TEST_SUITE_END();
