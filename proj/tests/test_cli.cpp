#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kCli = UVLAB_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("uvlab_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const char* kSmallConfig = R"({
  "model": {"d": 1, "p": 0.5, "m_b": 1.0, "m_f": 1.2},
  "cutoffs": {"lambda_list": [2.0, 4.0], "chi_shape": "smooth_bump"},
  "discretization": {"q_max": 4.0, "cells_per_axis": 2, "boson_cap": 2},
  "solver": {"depth_limit": 3, "audit_configs": 4, "quad_resolution": 16}
})";

}  // namespace

TEST_CASE("enumerate reports the weight-one count") {
  TempDir dir("enum");
  REQUIRE(run("enumerate --k 2 --out " + dir.str()) == 0);
  const auto rows = read_csv(dir.path / "enumerate.csv");
  REQUIRE(rows.size() == 4);  // header + k = 0,1,2
  CHECK(rows[0][0] == "k");
  CHECK(rows[2][0] == "1");
  CHECK(rows[2][1] == "4");  // admissible single-set words at weight 1
  CHECK(rows[2][2] == "4");
  CHECK(rows[3][3] == "17");  // shadow coefficient at weight 2
}

TEST_CASE("thresholds marks dimension three infeasible at p = 1/2") {
  TempDir dir("thr");
  REQUIRE(run("thresholds --out " + dir.str()) == 0);
  const auto rows = read_csv(dir.path / "thresholds.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[1][0] == "1");
  CHECK(rows[1][5] == "true");
  CHECK(rows[2][5] == "true");
  CHECK(rows[3][0] == "3");
  CHECK(rows[3][5] == "false");
}

TEST_CASE("sweep with zero coupling writes all-zero energy columns") {
  TempDir dir("sweep0");
  write_file(dir.path / "cfg.json", R"({
    "model": {"coupling": 0.0},
    "cutoffs": {"lambda_list": [1.0, 2.0]},
    "discretization": {"q_max": 2.0, "cells_per_axis": 2, "boson_cap": 1}
  })");
  REQUIRE(run("sweep --config " + (dir.path / "cfg.json").string() + " --out " +
              dir.str()) == 0);
  const auto rows = read_csv(dir.path / "sweep.csv");
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::abs(std::stod(rows[i][1])) < 1e-12);  // e_lambda
    CHECK(std::abs(std::stod(rows[i][2])) < 1e-12);  // e2
    CHECK(std::abs(std::stod(rows[i][3])) < 1e-12);  // renormalized
  }
}

TEST_CASE("exit codes distinguish config errors") {
  TempDir dir("exit");
  SUBCASE("unknown flag") { CHECK(run("enumerate --bogus 3") == 1); }
  SUBCASE("missing subcommand") { CHECK(run("--out " + dir.str()) == 1); }
  SUBCASE("missing config file") {
    CHECK(run("sweep --config " + (dir.path / "nope.json").string()) == 1);
  }
  SUBCASE("invalid enum") {
    write_file(dir.path / "bad.json", R"({"cutoffs": {"chi_shape": "boxcar"}})");
    CHECK(run("build --config " + (dir.path / "bad.json").string() + " --out " +
              dir.str()) == 1);
  }
  SUBCASE("grid does not cover the cutoff") {
    write_file(dir.path / "bad2.json",
               R"({"cutoffs": {"lambda_list": [8.0]},
                   "discretization": {"q_max": 4.0}})");
    CHECK(run("build --config " + (dir.path / "bad2.json").string() + " --out " +
              dir.str()) == 1);
  }
  SUBCASE("nonpositive tolerance") {
    write_file(dir.path / "bad3.json", R"({"solver": {"tol": 0.0}})");
    CHECK(run("build --config " + (dir.path / "bad3.json").string() + " --out " +
              dir.str()) == 1);
  }
}

TEST_CASE("identical config and seed give byte-identical CSV output") {
  TempDir dir("det");
  write_file(dir.path / "cfg.json", kSmallConfig);
  const std::string cfg = (dir.path / "cfg.json").string();
  for (const std::string sub : {"audit", "sweep", "neumann", "counterterm"}) {
    fs::create_directories(dir.path / "a");
    fs::create_directories(dir.path / "b");
    REQUIRE(run(sub + " --config " + cfg + " --out " + (dir.path / "a").string()) == 0);
    REQUIRE(run(sub + " --config " + cfg + " --out " + (dir.path / "b").string()) == 0);
    for (const auto& entry : fs::directory_iterator(dir.path / "a")) {
      if (entry.path().extension() != ".csv") continue;
      CAPTURE(entry.path().filename().string());
      CHECK(slurp(entry.path()) ==
            slurp(dir.path / "b" / entry.path().filename()));
    }
    fs::remove_all(dir.path / "a");
    fs::remove_all(dir.path / "b");
  }
}

TEST_CASE("a run can be reproduced from its manifest") {
  TempDir dir("manifest");
  write_file(dir.path / "cfg.json", kSmallConfig);
  fs::create_directories(dir.path / "first");
  fs::create_directories(dir.path / "second");
  REQUIRE(run("sweep --config " + (dir.path / "cfg.json").string() + " --out " +
              (dir.path / "first").string()) == 0);
  REQUIRE(run("sweep --config " + (dir.path / "first" / "manifest.json").string() +
              " --out " + (dir.path / "second").string()) == 0);
  CHECK(slurp(dir.path / "first" / "sweep.csv") ==
        slurp(dir.path / "second" / "sweep.csv"));
  // manifest echoes the effective configuration
  const std::string manifest = slurp(dir.path / "first" / "manifest.json");
  CHECK(manifest.find("\"subcommand\": \"sweep\"") != std::string::npos);
  CHECK(manifest.find("\"cells_per_axis\": 2") != std::string::npos);
}

TEST_CASE("command-line overrides reach the run") {
  TempDir dir("override");
  SUBCASE("seed override lands in the manifest") {
    write_file(dir.path / "cfg.json", kSmallConfig);
    REQUIRE(run("audit --config " + (dir.path / "cfg.json").string() +
                " --seed 1234 --out " + dir.str()) == 0);
    CHECK(slurp(dir.path / "manifest.json").find("\"seed\": 1234") !=
          std::string::npos);
  }
  SUBCASE("lambda-list override changes the sweep rows") {
    REQUIRE(run("sweep --lambda-list 1.0,3.0 --out " + dir.str()) == 0);
    const auto rows = read_csv(dir.path / "sweep.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][0] == "1");
    CHECK(rows[2][0] == "3");
  }
  SUBCASE("thread env fallback still succeeds") {
    const std::string cmd = "UVLAB_THREADS=2 " + kCli + " thresholds --out " +
                            dir.str() + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(slurp(dir.path / "manifest.json").find("\"threads\": 2") !=
          std::string::npos);
  }
}

TEST_CASE("algebra-check and build succeed on the default model") {
  TempDir dir("basic");
  REQUIRE(run("algebra-check --out " + dir.str()) == 0);
  const auto rows = read_csv(dir.path / "algebra_check.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].back() == "true");
  REQUIRE(run("build --out " + dir.str()) == 0);
  const auto build_rows = read_csv(dir.path / "build.csv");
  REQUIRE(build_rows.size() == 4);  // header + three cutoffs
  CHECK(build_rows[1][3] == "true");
}
