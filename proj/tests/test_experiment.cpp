#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "helpers.hpp"
#include "replsim/experiment.hpp"
#include "replsim/generators.hpp"
#include "replsim/instance.hpp"

using namespace replsim;
using namespace testutil;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.size() && line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("config json overrides the base field by field") {
  ExperimentConfig base;
  base.gen.family = "HardGS";
  base.trials = 10;
  ExperimentConfig cfg = parse_experiment_config(
      R"({"algorithm": "trivial", "trials": 25, "sweep": [4, 8], "benchmark": "exact"})",
      base);
  CHECK(cfg.gen.family == "HardGS");
  CHECK(cfg.algorithm == "trivial");
  CHECK(cfg.trials == 25);
  CHECK(cfg.sweep == std::vector<double>{4.0, 8.0});
  CHECK(cfg.benchmark == ExperimentConfig::Benchmark::ExactOpt);

  CHECK(throws_with([&] { (void)parse_experiment_config(R"({"speed": 9})", base); },
                    "unknown config field 'speed'"));
  CHECK(throws_with([&] { (void)parse_experiment_config("not json", base); },
                    "not valid JSON"));
}

TEST_CASE("experiment output is byte-stable and shaped as documented") {
  ExperimentConfig cfg;
  cfg.gen.family = "HardGS";
  cfg.gen.gamma = 1.0;
  cfg.algorithm = "fixed_split:x=c";
  cfg.benchmark = ExperimentConfig::Benchmark::ExactOpt;
  cfg.trials = 400;
  cfg.seed = 6;
  cfg.sweep = {4.0, 8.0};
  std::string out = run_experiment(cfg);
  CHECK(out == run_experiment(cfg));

  auto rows = parse_csv(out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"c", "alg_mean", "alg_se", "lp_value",
                                            "exact_opt", "ratio", "fallback_rate"});
  CHECK(rows[1][0] == "4");
  CHECK(rows[2][0] == "8");
  for (int r : {1, 2}) {
    CHECK(rows[r][3].empty());  // benchmark exact leaves the lp column blank
    double c = std::stod(rows[r][0]);
    CHECK(std::stod(rows[r][4]) == doctest::Approx(2.5 * c).epsilon(1e-9));
    // expected split value (1+gamma)c over exact_opt (1+3gamma/2)c
    CHECK(std::stod(rows[r][5]) == doctest::Approx(0.8).epsilon(0.04));
  }
}

TEST_CASE("batching an instance without replenishment changes nothing") {
  GeneratorParams p;
  p.family = "BMatching";
  Instance inst = generate(p);
  inst.replenishment.fixed.clear();
  inst.replenishment.bound_M = 0.0;
  inst.validate();
  std::string path = "bmatching_dry.json";
  {
    std::ofstream f(path, std::ios::binary);
    f << inst.serialize();
  }

  ExperimentConfig cfg;
  cfg.instance_file = path;
  cfg.algorithm = "greedy";
  cfg.trials = 50;
  cfg.seed = 14;
  std::string plain = run_experiment(cfg);
  cfg.wrapper = ExperimentConfig::Wrapper::BatchAdversarial;
  std::string wrapped = run_experiment(cfg);
  CHECK(plain == wrapped);
  std::remove(path.c_str());
}

TEST_CASE("the stochastic wrapper refuses fixed replenishment") {
  ExperimentConfig cfg;
  cfg.gen.family = "HardG2";
  cfg.gen.c = 4;
  cfg.wrapper = ExperimentConfig::Wrapper::BatchStochastic;
  cfg.trials = 5;
  CHECK_THROWS_AS((void)run_experiment(cfg), IncompatibleError);
}

TEST_CASE("config rejects contradictory sources") {
  ExperimentConfig cfg;
  cfg.instance_file = "somewhere.json";
  cfg.gen.family = "Adwords";
  CHECK(throws_with([&] { (void)run_experiment(cfg); }, "not both"));

  ExperimentConfig none;
  CHECK(throws_with([&] { (void)run_experiment(none); },
                    "instance file or a generator family"));
}

TEST_CASE("suites are enumerable and reject unknown names") {
  CHECK(known_suites().size() == 7);
  CHECK(throws_with([] { (void)verify_suite("lemma43"); }, "unknown suite"));
}

TEST_CASE("the cheap suites pass end to end") {
  for (const std::string& s : {"sandwich", "chernoff", "hard_instance"}) {
    CAPTURE(s);
    for (const CheckResult& c : verify_suite(s)) {
      CAPTURE(c.name);
      CAPTURE(c.detail);
      CHECK(c.pass);
    }
  }
}
