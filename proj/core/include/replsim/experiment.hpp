#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "replsim/generators.hpp"
#include "replsim/instance.hpp"

namespace replsim {

// A competitive-ratio experiment: one instance source (file or generator
// family), one algorithm, an optional batching wrapper, and a benchmark,
// swept over starting inventories. Produces one CSV row per c value with
// columns c, alg_mean, alg_se, lp_value, exact_opt, ratio, fallback_rate.
// Cells a configuration does not compute (or that the exact oracle refuses)
// are left empty; ratio divides alg_mean by exact_opt when it was computed
// and by lp_value otherwise.
struct ExperimentConfig {
  enum class Wrapper { None, BatchAdversarial, BatchStochastic };
  enum class Benchmark { LP, ExactOpt, Both };

  std::string instance_file;  // exclusive with gen.family
  GeneratorParams gen;
  std::string algorithm = "greedy";  // "fixed_split:x=c" substitutes the swept c
  Wrapper wrapper = Wrapper::None;
  Benchmark benchmark = Benchmark::LP;
  int trials = 100;
  int threads = 1;
  uint64_t seed = 1;
  std::vector<double> sweep;  // c values; empty runs the instance as-is
};

// Fills a config from a JSON object (the --config file); fields present in
// the JSON override what `base` carried. Unknown fields are an error.
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const ExperimentConfig& base);

// Header plus one row per swept c, '.' decimals, LF endings, byte-stable for
// a fixed config. Throws IncompatibleError for wrapper/instance pairings that
// cannot work (stochastic batching of an adversarially replenished instance).
std::string run_experiment(const ExperimentConfig& config);

// One named check with a measured-vs-target summary.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Property suites behind `verify <suite>`: sandwich, coupling, lemma41,
// lemma42, chernoff, fallback, hard_instance. Throws on unknown names.
std::vector<CheckResult> verify_suite(const std::string& suite);
std::vector<std::string> known_suites();

// Larger scenario checks used by the acceptance harness alongside the suites.
std::vector<CheckResult> check_trend();                  // Adwords inventory sweep
std::vector<CheckResult> check_appendix_fixtures();      // worked batching examples
std::vector<CheckResult> check_identity_degeneration();  // zero replenishment

}  // namespace replsim
