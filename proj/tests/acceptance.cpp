// Acceptance harness: runs the ten gate checks and prints one line per check.
// Exits nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "replsim/experiment.hpp"

using namespace replsim;

namespace {

struct Gate {
  std::string name;
  std::vector<CheckResult> (*fn)();
};

std::vector<CheckResult> via_suite(const char* suite) { return verify_suite(suite); }

std::vector<CheckResult> g1() { return via_suite("hard_instance"); }
std::vector<CheckResult> g2() { return via_suite("lemma41"); }
std::vector<CheckResult> g3() { return via_suite("sandwich"); }
std::vector<CheckResult> g4() { return via_suite("coupling"); }
std::vector<CheckResult> g5() { return via_suite("fallback"); }
std::vector<CheckResult> g6() { return via_suite("chernoff"); }
std::vector<CheckResult> g7() { return check_trend(); }
std::vector<CheckResult> g8() { return check_appendix_fixtures(); }
std::vector<CheckResult> g9() { return check_identity_degeneration(); }
std::vector<CheckResult> g10() { return via_suite("lemma42"); }

}  // namespace

int main() {
  const Gate gates[] = {
      {"hard instance values", g1},
      {"offline bound dominates exact optimum", g2},
      {"lump accounting", g3},
      {"wrapper coupling", g4},
      {"fallback rate", g5},
      {"tail bound", g6},
      {"budget trend", g7},
      {"worked examples", g8},
      {"identity degeneration", g9},
      {"rounded solution guarantee", g10},
  };

  int failures = 0;
  for (const Gate& g : gates) {
    auto start = std::chrono::steady_clock::now();
    std::vector<CheckResult> results;
    std::string crash;
    try {
      results = g.fn();
    } catch (const std::exception& e) {
      crash = e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    bool pass = crash.empty() && !results.empty();
    for (const CheckResult& r : results)
      if (!r.pass) pass = false;

    std::printf("[%s] %s (%.1fs)\n", pass ? "PASS" : "FAIL", g.name.c_str(), secs);
    if (!crash.empty()) std::printf("       threw: %s\n", crash.c_str());
    for (const CheckResult& r : results)
      if (!r.pass) std::printf("       %s: %s\n", r.name.c_str(), r.detail.c_str());
    if (!pass) ++failures;
    std::fflush(stdout);
  }

  if (failures) std::printf("%d of 10 gates failed\n", failures);
  return failures ? 1 : 0;
}
