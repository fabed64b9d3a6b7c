#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "replsim/instance.hpp"

namespace replsim {

// Parameterized instance families. Fields left at zero fall back to a
// family-specific default; families ignore parameters they have no use for.
struct GeneratorParams {
  std::string family;
  int n = 0;          // resources
  int m = 0;          // requests
  double c = 0.0;     // starting inventory (per resource unless noted)
  int d = 0;          // max bundle size (Hypergraph)
  double gamma = 1.0; // hard-instance load factor
  uint64_t seed = 1;
};

std::vector<std::string> known_families();

// Builds and validates one instance. Adversarial schedules are drawn from the
// seed once and frozen into the instance, so the output is a plain fixed
// input for everything downstream.
Instance generate(const GeneratorParams& params);

}  // namespace replsim
