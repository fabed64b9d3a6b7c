#pragma once

#include "replsim/engine.hpp"
#include "replsim/instance.hpp"

namespace replsim {

// Enumeration budgets for the exact evaluators. Instances outside these
// limits (or outside the deterministic-consumption scope) are refused with
// IncompatibleError rather than approximated.
struct OracleLimits {
  long long max_sequences = 1000000;  // action sequences tried per branch
  int max_coins = 12;                 // two-point replenishment coins
  long long max_branches = 4096;      // (type sequence) x (coin) branches
};

// Expected value of the best-possible min-resource reward, where "best" sees
// the whole branch (type sequence and replenishment realization) up front.
// Scope: success probabilities in {0, 1} and no geometric release on any
// consuming use. Single-resource instances run a memoized search over
// (arrival, inventory, outstanding holds); otherwise every action sequence
// is tried.
double exact_opt(const Instance& inst, const OracleLimits& lim = {});

// Expected min-resource reward of one (deterministic) policy, computed by
// weighting a full engine run per branch. Same scope restrictions.
double exact_expected_objective(const Instance& inst, const PolicyFactory& make_policy,
                                const OracleLimits& lim = {});

}  // namespace replsim
