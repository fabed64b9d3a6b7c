#pragma once

#include <memory>
#include <string>

#include "replsim/engine.hpp"

namespace replsim {

// Highest one-step expected reward among feasible actions, ties broken toward
// the lexicographically smallest id; the do-nothing action when no feasible
// action has positive expected reward.
std::unique_ptr<Policy> make_greedy();

enum class PenaltyShape { Exponential, Zero };

// Single-resource-per-action rule that discounts each candidate's reward by a
// penalty growing with how drawn-down its target resource is.
std::unique_ptr<Policy> make_inventory_balancing(PenaltyShape shape = PenaltyShape::Exponential);

// Serve the first type for the first floor-ish `x` opportunities, then only
// later types. Requires an instance with exactly one nontrivial action.
std::unique_ptr<Policy> make_fixed_split(double x);

std::unique_ptr<Policy> make_trivial();

// Parse a policy spec string: "greedy", "ib", "ib:psi=exp", "ib:psi=zero",
// "fixed_split:x=<v>", "trivial".
std::unique_ptr<Policy> make_policy(const std::string& spec);
PolicyFactory make_policy_factory(const std::string& spec);

}  // namespace replsim
