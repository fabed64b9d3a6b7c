#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "replsim/generators.hpp"
#include "replsim/lp.hpp"
#include "replsim/oracle.hpp"

using namespace replsim;
using namespace testutil;

TEST_CASE("capacity-bound single lane solves to the starting inventory") {
  Instance inst = single_resource(2.0, 3);
  LpModel model = build_lp(inst);
  // columns: lambda plus one serve variable per request (the no-op is a
  // column too, at zero objective weight)
  CHECK(model.resource_rows == 1);
  CHECK(model.capacity_rows == 3);
  CHECK(model.probability_rows == 3);
  LpSolution sol = solve_lp(model);
  CHECK(sol.value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(lp_feasible(model, sol.x, 1e-9));
}

TEST_CASE("closed forms on the two-phase families") {
  GeneratorParams p;
  p.c = 4;
  p.gamma = 1.0;

  p.family = "HardG";  // no replenishment: serve the four late requests
  CHECK(solve_lp(build_lp(generate(p))).value == doctest::Approx(8.0).epsilon(1e-7));

  // the mean of the single two-point arrival adds two units of supply
  p.family = "HardGS";
  CHECK(solve_lp(build_lp(generate(p))).value == doctest::Approx(10.0).epsilon(1e-7));

  // the fixed variant supplies the full four units
  p.family = "HardG2";
  CHECK(solve_lp(build_lp(generate(p))).value == doctest::Approx(12.0).epsilon(1e-7));
}

TEST_CASE("an override schedule replaces the mean supply") {
  GeneratorParams p;
  p.family = "HardGS";
  p.c = 4;
  p.gamma = 1.0;
  Instance inst = generate(p);
  std::vector<std::vector<double>> none(1, std::vector<double>(inst.horizon(), 0.0));
  CHECK(solve_lp(build_lp(inst, &none)).value == doctest::Approx(8.0).epsilon(1e-7));

  std::vector<std::vector<double>> big = none;
  big[0][4] = 4.0;  // the full support at request 5
  CHECK(solve_lp(build_lp(inst, &big)).value == doctest::Approx(12.0).epsilon(1e-7));
}

TEST_CASE("prefix supply respects timing, not only totals") {
  // two units drip in only after the single rewarded request has passed
  Instance inst;
  inst.resources.push_back(res("r1", 0.0));
  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = 2;
  inst.arrivals.types = {"pay", "idle"};
  Action a;
  a.id = "a";
  add_use(a, 0, 1.0, 1.0);
  add_reward(a, 0, 0, 1.0);
  inst.actions = {a, trivial()};
  inst.replenishment.mode = ReplenishmentMode::Adversarial;
  inst.replenishment.fixed = {{0, 2, 2.0}};
  inst.replenishment.bound_M = 2.0;
  inst.validate();
  CHECK(solve_lp(build_lp(inst)).value == doctest::Approx(0.0).epsilon(1e-9));

  inst.replenishment.fixed = {{0, 1, 2.0}};
  inst.validate();
  CHECK(solve_lp(build_lp(inst)).value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("solver output is deterministic") {
  GeneratorParams p;
  p.family = "BMatching";
  Instance inst = generate(p);
  LpSolution a = solve_lp(build_lp(inst));
  LpSolution b = solve_lp(build_lp(inst));
  CHECK(a.value == b.value);
  CHECK(a.pivots == b.pivots);
  CHECK(a.x == b.x);
}

TEST_CASE("scaled-down solutions stay feasible and score less") {
  GeneratorParams p;
  p.family = "Assortment";
  Instance inst = generate(p);
  LpModel model = build_lp(inst);
  LpSolution sol = solve_lp(model);
  REQUIRE(sol.value > 0.0);
  CHECK(lp_feasible(model, sol.x, 1e-9));
  std::vector<double> shrunk = sol.x;
  for (double& v : shrunk) v *= 0.5;
  CHECK(lp_feasible(model, shrunk, 1e-9));
  std::vector<double> grown = sol.x;
  for (double& v : grown) v *= 1.5;
  CHECK_FALSE(lp_feasible(model, grown, 1e-9));
}

TEST_CASE("the relaxation dominates the exact optimum on small instances") {
  for (double gamma : {0.5, 1.0})
    for (double c : {4.0, 8.0}) {
      GeneratorParams p;
      p.family = "HardGS";
      p.c = c;
      p.gamma = gamma;
      Instance inst = generate(p);
      double lp = solve_lp(build_lp(inst)).value;
      CHECK(lp >= exact_opt(inst) - 1e-6);
    }
}

TEST_CASE("the variable cap refuses oversized models") {
  Instance inst = single_resource(2.0, 3);
  CHECK(throws_with([&] { (void)build_lp(inst, nullptr, 2); }, "above the cap"));
}

TEST_CASE("zero-probability and pre-activation columns are pruned") {
  Instance inst;
  inst.resources.push_back(res("r1", 2.0));
  inst.arrivals.mode = ArrivalMode::Stochastic;
  inst.arrivals.horizon = 2;
  inst.arrivals.types = {"z1", "z2"};
  inst.arrivals.type_probs = {{1.0, 0.0}, {0.5, 0.5}};
  Action a;
  a.id = "a";
  add_use(a, 0, 1.0, 1.0);
  add_reward(a, 0, 0, 1.0);
  a.activation = 2;
  inst.actions = {a, trivial()};
  inst.validate();
  LpModel model = build_lp(inst);
  // request 1: only the no-op on z1 (a is not active, z2 has no mass);
  // request 2: both actions on both types
  CHECK(model.vars.size() == 5);
  for (const auto& v : model.vars) {
    bool active = v.request >= 2 || v.action == inst.trivial_action;
    CHECK(active);
    CHECK(inst.type_prob(v.request, v.type) > 0.0);
  }
}
