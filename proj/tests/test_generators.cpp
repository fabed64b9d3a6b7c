#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "replsim/algorithms.hpp"
#include "replsim/engine.hpp"
#include "replsim/generators.hpp"
#include "replsim/lp.hpp"

using namespace replsim;
using namespace testutil;

TEST_CASE("every family produces a valid, serializable instance") {
  for (const std::string& name : known_families()) {
    CAPTURE(name);
    GeneratorParams p;
    p.family = name;
    Instance inst = generate(p);
    std::string text = inst.serialize();
    Instance back = Instance::load(text);
    CHECK(back.serialize() == text);
    CHECK(inst.trivial_action >= 0);
  }
}

TEST_CASE("generation is a pure function of the seed") {
  for (const std::string& name : {"BMatching", "Adwords", "Hypergraph", "Assortment"}) {
    CAPTURE(name);
    GeneratorParams p;
    p.family = name;
    p.seed = 12;
    std::string a = generate(p).serialize();
    std::string b = generate(p).serialize();
    CHECK(a == b);
    p.seed = 13;
    CHECK(generate(p).serialize() != a);
  }
}

TEST_CASE("unknown families are listed in the error") {
  GeneratorParams p;
  p.family = "Knapsack";
  CHECK(throws_with([&] { (void)generate(p); }, "BMatching"));
}

TEST_CASE("two-phase family shapes") {
  GeneratorParams p;
  p.c = 6;
  p.gamma = 0.5;

  p.family = "HardG";
  Instance g = generate(p);
  CHECK(g.horizon() == 9);
  CHECK(g.arrivals.mode == ArrivalMode::Stochastic);
  CHECK(g.replenishment.mode == ReplenishmentMode::Stochastic);
  CHECK(g.replenishment.entries.empty());
  for (int j = 1; j <= 6; ++j) CHECK(g.type_prob(j, 0) == 1.0);
  for (int j = 7; j <= 9; ++j) CHECK(g.type_prob(j, 1) == 1.0);

  p.family = "HardGS";
  Instance gs = generate(p);
  REQUIRE(gs.replenishment.entries.size() == 1);
  CHECK(gs.replenishment.entries[0].request == 7);
  CHECK(gs.replenishment.entries[0].support == 3.0);
  CHECK(gs.replenishment.entries[0].mean == 1.5);
  CHECK(gs.replenishment.bound_M == 3.0);

  p.family = "HardG1";
  Instance g1 = generate(p);
  CHECK(g1.replenishment.mode == ReplenishmentMode::Adversarial);
  CHECK(g1.replenishment.fixed.empty());

  p.family = "HardG2";
  Instance g2 = generate(p);
  REQUIRE(g2.replenishment.fixed.size() == 1);
  CHECK(g2.replenishment.fixed[0].request == 7);
  CHECK(g2.replenishment.fixed[0].amount == 3.0);
}

TEST_CASE("two-phase parameter validation") {
  GeneratorParams p;
  p.family = "HardGS";
  p.c = 6;
  p.gamma = 1.5;
  CHECK(throws_with([&] { (void)generate(p); }, "(0, 1]"));
  p.gamma = 0.3;  // 1.8 replenishment units is not a whole count
  CHECK(throws_with([&] { (void)generate(p); }, "gamma * c"));
  p.gamma = 0.5;
  p.c = 6.5;
  CHECK(throws_with([&] { (void)generate(p); }, "integer"));
}

TEST_CASE("worked-example fixtures have the documented schedules") {
  GeneratorParams p;
  p.family = "AppendixExample1";
  Instance one = generate(p);
  CHECK(one.num_resources() == 2);
  CHECK(one.c_min == 100.0);
  CHECK(one.horizon() == 2);
  CHECK(one.fixed_replenishment(0, 1) == 1.0);
  CHECK(one.fixed_replenishment(0, 2) == 10.0);
  CHECK(one.fixed_replenishment(1, 1) == 10.0);
  CHECK(one.fixed_replenishment(1, 2) == 1.0);
  CHECK(one.num_actions() == 4);

  p.family = "AppendixExample2";
  Instance two = generate(p);
  CHECK(two.horizon() == 1);
  CHECK(two.arrivals.mode == ArrivalMode::Stochastic);
  REQUIRE(two.replenishment.entries.size() == 2);
  for (const auto& e : two.replenishment.entries) {
    CHECK(e.support == 10.0);
    CHECK(e.mean == 5.0);
  }
}

TEST_CASE("staircase family: greedy burns flexibility, balancing keeps it") {
  GeneratorParams p;
  p.family = "UpperTriangular";
  p.n = 4;
  p.c = 10;
  Instance inst = generate(p);
  CHECK(inst.horizon() == 40);

  // all rewards credit every resource, so the objective is the serve count
  auto greedy = make_greedy();
  RunResult g = run(inst, *greedy);
  CHECK(g.objective == 20.0);  // half the requests, exactly

  auto ib = make_inventory_balancing();
  RunResult b = run(inst, *ib);
  CHECK(b.objective > 20.0);

  CHECK(solve_lp(build_lp(inst)).value == doctest::Approx(40.0).epsilon(1e-7));
}

TEST_CASE("bundle size cannot exceed the resource count") {
  GeneratorParams p;
  p.family = "Hypergraph";
  p.n = 3;
  p.d = 5;
  CHECK(throws_with([&] { (void)generate(p); }, "must not exceed"));
}

TEST_CASE("steady-drip family replenishes half its inventory") {
  GeneratorParams p;
  p.family = "Adwords";
  Instance inst = generate(p);
  CHECK(inst.arrivals.mode == ArrivalMode::Adversarial);
  CHECK(inst.replenishment.mode == ReplenishmentMode::Adversarial);
  double total = 0.0;
  for (const auto& f : inst.replenishment.fixed) {
    if (f.resource == 0) total += f.amount;
  }
  CHECK(total == doctest::Approx(inst.resources[0].initial_inventory / 2.0).epsilon(1e-9));
}
