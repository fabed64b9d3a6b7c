#include <doctest.h>

#include "helpers.hpp"
#include "replsim/algorithms.hpp"
#include "replsim/generators.hpp"
#include "replsim/oracle.hpp"

using namespace replsim;
using namespace testutil;

namespace {

Instance coin_flip_arrivals() {
  // request 1 is z1 or z2 with equal probability, request 2 is always z3;
  // one unit of inventory, rewards 1 / 2 / 3 by type
  Instance inst;
  inst.resources.push_back(res("r1", 1.0));
  inst.arrivals.mode = ArrivalMode::Stochastic;
  inst.arrivals.horizon = 2;
  inst.arrivals.types = {"z1", "z2", "z3"};
  inst.arrivals.type_probs = {{0.5, 0.5, 0.0}, {0.0, 0.0, 1.0}};
  Action a;
  a.id = "a";
  add_use(a, 0, 1.0, 1.0);
  add_reward(a, 0, 0, 1.0);
  add_reward(a, 1, 0, 2.0);
  add_reward(a, 2, 0, 3.0);
  inst.actions = {a, trivial()};
  inst.validate();
  return inst;
}

}  // namespace

TEST_CASE("clairvoyance beats any online rule when the future differs") {
  Instance inst = coin_flip_arrivals();
  // the optimum always saves the unit for the reward-3 request
  CHECK(exact_opt(inst) == doctest::Approx(3.0).epsilon(1e-12));
  // greedy spends it at request 1 on whichever type shows up
  CHECK(exact_expected_objective(inst, make_policy_factory("greedy")) ==
        doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("deterministic single branch reduces to a shortest-path count") {
  Instance inst = single_resource(2.0, 3, 1.0);
  CHECK(exact_opt(inst) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(exact_expected_objective(inst, make_policy_factory("greedy")) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("replenishment coins split the evaluation into branches") {
  GeneratorParams p;
  p.family = "HardGS";
  p.gamma = 1.0;
  for (double c : {4.0, 8.0}) {
    p.c = c;
    Instance inst = generate(p);
    CHECK(exact_opt(inst) == doctest::Approx(2.5 * c).epsilon(1e-9));
  }
}

TEST_CASE("the single-resource path agrees with the full search") {
  // same decision problem twice: once as one resource (memoized scan), once
  // padded with a huge second resource that every reward also credits, which
  // forces the general search without changing the optimum
  Instance narrow = coin_flip_arrivals();
  Instance wide = narrow;
  wide.resources.push_back(res("pad", 1000.0));
  for (auto& a : wide.actions)
    if (!a.rewards.empty()) {
      auto copy = a.rewards;
      for (auto& e : copy) e.resource = 1;
      a.rewards.insert(a.rewards.end(), copy.begin(), copy.end());
    }
  wide.validate();
  CHECK(exact_opt(wide) == doctest::Approx(exact_opt(narrow)).epsilon(1e-12));
}

TEST_CASE("fixed split sweep recovers the known plateau") {
  GeneratorParams p;
  p.family = "HardGS";
  p.c = 4;
  p.gamma = 1.0;
  Instance inst = generate(p);
  CHECK(exact_expected_objective(inst, make_policy_factory("fixed_split:x=4")) ==
        doctest::Approx(8.0).epsilon(1e-9));
  CHECK(exact_expected_objective(inst, make_policy_factory("fixed_split:x=0")) ==
        doctest::Approx(8.0).epsilon(1e-9));
  CHECK(exact_expected_objective(inst, make_policy_factory("fixed_split:x=2")) ==
        doctest::Approx(8.0).epsilon(1e-9));
  CHECK(exact_expected_objective(inst, make_policy_factory("fixed_split:x=3")) ==
        doctest::Approx(8.0).epsilon(1e-9));
}

TEST_CASE("scope refusals name the obstruction") {
  Instance inst = single_resource(2.0, 2);
  inst.actions[0].uses[0].profile.success_prob = 0.5;
  inst.validate();
  CHECK(throws_with([&] { (void)exact_opt(inst); },
                    "success probabilities must be 0 or 1"));

  Instance geo = single_resource(2.0, 2);
  geo.actions[0].uses[0].profile.release = {ReleaseKind::Geometric, 0, 0.5};
  geo.validate();
  CHECK(throws_with([&] { (void)exact_opt(geo); }, "geometric release"));

  Instance coins = single_resource(2.0, 14);
  coins.replenishment.mode = ReplenishmentMode::Stochastic;
  coins.replenishment.bound_M = 1.0;
  for (int j = 1; j <= 13; ++j) coins.replenishment.entries.push_back({0, j, 1.0, 0.5});
  coins.validate();
  CHECK(throws_with([&] { (void)exact_opt(coins); }, "replenishment coins"));

  Instance wide;
  wide.resources.push_back(res("r1", 2.0));
  wide.arrivals.mode = ArrivalMode::Stochastic;
  wide.arrivals.horizon = 7;
  wide.arrivals.types = {"z1", "z2", "z3", "z4"};
  wide.arrivals.type_probs.assign(7, {0.25, 0.25, 0.25, 0.25});
  wide.actions.push_back(trivial());
  wide.validate();
  CHECK(throws_with([&] { (void)exact_opt(wide); }, "branches"));
}

TEST_CASE("the policy evaluator and Monte Carlo agree") {
  Instance inst = coin_flip_arrivals();
  double exact = exact_expected_objective(inst, make_policy_factory("greedy"));
  PerfOptions po;
  po.trials = 20000;
  po.seed = 21;
  PerfResult mc = expected_performance(inst, make_policy_factory("greedy"), po);
  CHECK(std::fabs(mc.mean - exact) <= 4.0 * mc.se + 1e-12);
}
