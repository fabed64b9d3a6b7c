#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "replsim/algorithms.hpp"
#include "replsim/engine.hpp"
#include "replsim/generators.hpp"

using namespace replsim;
using namespace testutil;

TEST_CASE("inventory binds and the trivial action absorbs the rest") {
  Instance inst = single_resource(2.0, 3);
  auto pol = make_greedy();
  RunResult r = run(inst, *pol);
  REQUIRE(r.trace.size() == 3);
  CHECK(r.trace[0].implemented == "a");
  CHECK(r.trace[1].implemented == "a");
  CHECK(r.trace[2].implemented == "k0");
  CHECK(r.objective == 2.0);
  CHECK(r.resource_totals.at("r1") == 2.0);
  CHECK(r.fallback_count == 0);
}

TEST_CASE("a finite hold returns after its duration") {
  Instance inst;
  inst.resources.push_back(res("r1", 1.0));
  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = 3;
  inst.arrivals.types = {"t", "t", "t"};
  Action a;
  a.id = "a";
  add_use(a, 0, 1.0, 1.0, {ReleaseKind::AfterSteps, 1, 0.0});
  add_reward(a, 0, 0, 1.0);
  inst.actions.push_back(a);
  inst.actions.push_back(trivial());
  inst.validate();

  auto pol = make_greedy();
  RunResult r = run(inst, *pol);
  // the unit comes back at the start of every next arrival
  CHECK(r.objective == 3.0);
  for (const auto& s : r.trace) CHECK(s.implemented == "a");
}

TEST_CASE("geometric release with p = 1 behaves like a one-step hold") {
  Instance inst;
  inst.resources.push_back(res("r1", 1.0));
  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = 4;
  inst.arrivals.types = {"t", "t", "t", "t"};
  Action a;
  a.id = "a";
  add_use(a, 0, 1.0, 1.0, {ReleaseKind::Geometric, 0, 1.0});
  add_reward(a, 0, 0, 1.0);
  inst.actions.push_back(a);
  inst.actions.push_back(trivial());
  inst.validate();
  auto pol = make_greedy();
  CHECK(run(inst, *pol).objective == 4.0);
}

TEST_CASE("runs are bit-identical for a fixed seed") {
  GeneratorParams p;
  p.family = "StochasticRewards";
  Instance inst = generate(p);
  auto a = make_greedy();
  auto b = make_greedy();
  RunOptions opt;
  opt.seed = 99;
  CHECK(run(inst, *a, opt).to_json() == run(inst, *b, opt).to_json());

  RunOptions other = opt;
  other.trial = 1;
  CHECK(run(inst, *a, opt).to_json() != run(inst, *a, other).to_json());
}

TEST_CASE("the thread count does not change expected_performance") {
  GeneratorParams p;
  p.family = "StochasticRewards";
  Instance inst = generate(p);
  PerfOptions po;
  po.trials = 64;
  po.seed = 5;
  po.threads = 1;
  PerfResult one = expected_performance(inst, make_policy_factory("greedy"), po);
  po.threads = 4;
  PerfResult four = expected_performance(inst, make_policy_factory("greedy"), po);
  CHECK(one.mean == four.mean);
  CHECK(one.se == four.se);
  CHECK(one.fallback_rate == four.fallback_rate);
}

TEST_CASE("forced types and forced replenishment pin one branch") {
  Instance inst;
  inst.resources.push_back(res("r1", 1.0));
  inst.arrivals.mode = ArrivalMode::Stochastic;
  inst.arrivals.horizon = 2;
  inst.arrivals.types = {"z1", "z2"};
  inst.arrivals.type_probs = {{0.5, 0.5}, {0.5, 0.5}};
  Action a;
  a.id = "a";
  add_use(a, 0, 1.0, 1.0);
  add_reward(a, 0, 0, 1.0);
  add_reward(a, 1, 0, 2.0);
  inst.actions.push_back(a);
  inst.actions.push_back(trivial());
  inst.replenishment.mode = ReplenishmentMode::Stochastic;
  inst.replenishment.bound_M = 1.0;
  inst.replenishment.entries.push_back({0, 2, 1.0, 0.5});
  inst.validate();

  std::vector<int> types = {1, 1};
  std::vector<std::vector<double>> replen = {{0.0, 1.0}};
  RunOptions opt;
  opt.forced_types = &types;
  opt.forced_replenishment = &replen;
  auto pol = make_greedy();
  RunResult r = run(inst, *pol, opt);
  CHECK(r.trace[0].type == 1);
  CHECK(r.trace[1].type == 1);
  // the forced unit at request 2 funds a second serve
  CHECK(r.objective == 4.0);

  replen = {{0.0, 0.0}};
  RunResult dry = run(inst, *pol, opt);
  CHECK(dry.objective == 2.0);
  CHECK(dry.trace[1].implemented == "k0");
}

TEST_CASE("a policy outside the feasible set is an error") {
  struct Rogue final : Policy {
    std::string name() const override { return "rogue"; }
    int choose(const Instance& inst, const Ledger&, int, int, const std::vector<int>&,
               const DrawKit&) override {
      return inst.action_index("a");  // even when it cannot run
    }
  };
  Instance inst = single_resource(1.0, 2);
  Rogue pol;
  CHECK(throws_with([&] { run(inst, pol); }, "outside the feasible set"));
}

TEST_CASE("two-point consumption couples the reward to the same coin") {
  Instance inst;
  inst.resources.push_back(res("r1", 1.0));
  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = 2;
  inst.arrivals.types = {"t", "t"};
  Action a;
  a.id = "a";
  add_use(a, 0, 1.0, 0.5);
  add_reward(a, 0, 0, 1.0, RewardKind::CoupledToConsumption);
  inst.actions.push_back(a);
  inst.actions.push_back(trivial());
  inst.validate();

  // greedy tries "a" at every arrival (expected reward 0.5 > 0); a success
  // consumes the unit and pays, a failure leaves both untouched. With one
  // unit the total is exactly the number of serves until the first success.
  int paid_then_blocked = 0, never_paid = 0, paid_late = 0;
  for (int t = 0; t < 400; ++t) {
    auto pol = make_greedy();
    RunOptions opt;
    opt.seed = 1234;
    opt.trial = static_cast<uint64_t>(t);
    RunResult r = run(inst, *pol, opt);
    if (r.trace[0].reward == 1.0) {
      CHECK(r.trace[1].implemented == "k0");
      ++paid_then_blocked;
    } else if (r.trace[1].reward == 1.0) {
      ++paid_late;
    } else {
      CHECK(r.objective == 0.0);
      ++never_paid;
    }
  }
  // success probability one half per attempt
  CHECK(paid_then_blocked > 140);
  CHECK(paid_then_blocked < 260);
  CHECK(paid_late + never_paid == 400 - paid_then_blocked);
}

TEST_CASE("rewards booked on other resources accrue without consuming them") {
  Instance inst;
  inst.resources.push_back(res("r1", 2.0));
  inst.resources.push_back(res("r2", 2.0));
  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = 2;
  inst.arrivals.types = {"t", "t"};
  Action a;
  a.id = "a";
  add_use(a, 0, 1.0, 1.0);
  add_reward(a, 0, 0, 1.0);
  add_reward(a, 0, 1, 3.0);
  inst.actions.push_back(a);
  inst.actions.push_back(trivial());
  inst.validate();

  auto pol = make_greedy();
  RunResult r = run(inst, *pol);
  CHECK(r.resource_totals.at("r1") == 2.0);
  CHECK(r.resource_totals.at("r2") == 6.0);
  CHECK(r.objective == 2.0);
}
