#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "replsim/algorithms.hpp"
#include "replsim/batching.hpp"
#include "replsim/generators.hpp"

using namespace replsim;
using namespace testutil;

namespace {

// Adversarial two-resource instance with the four power-set actions, so that
// lump compounding inside one request is visible.
Instance power_pair(double c, const std::vector<FixedReplenishment>& fixed,
                    double bound, int m) {
  Instance inst;
  inst.resources.push_back(res("A", c));
  inst.resources.push_back(res("B", c));
  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = m;
  inst.arrivals.types.assign(m, "t");
  Action kab;
  kab.id = "KAB";
  add_use(kab, 0, 1.0, 1.0);
  add_use(kab, 1, 1.0, 1.0);
  add_reward(kab, 0, 0, 1.0);
  add_reward(kab, 0, 1, 1.0);
  Action ka;
  ka.id = "KA";
  add_use(ka, 0, 1.0, 1.0);
  add_reward(ka, 0, 0, 1.0);
  Action kb;
  kb.id = "KB";
  add_use(kb, 1, 1.0, 1.0);
  add_reward(kb, 0, 1, 1.0);
  inst.actions = {kab, ka, kb, trivial()};
  inst.replenishment.mode = ReplenishmentMode::Adversarial;
  inst.replenishment.fixed = fixed;
  inst.replenishment.bound_M = bound;
  inst.validate();
  return inst;
}

}  // namespace

TEST_CASE("accumulator recursion replayed against a direct scan") {
  std::mt19937_64 eng(77);
  auto real = [&] { return (eng() >> 11) * 0x1.0p-53; };
  for (int rep = 0; rep < 50; ++rep) {
    double threshold = 0.5 + 4.0 * real();
    int steps = 40;
    std::vector<double> amounts(steps);
    for (double& a : amounts) a = real() < 0.4 ? 0.0 : 3.0 * real();

    BatchState state(1, threshold);
    std::vector<double> emitted(steps, 0.0);
    for (int j = 0; j < steps; ++j) emitted[j] = state.step(0, amounts[j]);

    // direct scan: a lump at j empties everything credited since the last one
    double since = 0.0;
    for (int j = 0; j < steps; ++j) {
      since += amounts[j];
      double expect = 0.0;
      if (since >= threshold && since > 0.0) {
        expect = since;
        since = 0.0;
      }
      CHECK(emitted[j] == expect);
    }
    CHECK(state.pending(0) == since);
  }
}

TEST_CASE("adversarial threshold is the square root of the smallest inventory") {
  Instance inst = single_resource(9.0, 2);
  CHECK(adversarial_threshold(inst) == 3.0);
}

TEST_CASE("offline adversarial batching on a hand schedule") {
  Instance inst;
  inst.resources.push_back(res("r1", 4.0));  // threshold 2
  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = 4;
  inst.arrivals.types.assign(4, "t");
  Action a;
  a.id = "a";
  add_use(a, 0, 1.0, 1.0);
  add_reward(a, 0, 0, 1.0);
  inst.actions = {a, trivial()};
  inst.replenishment.mode = ReplenishmentMode::Adversarial;
  inst.replenishment.fixed = {{0, 1, 1.5}, {0, 2, 1.0}, {0, 3, 0.7}, {0, 4, 2.3}};
  inst.replenishment.bound_M = 2.3;
  inst.validate();

  BatchedInstance hb = build_batched_instance_adversarial(inst);
  REQUIRE(hb.events.size() == 2);
  CHECK(hb.events[0].request == 2);
  CHECK(hb.events[0].amount == 2.5);
  CHECK(hb.events[0].resource_id == "r1@2");
  CHECK(hb.events[1].request == 4);
  CHECK(hb.events[1].amount == 3.0);
  CHECK(hb.events[1].resource_id == "r1@4");
  CHECK(hb.lump_prefix[0] == std::vector<double>{0.0, 2.5, 2.5, 5.5});

  const Instance& out = hb.instance;
  CHECK(out.replenishment.fixed.empty());
  CHECK(out.num_resources() == 3);
  int r2 = out.resource_index("r1@2");
  REQUIRE(r2 >= 0);
  CHECK(out.resources[r2].initial_inventory == 2.5);
  CHECK(out.root_of(r2) == 0);

  // one duplicate per lump; the copy swaps the consumed resource but keeps
  // the reward booked under the original
  CHECK(out.num_actions() == 4);
  int dup = out.action_index("a@r1@2");
  REQUIRE(dup >= 0);
  CHECK(out.actions[dup].activation == 2);
  CHECK(out.actions[dup].uses.size() == 1);
  CHECK(out.actions[dup].uses[0].resource == r2);
  CHECK(out.actions[dup].rewards.size() == 1);
  CHECK(out.actions[dup].rewards[0].resource == 0);
  CHECK(out.actions[dup].origin.root_action == out.action_index("a"));
}

TEST_CASE("two lumps in one request compound through the growing action set") {
  // both resources lump at request 1; processing order A then B means B's
  // duplication already sees the copies created for A
  Instance inst = power_pair(5.0, {{0, 1, 3.0}, {1, 1, 3.0}}, 3.0, 2);
  BatchedInstance hb = build_batched_instance_adversarial(inst);
  REQUIRE(hb.events.size() == 2);
  CHECK(hb.events[0].resource_id == "A@1");
  CHECK(hb.events[1].resource_id == "B@1");

  std::vector<std::string> ids;
  for (const auto& a : hb.instance.actions) ids.push_back(a.id);
  std::sort(ids.begin(), ids.end());
  CHECK(ids == std::vector<std::string>{"KA", "KA@A@1", "KAB", "KAB@A@1", "KAB@A@1@B@1",
                                        "KAB@B@1", "KB", "KB@B@1", "k0"});

  // the doubly substituted copy consumes only fresh resources
  int both = hb.instance.action_index("KAB@A@1@B@1");
  REQUIRE(both >= 0);
  std::vector<std::string> used;
  for (const auto& u : hb.instance.actions[both].uses)
    used.push_back(hb.instance.resources[u.resource].id);
  std::sort(used.begin(), used.end());
  CHECK(used == std::vector<std::string>{"A@1", "B@1"});
  for (const auto& e : hb.instance.actions[both].rewards) CHECK(e.resource < 2);
}

TEST_CASE("fluid discount formula and its refusal") {
  GeneratorParams p;
  p.family = "StochasticRewards";
  Instance inst = generate(p);  // c_min 5, d 1, bound 1
  double expect =
      std::pow(3.0 * inst.replenishment.bound_M / inst.c_min * std::log(inst.c_min * inst.d),
               1.0 / 3.0);
  CHECK(stochastic_epsilon(inst) == doctest::Approx(std::min(expect, 1.0)).epsilon(1e-12));

  Instance tiny = single_resource(1.0, 2);
  CHECK_THROWS_AS((void)stochastic_epsilon(tiny), IncompatibleError);
}

TEST_CASE("fluid batching emits on the discounted mean schedule") {
  Instance inst;
  inst.resources.push_back(res("r1", 4.0));
  inst.arrivals.mode = ArrivalMode::Stochastic;
  inst.arrivals.horizon = 4;
  inst.arrivals.types = {"t"};
  inst.arrivals.type_probs.assign(4, {1.0});
  Action a;
  a.id = "a";
  add_use(a, 0, 1.0, 1.0);
  add_reward(a, 0, 0, 1.0);
  inst.actions = {a, trivial()};
  inst.replenishment.mode = ReplenishmentMode::Stochastic;
  inst.replenishment.bound_M = 2.0;
  for (int j = 1; j <= 4; ++j) inst.replenishment.entries.push_back({0, j, 2.0, 1.0});
  inst.validate();

  BatchedInstance hb = build_batched_instance_stochastic(inst, 0.5);
  CHECK(hb.epsilon == 0.5);
  CHECK(hb.threshold == 2.0);  // eps * c_min
  REQUIRE(hb.events.size() == 1);
  CHECK(hb.events[0].request == 4);  // four drips of (1 - eps) * 1
  CHECK(hb.events[0].amount == 2.0);
  CHECK(hb.events[0].resource_id == "r1@4");
  CHECK(hb.instance.replenishment.entries.empty());
}

TEST_CASE("regime preconditions are enforced") {
  GeneratorParams p;
  p.family = "StochasticRewards";
  Instance stoch = generate(p);
  CHECK(throws_with([&] { (void)build_batched_instance_adversarial(stoch); },
                    "fixed replenishment schedule"));

  Instance adv = power_pair(5.0, {{0, 1, 3.0}}, 3.0, 2);
  CHECK(throws_with([&] { (void)build_batched_instance_stochastic(adv); },
                    "stochastic arrivals and replenishment"));

  // online wrappers refuse at reset time
  auto wrapped = wrap_adversarial(make_greedy());
  CHECK_THROWS_AS((void)run(stoch, *wrapped), IncompatibleError);
  auto fluid = wrap_stochastic(make_greedy());
  CHECK_THROWS_AS((void)run(adv, *fluid), IncompatibleError);
}

TEST_CASE("the online wrapper reproduces the offline lump schedule") {
  Instance inst = power_pair(5.0, {{0, 2, 2.4}, {1, 3, 2.6}, {0, 4, 2.3}}, 2.6, 5);
  BatchedInstance offline = build_batched_instance_adversarial(inst);

  BatchAdversarial wrapper(make_greedy());
  RunOptions opt;
  opt.seed = 8;
  (void)run(inst, wrapper, opt);

  REQUIRE(wrapper.batch_events().size() == offline.events.size());
  for (size_t i = 0; i < offline.events.size(); ++i) {
    CHECK(wrapper.batch_events()[i].request == offline.events[i].request);
    CHECK(wrapper.batch_events()[i].amount == offline.events[i].amount);
    CHECK(wrapper.batch_events()[i].resource_id == offline.events[i].resource_id);
  }
  CHECK(wrapper.virtual_instance().serialize() == offline.instance.serialize());
}
