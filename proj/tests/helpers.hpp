#pragma once

// Small builders shared by the test files. Instances are assembled field by
// field and validated by the caller (or by the routine under test).

#include <string>
#include <vector>

#include "replsim/instance.hpp"

namespace testutil {

inline replsim::Resource res(const std::string& id, double inv) {
  replsim::Resource r;
  r.id = id;
  r.initial_inventory = inv;
  return r;
}

inline replsim::Action trivial() {
  replsim::Action a;
  a.id = "k0";
  return a;
}

inline void add_use(replsim::Action& a, int resource, double peak, double success,
                    replsim::ReleaseDist rel = {}) {
  a.uses.push_back({resource, {peak, success, rel}});
}

inline void add_reward(replsim::Action& a, int type, int resource, double value,
                       replsim::RewardKind kind = replsim::RewardKind::Deterministic) {
  replsim::RewardEntry e;
  e.type = type;
  e.resource = resource;
  e.kind = kind;
  e.value = value;
  a.rewards.push_back(e);
}

// One resource, adversarial single-type schedule, one unit-peak action worth
// `reward` per serve, no replenishment.
inline replsim::Instance single_resource(double c, int m, double reward = 1.0) {
  replsim::Instance inst;
  inst.resources.push_back(res("r1", c));
  inst.arrivals.mode = replsim::ArrivalMode::Adversarial;
  inst.arrivals.horizon = m;
  inst.arrivals.types.assign(m, "t");
  replsim::Action a;
  a.id = "a";
  add_use(a, 0, 1.0, 1.0);
  add_reward(a, 0, 0, reward);
  inst.actions.push_back(a);
  inst.actions.push_back(trivial());
  inst.validate();
  return inst;
}

inline bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

// Runs `fn`, which must throw; returns whether the message contains `needle`.
template <typename Fn>
bool throws_with(Fn&& fn, const std::string& needle) {
  try {
    fn();
  } catch (const std::exception& e) {
    return contains(e.what(), needle);
  }
  return false;
}

}  // namespace testutil
