#include "replsim/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace replsim {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("policy: " + msg);
}

// Shared argmax with deterministic tie-breaking. Exact float comparison on
// purpose: equal scores must tie, and the lexicographically smallest id wins.
int pick_best(const Instance& inst, const std::vector<int>& feasible,
              const std::function<double(int)>& score) {
  int best = -1;
  double best_score = 0.0;
  for (int k : feasible) {
    double s = score(k);
    if (s <= 0.0) continue;
    if (best < 0 || s > best_score ||
        (s == best_score && inst.actions[k].id < inst.actions[best].id)) {
      best = k;
      best_score = s;
    }
  }
  return best < 0 ? inst.trivial_action : best;
}

class Greedy final : public Policy {
 public:
  std::string name() const override { return "greedy"; }
  int choose(const Instance& inst, const Ledger&, int request, int type,
             const std::vector<int>& feasible, const DrawKit&) override {
    return pick_best(inst, feasible, [&](int k) {
      return inst.total_expected_reward(request, k, type);
    });
  }
};

class InventoryBalancing final : public Policy {
 public:
  explicit InventoryBalancing(PenaltyShape shape) : shape_(shape) {}

  std::string name() const override { return "inventory_balancing"; }

  void reset(const Instance& inst) override {
    for (const auto& a : inst.actions)
      if (a.uses.size() > 1)
        fail("inventory balancing needs actions that use at most one resource");
  }

  int choose(const Instance& inst, const Ledger& led, int request, int type,
             const std::vector<int>& feasible, const DrawKit&) override {
    return pick_best(inst, feasible, [&](int k) {
      double s = 0.0;
      for (const auto& u : inst.actions[k].uses) {
        double cap = led.capacity(u.resource);
        double fill = cap > 0.0 ? (cap - led.available(u.resource)) / cap : 1.0;
        fill = std::clamp(fill, 0.0, 1.0);
        s += inst.expected_reward(u.resource, request, k, type) * (1.0 - penalty(fill));
      }
      return s;
    });
  }

 private:
  double penalty(double fill) const {
    if (shape_ == PenaltyShape::Zero) return 0.0;
    return std::expm1(fill) / std::expm1(1.0);
  }

  PenaltyShape shape_;
};

class FixedSplit final : public Policy {
 public:
  explicit FixedSplit(double x) : x_(x) {
    if (!(x >= 0.0) || !std::isfinite(x)) fail("fixed split needs x >= 0");
  }

  std::string name() const override { return "fixed_split"; }

  void reset(const Instance& inst) override {
    served_first_ = 0;
    serve_ = -1;
    for (int k = 0; k < inst.num_actions(); ++k) {
      if (k == inst.trivial_action || inst.actions[k].is_trivial) continue;
      if (serve_ >= 0) fail("fixed split needs exactly one nontrivial action");
      serve_ = k;
    }
    if (serve_ < 0) fail("fixed split needs exactly one nontrivial action");
  }

  int choose(const Instance& inst, const Ledger&, int, int type,
             const std::vector<int>& feasible, const DrawKit&) override {
    bool can = std::find(feasible.begin(), feasible.end(), serve_) != feasible.end();
    if (!can) return inst.trivial_action;
    if (type == 0) {
      if (served_first_ + 1.0 > x_ + 1e-12) return inst.trivial_action;
      ++served_first_;
      return serve_;
    }
    return serve_;
  }

 private:
  double x_;
  double served_first_ = 0;
  int serve_ = -1;
};

class Trivial final : public Policy {
 public:
  std::string name() const override { return "trivial"; }
  int choose(const Instance& inst, const Ledger&, int, int,
             const std::vector<int>&, const DrawKit&) override {
    return inst.trivial_action;
  }
};

}  // namespace

std::unique_ptr<Policy> make_greedy() { return std::make_unique<Greedy>(); }

std::unique_ptr<Policy> make_inventory_balancing(PenaltyShape shape) {
  return std::make_unique<InventoryBalancing>(shape);
}

std::unique_ptr<Policy> make_fixed_split(double x) {
  return std::make_unique<FixedSplit>(x);
}

std::unique_ptr<Policy> make_trivial() { return std::make_unique<Trivial>(); }

std::unique_ptr<Policy> make_policy(const std::string& spec) {
  if (spec == "greedy") return make_greedy();
  if (spec == "trivial") return make_trivial();
  if (spec == "ib" || spec == "ib:psi=exp")
    return make_inventory_balancing(PenaltyShape::Exponential);
  if (spec == "ib:psi=zero") return make_inventory_balancing(PenaltyShape::Zero);
  const std::string fs = "fixed_split:x=";
  if (spec.rfind(fs, 0) == 0) {
    try {
      size_t used = 0;
      double x = std::stod(spec.substr(fs.size()), &used);
      if (used != spec.size() - fs.size()) fail("trailing characters in '" + spec + "'");
      return make_fixed_split(x);
    } catch (const std::invalid_argument&) {
      fail("bad x value in '" + spec + "'");
    } catch (const std::out_of_range&) {
      fail("bad x value in '" + spec + "'");
    }
  }
  fail("unknown policy spec '" + spec + "'");
}

PolicyFactory make_policy_factory(const std::string& spec) {
  make_policy(spec);  // validate eagerly so bad specs surface before any run
  return [spec]() { return make_policy(spec); };
}

}  // namespace replsim
