#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "replsim/instance.hpp"
#include "replsim/rng.hpp"

namespace replsim {

// A unit of inventory that is busy and will come back. release_request is the
// arrival index at whose start the amount returns to the available pool.
struct Hold {
  int resource = -1;
  double amount = 0.0;
  int release_request = 0;
};

class Ledger;

// Decision rule interface. reset() is called once before a run; choose() is
// called exactly once per arrival, in order, and must return a member of
// `feasible` (indices into inst.actions). Wrappers that translate decisions
// report the pre-translation choice through last_virtual_choice().
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void reset(const Instance& inst) { (void)inst; }
  virtual int choose(const Instance& inst, const Ledger& led, int request, int type,
                     const std::vector<int>& feasible, const DrawKit& kit) = 0;
  virtual std::string last_virtual_choice() const { return {}; }
  virtual bool last_was_fallback() const { return false; }
};

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

// Mutable per-run state: inventories, busy holds, realized replenishment and
// per-resource reward totals (booked under original resources).
class Ledger {
 public:
  explicit Ledger(const Instance& inst);

  double available(int resource) const { return available_[resource]; }
  double held(int resource) const;
  double consumed(int resource) const { return consumed_[resource]; }
  double cumulative_replenishment(int resource) const { return cum_replen_[resource]; }
  // Initial inventory plus everything replenished so far.
  double capacity(int resource) const;
  double reward_total(int resource) const { return reward_[resource]; }
  double realized_replenishment(int resource, int request) const;

  // Arrival j, in order: credit replenishment, then return due holds. A
  // forced schedule ([resource][request-1]) replaces both the fixed amounts
  // and the two-point draws.
  void replenish(int request, const DrawKit& kit,
                 const std::vector<std::vector<double>>* forced = nullptr);
  void release_due(int request);

  // Pick up resources appended to the instance since construction (used by
  // wrappers that grow a virtual instance while a run is in flight).
  void register_new_resources();

  bool feasible(int action, int request, double tol) const;
  std::vector<int> feasible_actions(int request, double tol) const;

  // Apply the decision: flip the shared coin, debit peaks, schedule holds,
  // credit rewards. Returns the total reward credited.
  double commit(int action, int request, int type, const DrawKit& kit, double tol);

  void check_conservation(double tol) const;

 private:
  const Instance* inst_;
  std::vector<double> available_;
  std::vector<double> consumed_;
  std::vector<double> cum_replen_;
  std::vector<double> reward_;
  std::vector<Hold> holds_;
  std::vector<std::vector<double>> realized_;  // [resource][request-1]
};

struct TraceStep {
  int request = 0;
  int type = -1;
  std::string chosen;       // id picked by the decision rule
  std::string implemented;  // id committed against the instance
  bool fallback = false;
  double reward = 0.0;
};

struct RunResult {
  std::map<std::string, double> resource_totals;  // per original resource
  double objective = 0.0;
  std::vector<TraceStep> trace;
  int fallback_count = 0;
  std::string to_json() const;
};

struct RunOptions {
  uint64_t seed = 0;
  uint64_t trial = 0;
  double tol = 1e-9;
  bool record_trace = true;
  // When set, arrival j reveals (*forced_types)[j-1] instead of drawing from
  // the type distribution, and/or receives the forced replenishment schedule
  // instead of the instance's. Used by exact branch-by-branch evaluations.
  const std::vector<int>* forced_types = nullptr;
  const std::vector<std::vector<double>>* forced_replenishment = nullptr;
};

RunResult run(const Instance& inst, Policy& policy, const RunOptions& opt = {});

struct PerfOptions {
  int trials = 1000;
  uint64_t seed = 0;
  int threads = 1;
  double tol = 1e-9;
};

struct PerfResult {
  double mean = 0.0;        // sample mean of the min-resource objective
  double se = 0.0;          // standard error of the mean
  double fallback_rate = 0.0;  // fallbacks per arrival, averaged over trials
  double fallback_se = 0.0;
};

// Monte Carlo estimate of E[min-resource reward] under a fresh policy per
// trial. Trial t uses DrawKit(seed, t); the reduction order is fixed so the
// result does not depend on the thread count.
PerfResult expected_performance(const Instance& inst, const PolicyFactory& make_policy,
                                const PerfOptions& opt);

}  // namespace replsim
