#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "replsim/engine.hpp"
#include "replsim/instance.hpp"

namespace replsim {

// One lump of the batched replenishment process: at arrival `request`,
// `amount` units of `parent` were granted as the fresh resource
// `resource_id` with that starting inventory.
struct BatchEvent {
  int parent = -1;
  int request = 0;
  double amount = 0.0;
  std::string resource_id;
};

// Pending-accumulator recursion shared by both regimes: credit each
// arrival's replenishment to a per-resource accumulator and emit the whole
// accumulator as one lump whenever it reaches `threshold`.
class BatchState {
 public:
  BatchState(int num_resources, double threshold);
  double threshold() const { return threshold_; }
  double pending(int resource) const { return pending_[resource]; }
  // Returns the emitted lump (>= threshold) or 0.
  double step(int resource, double observed);
  // Prefix sum of emitted lumps for one resource.
  double emitted(int resource) const { return emitted_[resource]; }

 private:
  double threshold_;
  std::vector<double> pending_;
  std::vector<double> emitted_;
};

// Threshold used when replenishment amounts are adversarial.
double adversarial_threshold(const Instance& inst);

// Fluid discount from the instance's scale parameters; throws
// IncompatibleError("instance too small for ε formula") when
// c_min * d <= 1.
double stochastic_epsilon(const Instance& inst);

struct BatchedInstance {
  Instance instance;              // no replenishment; lumps appear as resources
  double threshold = 0.0;
  double epsilon = 0.0;           // 0 in the adversarial regime
  std::vector<BatchEvent> events;
  // Per original resource: prefix sums of the lump schedule, [resource][request-1].
  std::vector<std::vector<double>> lump_prefix;
};

// Offline batching of a fixed replenishment schedule (adversarial
// replenishment required). Every lump becomes a resource "<parent>@<j>"
// plus duplicates "<k>@<parent>@<j>" of all current actions using the
// parent, activated at j.
BatchedInstance build_batched_instance_adversarial(const Instance& inst);

// Offline batching of the fluid process (1 - eps) * q with threshold
// eps * c_min (stochastic arrivals and replenishment required).
// eps_override substitutes the discount without touching the preconditions.
BatchedInstance build_batched_instance_stochastic(
    const Instance& inst, std::optional<double> eps_override = {});

// Online wrapper for adversarial arrivals: grows a replenishment-free
// virtual copy of the instance as lumps are emitted, lets the base policy
// play on it, and implements the original action behind each virtual choice.
class BatchAdversarial final : public Policy {
 public:
  explicit BatchAdversarial(std::unique_ptr<Policy> base);

  std::string name() const override;
  void reset(const Instance& inst) override;
  int choose(const Instance& inst, const Ledger& led, int request, int type,
             const std::vector<int>& feasible, const DrawKit& kit) override;
  std::string last_virtual_choice() const override { return last_choice_; }

  const Instance& virtual_instance() const { return virt_; }
  const std::vector<BatchEvent>& batch_events() const { return events_; }
  // Action ids available to the base policy at each processed arrival.
  const std::vector<std::vector<std::string>>& action_set_history() const {
    return history_;
  }

 private:
  std::unique_ptr<Policy> base_;
  Instance virt_;
  std::unique_ptr<Ledger> vled_;
  std::unique_ptr<BatchState> state_;
  std::vector<BatchEvent> events_;
  std::vector<std::vector<std::string>> history_;
  std::string last_choice_;
  int next_request_ = 1;
  double tol_ = 1e-9;
};

// Wrapper for the stochastic regime: the base policy plays on the
// precomputed batched instance; each virtual choice is implemented for real
// only when the realized replenishment has caught up with the lump schedule
// on every resource the choice touches, otherwise the no-op runs instead
// (counted as a fallback). The virtual run always advances as chosen.
class BatchStochastic final : public Policy {
 public:
  BatchStochastic(std::unique_ptr<Policy> base,
                  std::optional<double> eps_override = {});

  std::string name() const override;
  void reset(const Instance& inst) override;
  int choose(const Instance& inst, const Ledger& led, int request, int type,
             const std::vector<int>& feasible, const DrawKit& kit) override;
  std::string last_virtual_choice() const override { return last_choice_; }
  bool last_was_fallback() const override { return last_fallback_; }

  const BatchedInstance& batched() const { return batched_; }

 private:
  std::unique_ptr<Policy> base_;
  std::optional<double> eps_override_;
  BatchedInstance batched_;
  std::unique_ptr<Ledger> vled_;
  std::vector<double> realized_prefix_;  // per real resource, through "now"
  std::string last_choice_;
  bool last_fallback_ = false;
  int next_request_ = 1;
  double tol_ = 1e-9;
};

std::unique_ptr<Policy> wrap_adversarial(std::unique_ptr<Policy> base);
std::unique_ptr<Policy> wrap_stochastic(std::unique_ptr<Policy> base,
                                        std::optional<double> eps_override = {});

}  // namespace replsim
