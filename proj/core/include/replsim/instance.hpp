#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace replsim {

// A structurally valid input that a component refuses to work on (wrong
// arrival or replenishment regime, unmet precondition). Kept distinct from
// plain runtime errors so callers can exit differently.
struct IncompatibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model primitives.
//
// An instance has a set of resources with starting inventories, a sequence of
// requests (each carrying a type), a set of actions, and an exogenous
// replenishment process. Consumption of a resource by an action is two-point:
// with some success probability the action holds `peak` units, and the hold
// is released after a (possibly infinite, possibly random) number of later
// arrivals. Rewards accrue per resource; the run objective is the minimum
// over resources of the accumulated reward.

enum class ReleaseKind { Never, AfterSteps, Geometric };

struct ReleaseDist {
  ReleaseKind kind = ReleaseKind::Never;
  int steps = 0;   // AfterSteps: deterministic duration
  double p = 0.0;  // Geometric: per-arrival release probability
  // P(duration > elapsed) for elapsed >= 0 arrivals after the hold started.
  double survival(int elapsed) const;
};

struct ConsumptionProfile {
  double peak = 0.0;          // b, in [0, 1]
  double success_prob = 1.0;  // probability the two-point draw realizes peak
  ReleaseDist release;
};

enum class RewardKind { Deterministic, CoupledToConsumption };

struct RewardEntry {
  int type = 0;      // type index
  int resource = 0;  // original resource index the reward is booked under
  RewardKind kind = RewardKind::Deterministic;
  double value = 0.0;     // reward, or weight of the shared consumption coin
  double expected = 0.0;  // value, or value * shared success probability
};

struct ResourceUse {
  int resource = 0;
  ConsumptionProfile profile;
};

struct ResourceOrigin {
  int parent = -1;     // < 0 for a starting resource
  int created_at = 0;  // request at which a batched copy was created
  bool original() const { return parent < 0; }
};

struct ActionOrigin {
  int root_action = -1;          // < 0 for a starting action
  int substituted_resource = -1; // batched copy substituted in `uses`
  bool original() const { return root_action < 0; }
};

struct Resource {
  std::string id;
  double initial_inventory = 0.0;
  ResourceOrigin origin;
  int root = 0;  // index of the original ancestor (itself if original)
};

struct Action {
  std::string id;
  std::vector<ResourceUse> uses;      // sorted by resource index
  std::vector<RewardEntry> rewards;   // sorted by (type, resource)
  int activation = 1;                 // first request with nonzero reward
  ActionOrigin origin;
  bool is_trivial = false;            // empty uses, zero reward everywhere
  double coupled_success = 1.0;       // shared coin success prob, if coupled rewards

  const ConsumptionProfile* profile_for(int resource) const;
};

enum class ArrivalMode { Adversarial, Stochastic };

struct ArrivalModel {
  ArrivalMode mode = ArrivalMode::Adversarial;
  int horizon = 0;
  // As written in the instance: the per-request type schedule in adversarial
  // mode, the type universe in stochastic mode.
  std::vector<std::string> types;
  std::vector<std::vector<double>> type_probs;  // [horizon][|type_ids|], stochastic
  // Derived.
  std::vector<std::string> type_ids;  // distinct types, first-appearance order
  std::vector<int> schedule;          // adversarial: request j-1 -> type index
};

enum class ReplenishmentMode { Adversarial, Stochastic };

struct FixedReplenishment {
  int resource = 0;
  int request = 0;  // 1-based
  double amount = 0.0;
};

// Two-point arrival: support w with probability mean/support, else 0.
struct StochasticReplenishment {
  int resource = 0;
  int request = 0;
  double support = 0.0;  // w
  double mean = 0.0;     // q
};

struct ReplenishmentSpec {
  ReplenishmentMode mode = ReplenishmentMode::Adversarial;
  double bound_M = 0.0;  // upper bound on any single replenishment amount
  std::vector<FixedReplenishment> fixed;
  std::vector<StochasticReplenishment> entries;
};

class Instance {
 public:
  std::vector<Resource> resources;
  ArrivalModel arrivals;
  std::vector<Action> actions;
  ReplenishmentSpec replenishment;

  // Derived on validate().
  double c_min = 0.0;       // min starting inventory over original resources
  int d = 0;                // max resources used by one action
  int trivial_action = -1;  // index of the no-op action

  // JSON round trip. load() validates; serialize() emits the canonical form.
  static Instance load(const std::string& json_text);
  std::string serialize() const;

  // Checks every structural invariant and rebuilds derived state. Throws
  // std::runtime_error with a specific message on the first violation.
  void validate();

  int num_resources() const { return static_cast<int>(resources.size()); }
  int num_actions() const { return static_cast<int>(actions.size()); }
  int num_types() const { return static_cast<int>(arrivals.type_ids.size()); }
  int horizon() const { return arrivals.horizon; }

  int resource_index(const std::string& id) const;  // -1 if absent
  int action_index(const std::string& id) const;
  int type_index(const std::string& id) const;
  int root_of(int resource) const { return resources[resource].root; }

  // Type probability p_{jz}; an adversarial schedule is the 0/1 matrix.
  double type_prob(int request, int type) const;
  int scheduled_type(int request) const;  // adversarial mode only

  double fixed_replenishment(int resource, int request) const;
  // Mean replenishment q_{ij}: the two-point mean in stochastic mode, the
  // fixed amount in adversarial mode.
  double mean_replenishment(int resource, int request) const;
  const StochasticReplenishment* stochastic_entry(int resource, int request) const;

  // Expected consumption a(l) of `resource` at arrival l >= j for an action
  // committed at request j: peak * success_prob * P(duration > l - j).
  double expected_consumption(int resource, int request, int action, int type,
                              int l) const;
  // Expected reward booked under `resource` (resolved through its original
  // ancestor); zero before the action's activation request.
  double expected_reward(int resource, int request, int action, int type) const;
  // Sum of expected rewards over all booked resources for one decision.
  double total_expected_reward(int request, int action, int type) const;

  // id-based conveniences
  double expected_consumption(const std::string& resource, int request,
                              const std::string& action, const std::string& type,
                              int l) const;
  double expected_reward(const std::string& resource, int request,
                         const std::string& action, const std::string& type) const;

  // Growth used by the batching transformations. Both keep the instance
  // valid: ids follow the "<parent>@<request>" / "<action>@<resource>"
  // scheme and collisions are an error.
  int add_batched_resource(int parent, int request, double amount);
  int add_duplicate_action(int action, int parent_resource, int new_resource,
                           int request);

 private:
  std::unordered_map<std::string, int> res_index_;
  std::unordered_map<std::string, int> act_index_;
  std::unordered_map<std::string, int> type_index_;
  // Dense replenishment views, [resource][request-1].
  std::vector<std::vector<double>> fixed_dense_;
  std::vector<std::vector<double>> mean_dense_;
  std::vector<std::vector<int>> entry_dense_;

  void rebuild_indexes();
  friend class InstanceJson;
};

}  // namespace replsim
