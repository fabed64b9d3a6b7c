#include "replsim/batching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace replsim {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("batching: " + msg);
}

Instance without_replenishment(const Instance& inst) {
  Instance out = inst;
  out.replenishment.fixed.clear();
  out.replenishment.entries.clear();
  out.validate();
  return out;
}

// Emit lumps for one arrival in resource declaration order, growing the
// instance and the event list. Duplicates are taken from the action set as
// it stands when each lump lands, so a lump for a later resource also copies
// duplicates just created for an earlier one.
void apply_lumps(Instance& inst, BatchState& state, int request,
                 const std::function<double(int)>& observed,
                 std::vector<BatchEvent>& events,
                 std::vector<std::vector<double>>* lump_prefix) {
  const int n0 = inst.num_resources();  // lumps append; walk the originals only
  for (int i = 0; i < n0; ++i) {
    if (!inst.resources[i].origin.original()) continue;
    double lump = state.step(i, observed(i));
    if (lump > 0.0) {
      int nr = inst.add_batched_resource(i, request, lump);
      int snapshot = inst.num_actions();
      for (int k = 0; k < snapshot; ++k) {
        if (inst.actions[k].profile_for(i) != nullptr)
          inst.add_duplicate_action(k, i, nr, request);
      }
      events.push_back({i, request, lump, inst.resources[nr].id});
    }
    if (lump_prefix != nullptr) (*lump_prefix)[i][request - 1] = state.emitted(i);
  }
}

}  // namespace

BatchState::BatchState(int num_resources, double threshold)
    : threshold_(threshold), pending_(num_resources, 0.0), emitted_(num_resources, 0.0) {}

double BatchState::step(int resource, double observed) {
  if (!(observed >= 0.0) || !std::isfinite(observed))
    fail("observed replenishment must be finite and >= 0");
  pending_[resource] += observed;
  if (pending_[resource] >= threshold_ && pending_[resource] > 0.0) {
    double lump = pending_[resource];
    pending_[resource] = 0.0;
    emitted_[resource] += lump;
    return lump;
  }
  return 0.0;
}

double adversarial_threshold(const Instance& inst) {
  return std::sqrt(inst.c_min);
}

double stochastic_epsilon(const Instance& inst) {
  if (inst.c_min * inst.d <= 1.0)
    throw IncompatibleError("instance too small for ε formula");
  double M = inst.replenishment.bound_M;
  double eps = std::cbrt(3.0 * M / inst.c_min * std::log(inst.c_min * inst.d));
  return std::min(eps, 1.0);
}

BatchedInstance build_batched_instance_adversarial(const Instance& inst) {
  if (inst.replenishment.mode != ReplenishmentMode::Adversarial)
    throw IncompatibleError("offline batching needs a fixed replenishment schedule");
  BatchedInstance out;
  out.instance = without_replenishment(inst);
  out.threshold = adversarial_threshold(inst);
  out.epsilon = 0.0;
  out.lump_prefix.assign(inst.num_resources(),
                         std::vector<double>(inst.arrivals.horizon, 0.0));
  BatchState state(inst.num_resources(), out.threshold);
  for (int j = 1; j <= inst.arrivals.horizon; ++j) {
    apply_lumps(out.instance, state, j,
                [&](int i) { return inst.fixed_replenishment(i, j); }, out.events,
                &out.lump_prefix);
  }
  return out;
}

BatchedInstance build_batched_instance_stochastic(const Instance& inst,
                                                  std::optional<double> eps_override) {
  if (inst.arrivals.mode != ArrivalMode::Stochastic ||
      inst.replenishment.mode != ReplenishmentMode::Stochastic)
    throw IncompatibleError("fluid batching needs stochastic arrivals and replenishment");
  double eps = eps_override ? *eps_override : stochastic_epsilon(inst);
  if (!(eps >= 0.0 && eps <= 1.0)) fail("discount must lie in [0, 1]");
  BatchedInstance out;
  out.instance = without_replenishment(inst);
  out.epsilon = eps;
  out.threshold = eps * inst.c_min;
  out.lump_prefix.assign(inst.num_resources(),
                         std::vector<double>(inst.arrivals.horizon, 0.0));
  BatchState state(inst.num_resources(), out.threshold);
  for (int j = 1; j <= inst.arrivals.horizon; ++j) {
    apply_lumps(out.instance, state, j,
                [&](int i) { return (1.0 - eps) * inst.mean_replenishment(i, j); },
                out.events, &out.lump_prefix);
  }
  return out;
}

// ---------------------------------------------------------------------------

BatchAdversarial::BatchAdversarial(std::unique_ptr<Policy> base)
    : base_(std::move(base)) {
  if (!base_) fail("wrapper needs a base policy");
}

std::string BatchAdversarial::name() const {
  return "batch_adversarial:" + base_->name();
}

void BatchAdversarial::reset(const Instance& inst) {
  if (inst.arrivals.mode != ArrivalMode::Adversarial)
    throw IncompatibleError("adversarial batching wrapper needs adversarial arrivals");
  virt_ = without_replenishment(inst);
  vled_ = std::make_unique<Ledger>(virt_);
  state_ = std::make_unique<BatchState>(inst.num_resources(), adversarial_threshold(inst));
  events_.clear();
  history_.clear();
  last_choice_.clear();
  next_request_ = 1;
  base_->reset(virt_);
}

int BatchAdversarial::choose(const Instance& inst, const Ledger& led, int request,
                             int type, const std::vector<int>& feasible,
                             const DrawKit& kit) {
  (void)feasible;
  if (request != next_request_)
    fail("wrapper saw request " + std::to_string(request) + " out of order");
  ++next_request_;

  // Fold this arrival's observed replenishment into the lump recursion; any
  // lump lands in the virtual instance before the base policy decides.
  apply_lumps(virt_, *state_, request,
              [&](int i) { return led.realized_replenishment(i, request); }, events_,
              nullptr);
  vled_->register_new_resources();

  vled_->replenish(request, kit);  // no-op: the virtual copy has no replenishment
  vled_->release_due(request);

  std::vector<std::string> active;
  for (const auto& a : virt_.actions)
    if (a.activation <= request) active.push_back(a.id);
  history_.push_back(std::move(active));

  std::vector<int> vfeas = vled_->feasible_actions(request, tol_);
  int chosen = base_->choose(virt_, *vled_, request, type, vfeas, kit);
  if (std::find(vfeas.begin(), vfeas.end(), chosen) == vfeas.end())
    fail("base policy '" + base_->name() + "' left the virtual feasible set at request " +
         std::to_string(request));
  vled_->commit(chosen, request, type, kit, tol_);
  vled_->check_conservation(tol_);
  last_choice_ = virt_.actions[chosen].id;

  const ActionOrigin& org = virt_.actions[chosen].origin;
  int implemented = org.original() ? chosen : org.root_action;
  (void)inst;
  return implemented;
}

// ---------------------------------------------------------------------------

BatchStochastic::BatchStochastic(std::unique_ptr<Policy> base,
                                 std::optional<double> eps_override)
    : base_(std::move(base)), eps_override_(eps_override) {
  if (!base_) fail("wrapper needs a base policy");
}

std::string BatchStochastic::name() const {
  return "batch_stochastic:" + base_->name();
}

void BatchStochastic::reset(const Instance& inst) {
  batched_ = build_batched_instance_stochastic(inst, eps_override_);
  vled_ = std::make_unique<Ledger>(batched_.instance);
  last_choice_.clear();
  last_fallback_ = false;
  next_request_ = 1;
  realized_prefix_.assign(inst.num_resources(), 0.0);
  base_->reset(batched_.instance);
}

int BatchStochastic::choose(const Instance& inst, const Ledger& led, int request,
                            int type, const std::vector<int>& feasible,
                            const DrawKit& kit) {
  if (request != next_request_)
    fail("wrapper saw request " + std::to_string(request) + " out of order");
  ++next_request_;
  for (int i = 0; i < inst.num_resources(); ++i)
    realized_prefix_[i] += led.realized_replenishment(i, request);

  vled_->replenish(request, kit);
  vled_->release_due(request);
  std::vector<int> vfeas = vled_->feasible_actions(request, tol_);
  int chosen = base_->choose(batched_.instance, *vled_, request, type, vfeas, kit);
  if (std::find(vfeas.begin(), vfeas.end(), chosen) == vfeas.end())
    fail("base policy '" + base_->name() + "' left the virtual feasible set at request " +
         std::to_string(request));
  last_choice_ = batched_.instance.actions[chosen].id;

  // Implement the original action behind the virtual choice only when, for
  // every resource family the choice touches, the realized replenishment has
  // kept pace with the lump schedule and the real inventory covers the peaks.
  const Action& va = batched_.instance.actions[chosen];
  const ActionOrigin& org = va.origin;
  int root = org.original() ? chosen : org.root_action;
  bool ok = true;
  for (const auto& u : va.uses) {
    int parent = batched_.instance.root_of(u.resource);
    if (realized_prefix_[parent] < batched_.lump_prefix[parent][request - 1] - tol_) {
      ok = false;
      break;
    }
  }
  if (ok && std::find(feasible.begin(), feasible.end(), root) == feasible.end())
    ok = false;

  vled_->commit(chosen, request, type, kit, tol_);
  vled_->check_conservation(tol_);

  if (ok) {
    last_fallback_ = false;
    return root;
  }
  last_fallback_ = true;
  return inst.trivial_action;
}

std::unique_ptr<Policy> wrap_adversarial(std::unique_ptr<Policy> base) {
  return std::make_unique<BatchAdversarial>(std::move(base));
}

std::unique_ptr<Policy> wrap_stochastic(std::unique_ptr<Policy> base,
                                        std::optional<double> eps_override) {
  return std::make_unique<BatchStochastic>(std::move(base), eps_override);
}

}  // namespace replsim
