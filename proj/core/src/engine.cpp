#include "replsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace replsim {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("engine: " + msg);
}

int reveal_type(const Instance& inst, int request, const DrawKit& kit) {
  if (inst.arrivals.mode == ArrivalMode::Adversarial)
    return inst.scheduled_type(request);
  const auto& row = inst.arrivals.type_probs[request - 1];
  double u = kit.type_uniform(request);
  double acc = 0.0;
  for (size_t z = 0; z + 1 < row.size(); ++z) {
    acc += row[z];
    if (u < acc) return static_cast<int>(z);
  }
  return static_cast<int>(row.size()) - 1;
}

}  // namespace

Ledger::Ledger(const Instance& inst) : inst_(&inst) {
  const size_t n = inst.resources.size();
  available_.resize(n);
  consumed_.assign(n, 0.0);
  cum_replen_.assign(n, 0.0);
  reward_.assign(n, 0.0);
  realized_.assign(n, std::vector<double>(inst.arrivals.horizon, 0.0));
  for (size_t i = 0; i < n; ++i) available_[i] = inst.resources[i].initial_inventory;
}

double Ledger::held(int resource) const {
  double h = 0.0;
  for (const auto& hold : holds_)
    if (hold.resource == resource) h += hold.amount;
  return h;
}

double Ledger::capacity(int resource) const {
  return inst_->resources[resource].initial_inventory + cum_replen_[resource];
}

double Ledger::realized_replenishment(int resource, int request) const {
  return realized_[resource][request - 1];
}

void Ledger::replenish(int request, const DrawKit& kit,
                       const std::vector<std::vector<double>>* forced) {
  if (forced != nullptr) {
    for (int i = 0; i < inst_->num_resources(); ++i) {
      double amt = (*forced)[i][request - 1];
      if (amt == 0.0) continue;
      available_[i] += amt;
      cum_replen_[i] += amt;
      realized_[i][request - 1] = amt;
    }
    return;
  }
  const auto& spec = inst_->replenishment;
  if (spec.mode == ReplenishmentMode::Adversarial) {
    for (int i = 0; i < inst_->num_resources(); ++i) {
      double amt = inst_->fixed_replenishment(i, request);
      if (amt == 0.0) continue;
      available_[i] += amt;
      cum_replen_[i] += amt;
      realized_[i][request - 1] = amt;
    }
    return;
  }
  for (int i = 0; i < inst_->num_resources(); ++i) {
    const StochasticReplenishment* e = inst_->stochastic_entry(i, request);
    if (e == nullptr || e->support == 0.0) continue;
    double u = kit.replenishment_uniform(request, inst_->resources[i].id);
    double amt = u < e->mean / e->support ? e->support : 0.0;
    if (amt == 0.0) continue;
    available_[i] += amt;
    cum_replen_[i] += amt;
    realized_[i][request - 1] = amt;
  }
}

void Ledger::register_new_resources() {
  for (size_t i = available_.size(); i < inst_->resources.size(); ++i) {
    available_.push_back(inst_->resources[i].initial_inventory);
    consumed_.push_back(0.0);
    cum_replen_.push_back(0.0);
    reward_.push_back(0.0);
    realized_.emplace_back(inst_->arrivals.horizon, 0.0);
  }
}

void Ledger::release_due(int request) {
  size_t w = 0;
  for (size_t r = 0; r < holds_.size(); ++r) {
    if (holds_[r].release_request <= request) {
      available_[holds_[r].resource] += holds_[r].amount;
    } else {
      holds_[w++] = holds_[r];
    }
  }
  holds_.resize(w);
}

bool Ledger::feasible(int action, int request, double tol) const {
  const Action& a = inst_->actions[action];
  if (a.activation > request) return false;
  for (const auto& u : a.uses)
    if (available_[u.resource] < u.profile.peak - tol) return false;
  return true;
}

std::vector<int> Ledger::feasible_actions(int request, double tol) const {
  std::vector<int> out;
  for (int k = 0; k < inst_->num_actions(); ++k)
    if (feasible(k, request, tol)) out.push_back(k);
  return out;
}

double Ledger::commit(int action, int request, int type, const DrawKit& kit, double tol) {
  if (!feasible(action, request, tol))
    fail("commit of infeasible action '" + inst_->actions[action].id + "' at request " +
         std::to_string(request));
  const Action& a = inst_->actions[action];

  // One shared coin per decision: every Bernoulli attached to this commit
  // (consumption successes, coupled payouts) reads the same uniform, so runs
  // that pick sibling copies of one action realize identical outcomes.
  double coin = -1.0;
  auto u_dec = [&]() {
    if (coin < 0.0) coin = kit.decision_coin(request);
    return coin;
  };

  for (const auto& use : a.uses) {
    const ConsumptionProfile& p = use.profile;
    if (p.peak == 0.0 || u_dec() >= p.success_prob) continue;
    available_[use.resource] -= p.peak;
    switch (p.release.kind) {
      case ReleaseKind::Never:
        consumed_[use.resource] += p.peak;
        break;
      case ReleaseKind::AfterSteps:
        holds_.push_back({use.resource, p.peak, request + p.release.steps});
        break;
      case ReleaseKind::Geometric: {
        const std::string& root_id = inst_->resources[inst_->resources[use.resource].root].id;
        int steps = geometric_steps(kit.release_uniform(request, root_id), p.release.p);
        holds_.push_back({use.resource, p.peak, request + steps});
        break;
      }
    }
  }

  double total = 0.0;
  for (const auto& e : a.rewards) {
    if (e.type != type) continue;
    double credit = 0.0;
    if (e.kind == RewardKind::Deterministic)
      credit = e.value;
    else if (u_dec() < a.coupled_success)
      credit = e.value;
    if (credit != 0.0) {
      reward_[e.resource] += credit;
      total += credit;
    }
  }
  return total;
}

void Ledger::check_conservation(double tol) const {
  std::vector<double> held_sum(inst_->num_resources(), 0.0);
  for (const auto& h : holds_) held_sum[h.resource] += h.amount;
  for (int i = 0; i < inst_->num_resources(); ++i) {
    double lhs = available_[i] + held_sum[i] + consumed_[i];
    double rhs = inst_->resources[i].initial_inventory + cum_replen_[i];
    if (std::fabs(lhs - rhs) > tol * std::max(1.0, rhs))
      fail("inventory conservation violated for '" + inst_->resources[i].id + "'");
  }
}

std::string RunResult::to_json() const {
  nlohmann::ordered_json o;
  o["objective"] = objective;
  nlohmann::ordered_json totals;
  for (const auto& [id, v] : resource_totals) totals[id] = v;
  o["resource_totals"] = std::move(totals);
  o["fallback_count"] = fallback_count;
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const auto& s : trace) {
    nlohmann::ordered_json t;
    t["request"] = s.request;
    t["type"] = s.type;
    t["chosen"] = s.chosen;
    t["implemented"] = s.implemented;
    t["fallback"] = s.fallback;
    t["reward"] = s.reward;
    steps.push_back(std::move(t));
  }
  o["trace"] = std::move(steps);
  return o.dump(2) + "\n";
}

RunResult run(const Instance& inst, Policy& policy, const RunOptions& opt) {
  policy.reset(inst);
  Ledger led(inst);
  DrawKit kit(opt.seed, opt.trial);
  RunResult res;
  if (opt.forced_types != nullptr &&
      static_cast<int>(opt.forced_types->size()) != inst.arrivals.horizon)
    fail("forced type sequence does not match the horizon");
  if (opt.forced_replenishment != nullptr &&
      static_cast<int>(opt.forced_replenishment->size()) != inst.num_resources())
    fail("forced replenishment schedule does not match the instance");
  for (int j = 1; j <= inst.arrivals.horizon; ++j) {
    led.replenish(j, kit, opt.forced_replenishment);
    led.release_due(j);
    int type = opt.forced_types != nullptr ? (*opt.forced_types)[j - 1]
                                           : reveal_type(inst, j, kit);
    std::vector<int> feas = led.feasible_actions(j, opt.tol);
    int k = policy.choose(inst, led, j, type, feas, kit);
    if (std::find(feas.begin(), feas.end(), k) == feas.end())
      fail("policy '" + policy.name() + "' returned an action outside the feasible set at request " +
           std::to_string(j));
    double reward = led.commit(k, j, type, kit, opt.tol);
    led.check_conservation(opt.tol);
    bool fb = policy.last_was_fallback();
    if (fb) ++res.fallback_count;
    if (opt.record_trace) {
      TraceStep s;
      s.request = j;
      s.type = type;
      s.implemented = inst.actions[k].id;
      std::string virt = policy.last_virtual_choice();
      s.chosen = virt.empty() ? s.implemented : virt;
      s.fallback = fb;
      s.reward = reward;
      res.trace.push_back(std::move(s));
    }
  }
  double obj = std::numeric_limits<double>::infinity();
  for (int i = 0; i < inst.num_resources(); ++i) {
    if (!inst.resources[i].origin.original()) continue;
    res.resource_totals[inst.resources[i].id] = led.reward_total(i);
    obj = std::min(obj, led.reward_total(i));
  }
  res.objective = obj;
  return res;
}

PerfResult expected_performance(const Instance& inst, const PolicyFactory& make_policy,
                                const PerfOptions& opt) {
  if (opt.trials < 1) fail("expected_performance needs at least one trial");
  const int m = inst.arrivals.horizon;
  std::vector<double> obj(opt.trials);
  std::vector<double> fb(opt.trials);

  auto worker = [&](int lo, int hi) {
    for (int t = lo; t < hi; ++t) {
      auto pol = make_policy();
      RunOptions ro;
      ro.seed = opt.seed;
      ro.trial = static_cast<uint64_t>(t);
      ro.tol = opt.tol;
      ro.record_trace = false;
      RunResult r = run(inst, *pol, ro);
      obj[t] = r.objective;
      fb[t] = static_cast<double>(r.fallback_count) / m;
    }
  };

  int threads = std::max(1, opt.threads);
  threads = std::min<int>(threads, opt.trials);
  if (threads == 1) {
    worker(0, opt.trials);
  } else {
    std::vector<std::thread> pool;
    int block = (opt.trials + threads - 1) / threads;
    for (int b = 0; b < threads; ++b) {
      int lo = b * block, hi = std::min(opt.trials, lo + block);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  auto mean_se = [&](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    double se = v.size() > 1 ? std::sqrt(var / (v.size() - 1.0) / v.size()) : 0.0;
    return std::pair<double, double>(mean, se);
  };
  PerfResult out;
  std::tie(out.mean, out.se) = mean_se(obj);
  std::tie(out.fallback_rate, out.fallback_se) = mean_se(fb);
  return out;
}

}  // namespace replsim
