#include "replsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>

namespace replsim {

namespace {

constexpr double kTol = 1e-9;

[[noreturn]] void refuse(const std::string& msg) {
  throw IncompatibleError("exact evaluation: " + msg);
}

// Indices of stochastic entries that are genuine coin flips (0 < q < w).
std::vector<int> coin_entries(const Instance& inst) {
  std::vector<int> coins;
  for (size_t e = 0; e < inst.replenishment.entries.size(); ++e) {
    const auto& s = inst.replenishment.entries[e];
    if (s.mean > 0.0 && s.mean < s.support) coins.push_back(static_cast<int>(e));
  }
  return coins;
}

void check_scope(const Instance& inst, const OracleLimits& lim) {
  for (const auto& a : inst.actions) {
    for (const auto& u : a.uses) {
      double s = u.profile.success_prob;
      if (s != 0.0 && s != 1.0)
        refuse("success probabilities must be 0 or 1");
      if (s == 1.0 && u.profile.peak > 0.0 &&
          u.profile.release.kind == ReleaseKind::Geometric)
        refuse("geometric release on a consuming use is out of scope");
    }
  }
  if (static_cast<int>(coin_entries(inst).size()) > lim.max_coins)
    refuse("more than " + std::to_string(lim.max_coins) + " replenishment coins");
}

long long count_type_branches(const Instance& inst, long long cap) {
  if (inst.arrivals.mode == ArrivalMode::Adversarial) return 1;
  long long total = 1;
  for (int j = 1; j <= inst.arrivals.horizon; ++j) {
    long long support = 0;
    for (int z = 0; z < inst.num_types(); ++z)
      if (inst.type_prob(j, z) > 0.0) ++support;
    total *= support;
    if (total > cap) return cap + 1;
  }
  return total;
}

void enumerate_type_branches(const Instance& inst,
                             const std::function<void(const std::vector<int>&, double)>& f) {
  const int m = inst.arrivals.horizon;
  if (inst.arrivals.mode == ArrivalMode::Adversarial) {
    std::vector<int> seq(m);
    for (int j = 1; j <= m; ++j) seq[j - 1] = inst.scheduled_type(j);
    f(seq, 1.0);
    return;
  }
  std::vector<int> seq(m, 0);
  std::function<void(int, double)> rec = [&](int j, double prob) {
    if (j > m) {
      f(seq, prob);
      return;
    }
    for (int z = 0; z < inst.num_types(); ++z) {
      double p = inst.type_prob(j, z);
      if (p <= 0.0) continue;
      seq[j - 1] = z;
      rec(j + 1, prob * p);
    }
  };
  rec(1, 1.0);
}

// Realized per-arrival supply for one coin assignment, [resource][request-1].
std::vector<std::vector<double>> realized_schedule(const Instance& inst,
                                                   const std::vector<int>& coins,
                                                   unsigned long long mask) {
  std::vector<std::vector<double>> r(inst.num_resources(),
                                     std::vector<double>(inst.arrivals.horizon, 0.0));
  if (inst.replenishment.mode == ReplenishmentMode::Adversarial) {
    for (const auto& e : inst.replenishment.fixed) r[e.resource][e.request - 1] = e.amount;
    return r;
  }
  for (const auto& e : inst.replenishment.entries)
    if (e.mean > 0.0 && e.mean >= e.support) r[e.resource][e.request - 1] = e.support;
  for (size_t c = 0; c < coins.size(); ++c) {
    if (!(mask >> c & 1)) continue;
    const auto& e = inst.replenishment.entries[coins[c]];
    r[e.resource][e.request - 1] = e.support;
  }
  return r;
}

double coin_mask_prob(const Instance& inst, const std::vector<int>& coins,
                      unsigned long long mask) {
  double p = 1.0;
  for (size_t c = 0; c < coins.size(); ++c) {
    const auto& e = inst.replenishment.entries[coins[c]];
    double hit = e.mean / e.support;
    p *= (mask >> c & 1) ? hit : 1.0 - hit;
  }
  return p;
}

// Reward paid when `action` is taken at a request of type `type` (activation
// already checked by feasibility). Deterministic within the oracle scope.
double branch_reward(const Instance& inst, int action, int type) {
  const Action& a = inst.actions[action];
  double total = 0.0;
  for (const auto& e : a.rewards) {
    if (e.type != type) continue;
    if (e.kind == RewardKind::Deterministic)
      total += e.value;
    else if (a.coupled_success == 1.0)
      total += e.value;
  }
  return total;
}

double entry_credit(const Action& a, const RewardEntry& e) {
  if (e.kind == RewardKind::Deterministic) return e.value;
  return a.coupled_success == 1.0 ? e.value : 0.0;
}

struct OracleHold {
  int resource;
  int release_request;
  double amount;
  bool operator<(const OracleHold& o) const {
    return std::tie(release_request, resource, amount) <
           std::tie(o.release_request, o.resource, o.amount);
  }
};

// Best total reward for a single-resource branch via memoized search on
// (arrival, inventory, outstanding holds). With one resource the min-over-
// resources objective is just the accumulated total.
class SingleResourceBest {
 public:
  SingleResourceBest(const Instance& inst, const std::vector<int>& types,
                     const std::vector<std::vector<double>>& supply)
      : inst_(inst), types_(types), supply_(supply) {}

  double solve() { return search(1, inst_.resources[0].initial_inventory, {}); }

 private:
  static long long quant(double v) { return std::llround(v * 1e9); }

  std::string key(int j, double avail, const std::vector<OracleHold>& holds) const {
    std::string k = std::to_string(j) + "|" + std::to_string(quant(avail));
    for (const auto& h : holds)
      k += "|" + std::to_string(h.release_request) + ":" + std::to_string(quant(h.amount));
    return k;
  }

  double search(int j, double avail, std::vector<OracleHold> holds) {
    if (j > inst_.arrivals.horizon) return 0.0;
    std::string k = key(j, avail, holds);
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;

    avail += supply_[0][j - 1];
    std::vector<OracleHold> live;
    for (const auto& h : holds) {
      if (h.release_request <= j)
        avail += h.amount;
      else
        live.push_back(h);
    }
    int type = types_[j - 1];

    double best = 0.0;
    for (int a = 0; a < inst_.num_actions(); ++a) {
      const Action& act = inst_.actions[a];
      if (act.activation > j) continue;
      bool feas = true;
      for (const auto& u : act.uses)
        if (avail < u.profile.peak - kTol) { feas = false; break; }
      if (!feas) continue;

      double next_avail = avail;
      std::vector<OracleHold> next = live;
      for (const auto& u : act.uses) {
        if (u.profile.success_prob != 1.0 || u.profile.peak == 0.0) continue;
        next_avail -= u.profile.peak;
        if (u.profile.release.kind == ReleaseKind::AfterSteps)
          next.push_back({u.resource, j + u.profile.release.steps, u.profile.peak});
        // Never-release consumption just leaves the pool.
      }
      std::sort(next.begin(), next.end());
      double v = branch_reward(inst_, a, type) + search(j + 1, next_avail, std::move(next));
      best = std::max(best, v);
    }
    memo_[k] = best;
    return best;
  }

  const Instance& inst_;
  const std::vector<int>& types_;
  const std::vector<std::vector<double>>& supply_;
  std::map<std::string, double> memo_;
};

// Best min-over-resources objective by trying every action sequence.
class SequenceBest {
 public:
  SequenceBest(const Instance& inst, const std::vector<int>& types,
               const std::vector<std::vector<double>>& supply)
      : inst_(inst), types_(types), supply_(supply) {
    for (int i = 0; i < inst.num_resources(); ++i)
      avail_.push_back(inst.resources[i].initial_inventory);
    reward_.assign(inst.num_resources(), 0.0);
  }

  double solve() {
    best_ = 0.0;
    step(1);
    return best_;
  }

 private:
  void step(int j) {
    if (j > inst_.arrivals.horizon) {
      double obj = std::numeric_limits<double>::infinity();
      for (int i = 0; i < inst_.num_resources(); ++i)
        if (inst_.resources[i].origin.original()) obj = std::min(obj, reward_[i]);
      best_ = std::max(best_, obj);
      return;
    }
    std::vector<double> saved_avail = avail_;
    std::vector<OracleHold> saved_holds = holds_;

    for (int i = 0; i < inst_.num_resources(); ++i) avail_[i] += supply_[i][j - 1];
    std::vector<OracleHold> live;
    for (const auto& h : holds_) {
      if (h.release_request <= j)
        avail_[h.resource] += h.amount;
      else
        live.push_back(h);
    }
    holds_ = std::move(live);
    std::vector<double> base_avail = avail_;
    std::vector<OracleHold> base_holds = holds_;
    int type = types_[j - 1];

    for (int a = 0; a < inst_.num_actions(); ++a) {
      const Action& act = inst_.actions[a];
      if (act.activation > j) continue;
      bool feas = true;
      for (const auto& u : act.uses)
        if (avail_[u.resource] < u.profile.peak - kTol) { feas = false; break; }
      if (!feas) continue;

      for (const auto& u : act.uses) {
        if (u.profile.success_prob != 1.0 || u.profile.peak == 0.0) continue;
        avail_[u.resource] -= u.profile.peak;
        if (u.profile.release.kind == ReleaseKind::AfterSteps)
          holds_.push_back({u.resource, j + u.profile.release.steps, u.profile.peak});
      }
      for (const auto& e : act.rewards)
        if (e.type == type) reward_[e.resource] += entry_credit(act, e);
      step(j + 1);
      for (const auto& e : act.rewards)
        if (e.type == type) reward_[e.resource] -= entry_credit(act, e);
      avail_ = base_avail;
      holds_ = base_holds;
    }

    avail_ = std::move(saved_avail);
    holds_ = std::move(saved_holds);
  }

  const Instance& inst_;
  const std::vector<int>& types_;
  const std::vector<std::vector<double>>& supply_;
  std::vector<double> avail_;
  std::vector<double> reward_;
  std::vector<OracleHold> holds_;
  double best_ = 0.0;
};

}  // namespace

double exact_opt(const Instance& inst, const OracleLimits& lim) {
  check_scope(inst, lim);
  std::vector<int> coins = coin_entries(inst);
  long long coin_branches = 1LL << coins.size();
  long long type_branches = count_type_branches(inst, lim.max_branches);
  if (type_branches * coin_branches > lim.max_branches)
    refuse("more than " + std::to_string(lim.max_branches) + " branches");
  if (inst.num_resources() > 1) {
    double log_seq = inst.arrivals.horizon * std::log(std::max(1, inst.num_actions()));
    if (log_seq > std::log(static_cast<double>(lim.max_sequences)))
      refuse("more than " + std::to_string(lim.max_sequences) + " action sequences");
  }

  double total = 0.0;
  for (unsigned long long mask = 0; mask < static_cast<unsigned long long>(coin_branches);
       ++mask) {
    double pc = coin_mask_prob(inst, coins, mask);
    if (pc == 0.0) continue;
    auto supply = realized_schedule(inst, coins, mask);
    enumerate_type_branches(inst, [&](const std::vector<int>& types, double pt) {
      double v = inst.num_resources() == 1
                     ? SingleResourceBest(inst, types, supply).solve()
                     : SequenceBest(inst, types, supply).solve();
      total += pc * pt * v;
    });
  }
  return total;
}

double exact_expected_objective(const Instance& inst, const PolicyFactory& make_policy,
                                const OracleLimits& lim) {
  check_scope(inst, lim);
  std::vector<int> coins = coin_entries(inst);
  long long coin_branches = 1LL << coins.size();
  long long type_branches = count_type_branches(inst, lim.max_branches);
  if (type_branches * coin_branches > lim.max_branches)
    refuse("more than " + std::to_string(lim.max_branches) + " branches");

  double total = 0.0;
  for (unsigned long long mask = 0; mask < static_cast<unsigned long long>(coin_branches);
       ++mask) {
    double pc = coin_mask_prob(inst, coins, mask);
    if (pc == 0.0) continue;
    auto supply = realized_schedule(inst, coins, mask);
    enumerate_type_branches(inst, [&](const std::vector<int>& types, double pt) {
      auto pol = make_policy();
      RunOptions ro;
      ro.record_trace = false;
      ro.forced_types = &types;
      ro.forced_replenishment = &supply;
      RunResult r = run(inst, *pol, ro);
      total += pc * pt * r.objective;
    });
  }
  return total;
}

}  // namespace replsim
