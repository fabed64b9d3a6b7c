#include "replsim/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace replsim {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("generator: " + msg);
}

// Thin wrapper over mt19937_64 raw output; std::uniform_int_distribution is
// not bit-stable across standard libraries and these draws end up frozen in
// test fixtures.
struct Rng {
  std::mt19937_64 eng;
  explicit Rng(uint64_t seed) : eng(seed) {}
  double real() { return (eng() >> 11) * 0x1.0p-53; }
  int range(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(eng() % static_cast<uint64_t>(hi - lo + 1));
  }
  bool coin(double p) { return real() < p; }
};

Resource make_resource(const std::string& id, double inventory) {
  Resource r;
  r.id = id;
  r.initial_inventory = inventory;
  return r;
}

Action make_trivial() {
  Action a;
  a.id = "k0";
  return a;
}

void add_use(Action& a, int resource, double peak, double success, ReleaseDist release) {
  a.uses.push_back({resource, {peak, success, release}});
}

void add_reward(Action& a, int type, int resource, RewardKind kind, double value) {
  RewardEntry e;
  e.type = type;
  e.resource = resource;
  e.kind = kind;
  e.value = value;
  a.rewards.push_back(e);
}

// Credit the same amount to every resource's tally: the min-over-resources
// objective then counts the plain total, which is how sum-reward settings
// (matching, budgeted allocation, bundles) are expressed in this model.
void add_reward_all(Action& a, int type, int num_resources, RewardKind kind, double value) {
  for (int i = 0; i < num_resources; ++i) add_reward(a, type, i, kind, value);
}

// Adversarial schedule over K types; the first K slots cover every type once
// so the type universe (and the index every reward entry uses) is fixed
// regardless of the tail draws.
std::vector<std::string> covering_schedule(Rng& rng, int m, int k_types,
                                           const std::string& prefix) {
  if (m < k_types) fail("horizon too short to cover every request type");
  std::vector<std::string> sched;
  for (int j = 0; j < m; ++j) {
    int z = j < k_types ? j : rng.range(0, k_types - 1);
    sched.push_back(prefix + std::to_string(z + 1));
  }
  return sched;
}

std::vector<bool> random_nonempty_subset(Rng& rng, int n) {
  while (true) {
    std::vector<bool> in(n, false);
    bool any = false;
    for (int i = 0; i < n; ++i) {
      in[i] = rng.coin(0.5);
      any = any || in[i];
    }
    if (any) return in;
  }
}

// Random row over k types that sums to one exactly.
std::vector<double> random_prob_row(Rng& rng, int k) {
  std::vector<double> w(k);
  double total = 0.0;
  for (double& v : w) {
    v = 0.05 + rng.real();
    total += v;
  }
  double acc = 0.0;
  for (int z = 0; z + 1 < k; ++z) {
    w[z] /= total;
    acc += w[z];
  }
  w[k - 1] = 1.0 - acc;
  return w;
}

void drip_fixed(Instance& inst, Rng& rng, int n, int m, double per_request_coin,
                const std::vector<double>& amounts) {
  double max_amt = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 2; j <= m; ++j)
      if (rng.coin(per_request_coin)) {
        double a = amounts[static_cast<size_t>(rng.range(0, static_cast<int>(amounts.size()) - 1))];
        inst.replenishment.fixed.push_back({i, j, a});
        max_amt = std::max(max_amt, a);
      }
  inst.replenishment.mode = ReplenishmentMode::Adversarial;
  inst.replenishment.bound_M = max_amt;
}

int pos_int(double v, const std::string& what) {
  double r = std::llround(v);
  if (!(v > 0.0) || std::fabs(v - r) > 1e-9) fail(what + " must be a positive integer");
  return static_cast<int>(r);
}

Instance gen_b_matching(const GeneratorParams& p) {
  Rng rng(p.seed);
  int n = p.n > 0 ? p.n : 3;
  int m = p.m > 0 ? p.m : 40;
  double c = p.c > 0 ? p.c : 5;
  int k_types = std::min(n + 2, (1 << n) - 1);

  Instance inst;
  for (int i = 0; i < n; ++i)
    inst.resources.push_back(make_resource("r" + std::to_string(i + 1), c));
  std::vector<std::vector<bool>> compat;
  for (int z = 0; z < k_types; ++z) compat.push_back(random_nonempty_subset(rng, n));

  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = m;
  inst.arrivals.types = covering_schedule(rng, m, k_types, "z");

  for (int i = 0; i < n; ++i) {
    Action a;
    a.id = "m" + std::to_string(i + 1);
    add_use(a, i, 1.0, 1.0, {ReleaseKind::Never, 0, 0.0});
    for (int z = 0; z < k_types; ++z)
      if (compat[z][i]) add_reward_all(a, z, n, RewardKind::Deterministic, 1.0);
    inst.actions.push_back(a);
  }
  inst.actions.push_back(make_trivial());
  drip_fixed(inst, rng, n, m, 0.3, {0.5, 1.0, 1.5, 2.0});
  return inst;
}

Instance gen_adwords(const GeneratorParams& p) {
  Rng rng(p.seed);
  int n = p.n > 0 ? p.n : 2;
  int m = p.m > 0 ? p.m : 240;
  double c = p.c > 0 ? p.c : 25;
  const std::vector<double> levels = {0.25, 0.5, 0.75, 1.0};
  int k_types = 11;

  Instance inst;
  for (int i = 0; i < n; ++i)
    inst.resources.push_back(make_resource("r" + std::to_string(i + 1), c));

  // bid[z][i] is either zero or one of the four levels
  std::vector<std::vector<double>> bid(k_types, std::vector<double>(n, 0.0));
  for (int z = 0; z < k_types; ++z) {
    bool any = false;
    while (!any)
      for (int i = 0; i < n; ++i) {
        bid[z][i] = rng.coin(0.25) ? 0.0 : levels[static_cast<size_t>(rng.range(0, 3))];
        any = any || bid[z][i] > 0.0;
      }
  }

  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = m;
  inst.arrivals.types = covering_schedule(rng, m, k_types, "z");

  for (int i = 0; i < n; ++i)
    for (size_t l = 0; l < levels.size(); ++l) {
      Action a;
      a.id = "a" + std::to_string(i + 1) + "@L" + std::to_string(l + 1);
      add_use(a, i, levels[l], 1.0, {ReleaseKind::Never, 0, 0.0});
      for (int z = 0; z < k_types; ++z)
        if (bid[z][i] == levels[l])
          add_reward_all(a, z, n, RewardKind::Deterministic, levels[l]);
      inst.actions.push_back(a);
    }
  inst.actions.push_back(make_trivial());

  // steady drip worth half the starting inventory over the horizon
  double rho = c / (2.0 * m);
  for (int i = 0; i < n; ++i)
    for (int j = 1; j <= m; ++j) inst.replenishment.fixed.push_back({i, j, rho});
  inst.replenishment.mode = ReplenishmentMode::Adversarial;
  inst.replenishment.bound_M = rho;
  return inst;
}

Instance gen_stochastic_rewards(const GeneratorParams& p) {
  Rng rng(p.seed);
  int n = p.n > 0 ? p.n : 3;
  int m = p.m > 0 ? p.m : 40;
  double c = p.c > 0 ? p.c : 5;
  int k_types = n + 1;
  const std::vector<double> success = {0.5, 0.6, 0.7, 0.8, 0.9};

  Instance inst;
  for (int i = 0; i < n; ++i)
    inst.resources.push_back(make_resource("r" + std::to_string(i + 1), c));
  std::vector<std::vector<bool>> compat;
  for (int z = 0; z < k_types; ++z) compat.push_back(random_nonempty_subset(rng, n));

  inst.arrivals.mode = ArrivalMode::Stochastic;
  inst.arrivals.horizon = m;
  for (int z = 0; z < k_types; ++z) inst.arrivals.types.push_back("z" + std::to_string(z + 1));
  for (int j = 0; j < m; ++j) inst.arrivals.type_probs.push_back(random_prob_row(rng, k_types));

  for (int i = 0; i < n; ++i) {
    Action a;
    a.id = "m" + std::to_string(i + 1);
    double s = success[static_cast<size_t>(rng.range(0, 4))];
    add_use(a, i, 1.0, s, {ReleaseKind::Never, 0, 0.0});
    for (int z = 0; z < k_types; ++z)
      if (compat[z][i]) add_reward_all(a, z, n, RewardKind::CoupledToConsumption, 1.0);
    inst.actions.push_back(a);
  }
  inst.actions.push_back(make_trivial());

  inst.replenishment.mode = ReplenishmentMode::Stochastic;
  inst.replenishment.bound_M = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = 2; j <= m; ++j)
      if (rng.coin(0.5)) inst.replenishment.entries.push_back({i, j, 1.0, 0.5});
  return inst;
}

Instance gen_assortment(const GeneratorParams& p) {
  Rng rng(p.seed);
  int n = p.n > 0 ? p.n : 3;
  int m = p.m > 0 ? p.m : 30;
  double c = p.c > 0 ? p.c : 5;
  int max_size = std::min(n, 3);
  const int k_types = 2;
  const double mult[k_types] = {1.0, 1.5};

  Instance inst;
  for (int i = 0; i < n; ++i)
    inst.resources.push_back(make_resource("r" + std::to_string(i + 1), c));

  inst.arrivals.mode = ArrivalMode::Stochastic;
  inst.arrivals.horizon = m;
  inst.arrivals.types = {"z1", "z2"};
  for (int j = 0; j < m; ++j) inst.arrivals.type_probs.push_back(random_prob_row(rng, k_types));

  // every nonempty offer set up to max_size; the customer takes the whole
  // set with probability 1/(|S|+1), the leftover mass is no purchase
  for (int mask = 1; mask < (1 << n); ++mask) {
    int size = __builtin_popcount(static_cast<unsigned>(mask));
    if (size > max_size) continue;
    Action a;
    a.id = "s";
    double price = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) {
        a.id += std::to_string(i + 1);
        price += 1.0 + (i % 2);
      }
    double s = 1.0 / (size + 1);
    for (int i = 0; i < n; ++i)
      if (mask & (1 << i)) add_use(a, i, 1.0, s, {ReleaseKind::Never, 0, 0.0});
    for (int z = 0; z < k_types; ++z)
      add_reward_all(a, z, n, RewardKind::CoupledToConsumption, price * mult[z]);
    inst.actions.push_back(a);
  }
  inst.actions.push_back(make_trivial());

  inst.replenishment.mode = ReplenishmentMode::Stochastic;
  inst.replenishment.bound_M = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = 2; j <= m; j += 2) inst.replenishment.entries.push_back({i, j, 1.0, 0.4});
  return inst;
}

Instance gen_hypergraph(const GeneratorParams& p) {
  Rng rng(p.seed);
  int n = p.n > 0 ? p.n : 4;
  int m = p.m > 0 ? p.m : 40;
  double c = p.c > 0 ? p.c : 5;
  int d = p.d > 0 ? p.d : 2;
  if (d > n) fail("Hypergraph bundle size d must not exceed n");
  int bundles = n + 2;
  int k_types = 3;

  Instance inst;
  for (int i = 0; i < n; ++i)
    inst.resources.push_back(make_resource("r" + std::to_string(i + 1), c));

  std::vector<std::vector<int>> bundle(bundles);
  for (int b = 0; b < bundles; ++b) {
    int size = b == 0 ? d : rng.range(1, d);
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int t = 0; t < size; ++t) {
      int pick = rng.range(t, n - 1);
      std::swap(pool[t], pool[pick]);
    }
    bundle[b].assign(pool.begin(), pool.begin() + size);
    std::sort(bundle[b].begin(), bundle[b].end());
  }
  std::vector<std::vector<bool>> feasible(k_types);
  for (int z = 0; z < k_types; ++z) {
    feasible[z].assign(bundles, false);
    bool any = false;
    while (!any)
      for (int b = 0; b < bundles; ++b) {
        feasible[z][b] = rng.coin(0.5);
        any = any || feasible[z][b];
      }
  }

  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = m;
  inst.arrivals.types = covering_schedule(rng, m, k_types, "z");

  for (int b = 0; b < bundles; ++b) {
    Action a;
    a.id = "h" + std::to_string(b + 1);
    for (int i : bundle[b]) add_use(a, i, 1.0, 1.0, {ReleaseKind::Never, 0, 0.0});
    double price = static_cast<double>(bundle[b].size());
    for (int z = 0; z < k_types; ++z)
      if (feasible[z][b]) add_reward_all(a, z, n, RewardKind::Deterministic, price);
    inst.actions.push_back(a);
  }
  inst.actions.push_back(make_trivial());
  drip_fixed(inst, rng, n, m, 0.25, {0.5, 1.0, 2.0});
  return inst;
}

Instance gen_reusable_matching(const GeneratorParams& p) {
  Rng rng(p.seed);
  int n = p.n > 0 ? p.n : 3;
  int m = p.m > 0 ? p.m : 40;
  double c = p.c > 0 ? p.c : 4;
  int k_types = n + 1;

  Instance inst;
  for (int i = 0; i < n; ++i)
    inst.resources.push_back(make_resource("r" + std::to_string(i + 1), c));
  std::vector<std::vector<bool>> compat;
  for (int z = 0; z < k_types; ++z) compat.push_back(random_nonempty_subset(rng, n));

  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = m;
  inst.arrivals.types = covering_schedule(rng, m, k_types, "z");

  for (int i = 0; i < n; ++i) {
    Action a;
    a.id = "m" + std::to_string(i + 1);
    add_use(a, i, 1.0, 1.0, {ReleaseKind::Geometric, 0, 0.35});
    for (int z = 0; z < k_types; ++z)
      if (compat[z][i]) add_reward_all(a, z, n, RewardKind::Deterministic, 1.0);
    inst.actions.push_back(a);
  }
  inst.actions.push_back(make_trivial());
  drip_fixed(inst, rng, n, m, 0.2, {0.5, 1.0});
  return inst;
}

// n phases of c unit requests; phase p is compatible with resources p..n.
// Action ids sort so that an id tie-break fills the highest resource first,
// which starves the late phases (the classic worst case for greedy).
Instance gen_upper_triangular(const GeneratorParams& p) {
  int n = p.n > 0 ? p.n : 4;
  int c = pos_int(p.c > 0 ? p.c : 10, "UpperTriangular c");
  int m = n * c;

  Instance inst;
  for (int i = 0; i < n; ++i)
    inst.resources.push_back(make_resource("r" + std::to_string(i + 1), c));

  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = m;
  for (int phase = 0; phase < n; ++phase)
    for (int t = 0; t < c; ++t) inst.arrivals.types.push_back("p" + std::to_string(phase + 1));

  for (int i = 0; i < n; ++i) {
    Action a;
    std::string tag = std::to_string(n - 1 - i);
    a.id = "m" + std::string(3 - std::min<size_t>(3, tag.size()), '0') + tag;
    add_use(a, i, 1.0, 1.0, {ReleaseKind::Never, 0, 0.0});
    for (int phase = 0; phase <= i; ++phase)
      add_reward_all(a, phase, n, RewardKind::Deterministic, 1.0);
    inst.actions.push_back(a);
  }
  inst.actions.push_back(make_trivial());
  inst.replenishment.mode = ReplenishmentMode::Adversarial;
  return inst;
}

void power_set_actions(Instance& inst) {
  Action ab;
  ab.id = "KAB";
  add_use(ab, 0, 1.0, 1.0, {ReleaseKind::Never, 0, 0.0});
  add_use(ab, 1, 1.0, 1.0, {ReleaseKind::Never, 0, 0.0});
  add_reward(ab, 0, 0, RewardKind::Deterministic, 1.0);
  add_reward(ab, 0, 1, RewardKind::Deterministic, 1.0);
  Action a;
  a.id = "KA";
  add_use(a, 0, 1.0, 1.0, {ReleaseKind::Never, 0, 0.0});
  add_reward(a, 0, 0, RewardKind::Deterministic, 1.0);
  Action b;
  b.id = "KB";
  add_use(b, 1, 1.0, 1.0, {ReleaseKind::Never, 0, 0.0});
  add_reward(b, 0, 1, RewardKind::Deterministic, 1.0);
  inst.actions = {ab, a, b, make_trivial()};
}

Instance gen_appendix_example1(const GeneratorParams& p) {
  int m = p.m > 0 ? p.m : 2;
  if (m < 2) fail("AppendixExample1 needs at least two requests");
  Instance inst;
  inst.resources.push_back(make_resource("A", 100.0));
  inst.resources.push_back(make_resource("B", 100.0));
  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = m;
  inst.arrivals.types.assign(m, "t");
  power_set_actions(inst);
  inst.replenishment.mode = ReplenishmentMode::Adversarial;
  inst.replenishment.bound_M = 10.0;
  inst.replenishment.fixed = {{0, 1, 1.0}, {0, 2, 10.0}, {1, 1, 10.0}, {1, 2, 1.0}};
  return inst;
}

Instance gen_appendix_example2(const GeneratorParams&) {
  Instance inst;
  inst.resources.push_back(make_resource("A", 100.0));
  inst.resources.push_back(make_resource("B", 100.0));
  inst.arrivals.mode = ArrivalMode::Stochastic;
  inst.arrivals.horizon = 1;
  inst.arrivals.types = {"t"};
  inst.arrivals.type_probs = {{1.0}};
  power_set_actions(inst);
  inst.replenishment.mode = ReplenishmentMode::Stochastic;
  inst.replenishment.bound_M = 10.0;
  inst.replenishment.entries = {{0, 1, 10.0, 5.0}, {1, 1, 10.0, 5.0}};
  return inst;
}

// One resource of c units; c unit requests of reward 1 followed by gamma*c of
// reward 2; the only question is how much inventory to hold back for the
// better-paying tail and whether the mid-horizon refill arrives.
Instance hard_base(const GeneratorParams& p) {
  double gamma = p.gamma > 0 ? p.gamma : 1.0;
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must lie in (0, 1]");
  int c = pos_int(p.c > 0 ? p.c : 4, "hard-instance c");
  int tail = pos_int(gamma * c, "gamma * c");
  int m = c + tail;

  Instance inst;
  inst.resources.push_back(make_resource("r1", c));
  inst.arrivals.mode = ArrivalMode::Stochastic;
  inst.arrivals.horizon = m;
  inst.arrivals.types = {"t1", "t2"};
  for (int j = 1; j <= m; ++j)
    inst.arrivals.type_probs.push_back(j <= c ? std::vector<double>{1.0, 0.0}
                                              : std::vector<double>{0.0, 1.0});
  Action serve;
  serve.id = "serve";
  add_use(serve, 0, 1.0, 1.0, {ReleaseKind::Never, 0, 0.0});
  add_reward(serve, 0, 0, RewardKind::Deterministic, 1.0);
  add_reward(serve, 1, 0, RewardKind::Deterministic, 2.0);
  inst.actions = {serve, make_trivial()};
  return inst;
}

Instance gen_hard(const GeneratorParams& p, const std::string& variant) {
  Instance inst = hard_base(p);
  double gamma = p.gamma > 0 ? p.gamma : 1.0;
  int c = pos_int(p.c > 0 ? p.c : 4, "hard-instance c");
  double lump = gamma * c;
  if (variant == "HardG") {
    inst.replenishment.mode = ReplenishmentMode::Stochastic;
  } else if (variant == "HardGS") {
    inst.replenishment.mode = ReplenishmentMode::Stochastic;
    inst.replenishment.bound_M = lump;
    inst.replenishment.entries = {{0, c + 1, lump, lump / 2.0}};
  } else if (variant == "HardG1") {
    inst.replenishment.mode = ReplenishmentMode::Adversarial;
  } else {  // HardG2
    inst.replenishment.mode = ReplenishmentMode::Adversarial;
    inst.replenishment.bound_M = lump;
    inst.replenishment.fixed = {{0, c + 1, lump}};
  }
  return inst;
}

}  // namespace

std::vector<std::string> known_families() {
  return {"BMatching",     "Adwords",          "StochasticRewards", "Assortment",
          "Hypergraph",    "ReusableMatching", "UpperTriangular",   "AppendixExample1",
          "AppendixExample2", "HardG",         "HardGS",            "HardG1",
          "HardG2"};
}

Instance generate(const GeneratorParams& params) {
  const std::string& f = params.family;
  Instance inst;
  if (f == "BMatching")
    inst = gen_b_matching(params);
  else if (f == "Adwords")
    inst = gen_adwords(params);
  else if (f == "StochasticRewards")
    inst = gen_stochastic_rewards(params);
  else if (f == "Assortment")
    inst = gen_assortment(params);
  else if (f == "Hypergraph")
    inst = gen_hypergraph(params);
  else if (f == "ReusableMatching")
    inst = gen_reusable_matching(params);
  else if (f == "UpperTriangular")
    inst = gen_upper_triangular(params);
  else if (f == "AppendixExample1")
    inst = gen_appendix_example1(params);
  else if (f == "AppendixExample2")
    inst = gen_appendix_example2(params);
  else if (f == "HardG" || f == "HardGS" || f == "HardG1" || f == "HardG2")
    inst = gen_hard(params, f);
  else {
    std::string names;
    for (const auto& k : known_families()) names += (names.empty() ? "" : ", ") + k;
    fail("unknown family '" + f + "' (known: " + names + ")");
  }
  inst.validate();
  return inst;
}

}  // namespace replsim
