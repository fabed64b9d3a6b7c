#include "replsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "replsim/algorithms.hpp"
#include "replsim/batching.hpp"
#include "replsim/engine.hpp"
#include "replsim/lp.hpp"
#include "replsim/oracle.hpp"
#include "replsim/rounding.hpp"

namespace replsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("experiment: " + msg);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(uint64_t seed) : eng(seed) {}
  double real() { return (eng() >> 11) * 0x1.0p-53; }
  int range(int lo, int hi) {
    return lo + static_cast<int>(eng() % static_cast<uint64_t>(hi - lo + 1));
  }
  bool coin(double p) { return real() < p; }
};

// ---------------------------------------------------------------------------
// experiment runs

ExperimentConfig::Wrapper parse_wrapper(const std::string& s) {
  if (s == "none") return ExperimentConfig::Wrapper::None;
  if (s == "batch_adversarial") return ExperimentConfig::Wrapper::BatchAdversarial;
  if (s == "batch_stochastic") return ExperimentConfig::Wrapper::BatchStochastic;
  fail("unknown wrapper '" + s + "' (none, batch_adversarial, batch_stochastic)");
}

ExperimentConfig::Benchmark parse_benchmark(const std::string& s) {
  if (s == "lp") return ExperimentConfig::Benchmark::LP;
  if (s == "exact") return ExperimentConfig::Benchmark::ExactOpt;
  if (s == "both") return ExperimentConfig::Benchmark::Both;
  fail("unknown benchmark '" + s + "' (lp, exact, both)");
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const ExperimentConfig& base) {
  json o;
  try {
    o = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!o.is_object()) fail("config must be a JSON object");
  const std::vector<std::string> known = {
      "instance", "family", "n",       "m",       "c",     "d",     "gamma",
      "seed",     "algorithm", "wrapper", "benchmark", "trials", "threads", "sweep"};
  for (auto it = o.begin(); it != o.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      fail("unknown config field '" + it.key() + "'");

  ExperimentConfig cfg = base;
  auto num = [&](const char* k) -> double {
    if (!o[k].is_number()) fail(std::string("config field '") + k + "' must be a number");
    return o[k].get<double>();
  };
  auto str = [&](const char* k) -> std::string {
    if (!o[k].is_string()) fail(std::string("config field '") + k + "' must be a string");
    return o[k].get<std::string>();
  };
  if (o.contains("instance")) cfg.instance_file = str("instance");
  if (o.contains("family")) cfg.gen.family = str("family");
  if (o.contains("n")) cfg.gen.n = static_cast<int>(num("n"));
  if (o.contains("m")) cfg.gen.m = static_cast<int>(num("m"));
  if (o.contains("c")) cfg.gen.c = num("c");
  if (o.contains("d")) cfg.gen.d = static_cast<int>(num("d"));
  if (o.contains("gamma")) cfg.gen.gamma = num("gamma");
  if (o.contains("seed")) {
    cfg.gen.seed = static_cast<uint64_t>(num("seed"));
    cfg.seed = cfg.gen.seed;
  }
  if (o.contains("algorithm")) cfg.algorithm = str("algorithm");
  if (o.contains("wrapper")) cfg.wrapper = parse_wrapper(str("wrapper"));
  if (o.contains("benchmark")) cfg.benchmark = parse_benchmark(str("benchmark"));
  if (o.contains("trials")) cfg.trials = static_cast<int>(num("trials"));
  if (o.contains("threads")) cfg.threads = static_cast<int>(num("threads"));
  if (o.contains("sweep")) {
    if (!o["sweep"].is_array()) fail("config field 'sweep' must be an array");
    cfg.sweep.clear();
    for (const auto& v : o["sweep"]) {
      if (!v.is_number()) fail("sweep entries must be numbers");
      cfg.sweep.push_back(v.get<double>());
    }
  }
  return cfg;
}

namespace {

Instance experiment_instance(const ExperimentConfig& cfg, double c_value, bool swept) {
  if (!cfg.instance_file.empty()) {
    std::ifstream in(cfg.instance_file);
    if (!in) fail("cannot open instance file '" + cfg.instance_file + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return Instance::load(ss.str());
  }
  if (cfg.gen.family.empty()) fail("config needs an instance file or a generator family");
  GeneratorParams p = cfg.gen;
  if (swept) p.c = c_value;
  return generate(p);
}

PolicyFactory wrapped_factory(const ExperimentConfig& cfg, const std::string& algorithm) {
  PolicyFactory base = make_policy_factory(algorithm);
  switch (cfg.wrapper) {
    case ExperimentConfig::Wrapper::None:
      return base;
    case ExperimentConfig::Wrapper::BatchAdversarial:
      return [base] { return wrap_adversarial(base()); };
    case ExperimentConfig::Wrapper::BatchStochastic:
      return [base] { return wrap_stochastic(base()); };
  }
  fail("unreachable wrapper state");
}

}  // namespace

std::string run_experiment(const ExperimentConfig& cfg) {
  if (!cfg.instance_file.empty() && !cfg.gen.family.empty())
    fail("give either an instance file or a generator family, not both");
  if (!cfg.sweep.empty() && cfg.instance_file.empty() && cfg.gen.family.empty())
    fail("a capacity sweep needs a generator family");
  if (!cfg.sweep.empty() && !cfg.instance_file.empty())
    fail("a capacity sweep needs a generator family, not a fixed instance file");
  if (cfg.trials < 1) fail("trials must be >= 1");

  std::vector<double> cs = cfg.sweep;
  bool swept = !cs.empty();
  if (!swept) cs.push_back(0.0);

  std::string out = "c,alg_mean,alg_se,lp_value,exact_opt,ratio,fallback_rate\n";
  for (double c : cs) {
    Instance inst = experiment_instance(cfg, c, swept);
    double c_col = swept ? c : inst.c_min;

    if (cfg.wrapper == ExperimentConfig::Wrapper::BatchStochastic &&
        inst.replenishment.mode == ReplenishmentMode::Adversarial)
      throw IncompatibleError(
          "stochastic batching requires a stochastic replenishment process; under "
          "adversarial replenishment no transformation to the fixed-inventory setting "
          "preserves performance, so this pairing is refused");

    std::string algorithm = cfg.algorithm;
    if (algorithm.size() >= 3 && algorithm.compare(algorithm.size() - 3, 3, "x=c") == 0)
      algorithm = algorithm.substr(0, algorithm.size() - 1) + fmt(inst.c_min);

    PerfOptions popt;
    popt.trials = cfg.trials;
    popt.seed = cfg.seed;
    popt.threads = cfg.threads;
    PerfResult perf = expected_performance(inst, wrapped_factory(cfg, algorithm), popt);

    std::string lp_cell, exact_cell, ratio_cell;
    double denom = 0.0;
    if (cfg.benchmark != ExperimentConfig::Benchmark::ExactOpt) {
      double v = solve_lp(build_lp(inst)).value;
      lp_cell = fmt(v);
      denom = v;
    }
    if (cfg.benchmark != ExperimentConfig::Benchmark::LP) {
      try {
        double v = exact_opt(inst);
        exact_cell = fmt(v);
        denom = v;
      } catch (const IncompatibleError&) {
        if (cfg.benchmark == ExperimentConfig::Benchmark::ExactOpt) throw;
      }
    }
    if (denom > 0.0) ratio_cell = fmt(perf.mean / denom);

    out += fmt(c_col) + "," + fmt(perf.mean) + "," + fmt(perf.se) + "," + lp_cell + "," +
           exact_cell + "," + ratio_cell + "," + fmt(perf.fallback_rate) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// shared helpers for the property suites

namespace {

void add_check(std::vector<CheckResult>& out, const std::string& name, bool pass,
               const std::string& detail) {
  out.push_back({name, pass, detail});
}

Resource mk_res(const std::string& id, double inv) {
  Resource r;
  r.id = id;
  r.initial_inventory = inv;
  return r;
}

Action mk_trivial() {
  Action a;
  a.id = "k0";
  return a;
}

void use(Action& a, int resource, double peak, double success, ReleaseDist rel) {
  a.uses.push_back({resource, {peak, success, rel}});
}

void reward(Action& a, int type, int resource, RewardKind kind, double value) {
  RewardEntry e;
  e.type = type;
  e.resource = resource;
  e.kind = kind;
  e.value = value;
  a.rewards.push_back(e);
}

std::vector<double> prob_row(Rng& rng, int k) {
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

std::vector<double> one_hot_row(int k, int z) {
  std::vector<double> row(k, 0.0);
  row[z] = 1.0;
  return row;
}

// Small deterministic-consumption instance the exact oracle accepts, with the
// joint enumeration cost kept low by resampling oversized draws.
Instance rnd_oracle_instance(Rng& rng) {
  while (true) {
    int n = rng.range(1, 3);
    int m = rng.range(2, 6);
    int k_types = std::min(rng.range(1, 3), m);
    int n_actions = rng.range(1, 3);
    bool adv_arrivals = rng.coin(0.5);

    Instance inst;
    for (int i = 0; i < n; ++i)
      inst.resources.push_back(mk_res("r" + std::to_string(i + 1), 1.0 + rng.range(0, 3)));

    inst.arrivals.horizon = m;
    double branches = 1.0;
    if (adv_arrivals) {
      inst.arrivals.mode = ArrivalMode::Adversarial;
      for (int j = 0; j < m; ++j) {
        int z = j < k_types ? j : rng.range(0, k_types - 1);
        inst.arrivals.types.push_back("z" + std::to_string(z + 1));
      }
    } else {
      inst.arrivals.mode = ArrivalMode::Stochastic;
      for (int z = 0; z < k_types; ++z)
        inst.arrivals.types.push_back("z" + std::to_string(z + 1));
      for (int j = 0; j < m; ++j) {
        if (rng.coin(0.5)) {
          inst.arrivals.type_probs.push_back(one_hot_row(k_types, rng.range(0, k_types - 1)));
        } else {
          inst.arrivals.type_probs.push_back(prob_row(rng, k_types));
          branches *= k_types;
        }
      }
    }

    const double peaks[3] = {0.3, 0.5, 1.0};
    for (int a = 0; a < n_actions; ++a) {
      Action act;
      act.id = "a" + std::to_string(a + 1);
      int uses = rng.range(1, std::min(2, n));
      std::vector<int> order(n);
      for (int i = 0; i < n; ++i) order[i] = i;
      for (int u = 0; u < uses; ++u) std::swap(order[u], order[rng.range(u, n - 1)]);
      for (int u = 0; u < uses; ++u) {
        ReleaseDist rel{ReleaseKind::Never, 0, 0.0};
        if (rng.coin(0.3)) rel = {ReleaseKind::AfterSteps, rng.range(1, 2), 0.0};
        use(act, order[u], peaks[rng.range(0, 2)], 1.0, rel);
      }
      bool any = false;
      for (int z = 0; z < k_types; ++z)
        for (int i = 0; i < n; ++i)
          if (rng.coin(0.4)) {
            reward(act, z, i, RewardKind::Deterministic, 0.5 * rng.range(1, 4));
            any = true;
          }
      if (!any) reward(act, 0, 0, RewardKind::Deterministic, 1.0);
      inst.actions.push_back(act);
    }
    inst.actions.push_back(mk_trivial());

    int coins = 0;
    if (rng.coin(0.5)) {
      inst.replenishment.mode = ReplenishmentMode::Adversarial;
      inst.replenishment.bound_M = 2.0;
      for (int i = 0; i < n; ++i)
        for (int j = 1; j <= m; ++j)
          if (rng.coin(0.3))
            inst.replenishment.fixed.push_back({i, j, 0.5 * rng.range(1, 4)});
    } else {
      inst.replenishment.mode = ReplenishmentMode::Stochastic;
      inst.replenishment.bound_M = 2.0;
      for (int i = 0; i < n; ++i)
        for (int j = 1; j <= m; ++j)
          if (rng.coin(0.25) && coins < 6) {
            if (rng.coin(0.4)) {
              inst.replenishment.entries.push_back({i, j, 1.5, 1.5});  // deterministic
            } else {
              inst.replenishment.entries.push_back({i, j, 2.0, 1.0});
              ++coins;
            }
          }
    }
    inst.validate();

    double masks = std::pow(2.0, coins);
    double seq = n == 1 ? 200.0 : std::pow(inst.actions.size(), m);
    if (branches * masks > 4096.0 || branches * masks * seq > 3e5) continue;
    return inst;
  }
}

// Adversarial-everything instance with single-resource actions, suitable for
// both greedy and inventory-balancing bases and for the batching wrappers.
Instance rnd_coupling_instance(Rng& rng, bool with_replenishment) {
  int n = rng.range(1, 3);
  int m = rng.range(10, 30);
  int k_types = std::min(rng.range(2, 4), m);

  Instance inst;
  for (int i = 0; i < n; ++i)
    inst.resources.push_back(mk_res("r" + std::to_string(i + 1), 2.0 + rng.range(0, 7)));

  inst.arrivals.mode = ArrivalMode::Adversarial;
  inst.arrivals.horizon = m;
  for (int j = 0; j < m; ++j) {
    int z = j < k_types ? j : rng.range(0, k_types - 1);
    inst.arrivals.types.push_back("z" + std::to_string(z + 1));
  }

  for (int i = 0; i < n; ++i) {
    Action act;
    act.id = "a" + std::to_string(i + 1);
    double s = rng.coin(0.3) ? 0.6 : 1.0;
    ReleaseDist rel{ReleaseKind::Never, 0, 0.0};
    int kind = rng.range(0, 2);
    if (kind == 1) rel = {ReleaseKind::AfterSteps, rng.range(1, 3), 0.0};
    if (kind == 2) rel = {ReleaseKind::Geometric, 0, 0.4};
    use(act, i, 1.0, s, rel);
    bool coupled = s < 1.0 && rng.coin(0.5);
    for (int z = 0; z < k_types; ++z)
      if (rng.coin(0.6))
        for (int r = 0; r < n; ++r)
          reward(act, z, r,
                 coupled ? RewardKind::CoupledToConsumption : RewardKind::Deterministic,
                 0.5 * rng.range(1, 4));
    if (act.rewards.empty()) reward(act, 0, i, RewardKind::Deterministic, 1.0);
    inst.actions.push_back(act);
  }
  inst.actions.push_back(mk_trivial());

  inst.replenishment.mode = ReplenishmentMode::Adversarial;
  if (with_replenishment) {
    inst.replenishment.bound_M = 3.0;
    for (int i = 0; i < n; ++i)
      for (int j = 2; j <= m; ++j)
        if (rng.coin(0.4))
          inst.replenishment.fixed.push_back({i, j, 0.3 + 2.7 * rng.real()});
  }
  inst.validate();
  return inst;
}

// Stochastic-everything analogue, zero replenishment unless asked otherwise.
Instance rnd_stochastic_instance(Rng& rng, bool with_replenishment) {
  int n = rng.range(1, 3);
  int m = rng.range(8, 24);
  int k_types = rng.range(2, 3);

  Instance inst;
  for (int i = 0; i < n; ++i)
    inst.resources.push_back(mk_res("r" + std::to_string(i + 1), 2.0 + rng.range(0, 6)));

  inst.arrivals.mode = ArrivalMode::Stochastic;
  inst.arrivals.horizon = m;
  for (int z = 0; z < k_types; ++z) inst.arrivals.types.push_back("z" + std::to_string(z + 1));
  for (int j = 0; j < m; ++j) inst.arrivals.type_probs.push_back(prob_row(rng, k_types));

  for (int i = 0; i < n; ++i) {
    Action act;
    act.id = "a" + std::to_string(i + 1);
    double s = rng.coin(0.4) ? 0.7 : 1.0;
    use(act, i, 1.0, s, {ReleaseKind::Never, 0, 0.0});
    for (int z = 0; z < k_types; ++z)
      if (rng.coin(0.7))
        for (int r = 0; r < n; ++r)
          reward(act, z, r, RewardKind::Deterministic, 0.5 * rng.range(1, 4));
    if (act.rewards.empty()) reward(act, 0, i, RewardKind::Deterministic, 1.0);
    inst.actions.push_back(act);
  }
  inst.actions.push_back(mk_trivial());

  inst.replenishment.mode = ReplenishmentMode::Stochastic;
  if (with_replenishment) {
    inst.replenishment.bound_M = 1.0;
    for (int i = 0; i < n; ++i)
      for (int j = 2; j <= m; ++j)
        if (rng.coin(0.4)) inst.replenishment.entries.push_back({i, j, 1.0, 0.5});
  }
  inst.validate();
  return inst;
}

bool same_run(const RunResult& a, const RunResult& b) {
  if (a.trace.size() != b.trace.size()) return false;
  for (size_t i = 0; i < a.trace.size(); ++i) {
    const TraceStep &x = a.trace[i], &y = b.trace[i];
    if (x.type != y.type || x.chosen != y.chosen || x.reward != y.reward) return false;
  }
  return a.objective == b.objective && a.resource_totals == b.resource_totals;
}

// ---------------------------------------------------------------------------
// suites

std::vector<CheckResult> suite_sandwich() {
  std::vector<CheckResult> out;
  Rng rng(42);
  int bad_prefix = 0, bad_lump = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int n = rng.range(1, 5);
    int m = rng.range(1, 200);
    double threshold = 1.0 + 19.0 * rng.real();
    BatchState state(n, threshold);
    std::vector<double> raw(n, 0.0), emitted(n, 0.0);
    for (int j = 1; j <= m; ++j)
      for (int i = 0; i < n; ++i) {
        double amt = rng.coin(0.5) ? 0.0 : 3.0 * rng.real();
        raw[i] += amt;
        double lump = state.step(i, amt);
        if (lump > 0.0 && lump < threshold - 1e-12) ++bad_lump;
        emitted[i] += lump;
        double gap = raw[i] - emitted[i];
        if (gap < -1e-9 || gap > threshold + 1e-9) ++bad_prefix;
      }
  }
  add_check(out, "sandwich prefix bounds", bad_prefix == 0,
            "violations=" + std::to_string(bad_prefix) + " over 1000 processes");
  add_check(out, "batch size floor", bad_lump == 0,
            "undersized lumps=" + std::to_string(bad_lump));
  return out;
}

std::vector<CheckResult> suite_lemma41() {
  std::vector<CheckResult> out;
  Rng rng(7);
  int failures = 0;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    Instance inst = rnd_oracle_instance(rng);
    double lp = solve_lp(build_lp(inst)).value;
    double opt = exact_opt(inst);
    double gap = opt - lp;  // positive means the bound failed
    worst = std::max(worst, gap);
    if (gap > 1e-6) ++failures;
  }
  add_check(out, "offline bound dominates exact optimum", failures == 0,
            "failures=" + std::to_string(failures) + " worst opt-lp=" + fmt(worst));
  return out;
}

std::vector<CheckResult> suite_coupling() {
  std::vector<CheckResult> out;
  Rng rng(11);
  int mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    Instance inst = rnd_coupling_instance(rng, true);
    for (int base = 0; base < 2; ++base) {
      auto mk = [&]() -> std::unique_ptr<Policy> {
        return base == 0 ? make_greedy() : make_inventory_balancing();
      };
      RunOptions opt;
      opt.seed = 900 + t;
      auto wrapped = wrap_adversarial(mk());
      RunResult online = run(inst, *wrapped, opt);
      BatchedInstance hb = build_batched_instance_adversarial(inst);
      auto direct_policy = mk();
      RunResult direct = run(hb.instance, *direct_policy, opt);
      if (!same_run(online, direct)) ++mismatches;
    }
  }
  add_check(out, "online batching equals the offline batched run", mismatches == 0,
            "mismatched runs=" + std::to_string(mismatches) + " of 200");
  return out;
}

std::vector<CheckResult> suite_lemma42() {
  std::vector<CheckResult> out;
  Rng rng(13);
  int failures = 0;
  double worst_margin = 1e18;
  for (int t = 0; t < 50; ++t) {
    int n = rng.range(1, 2);
    int m = rng.range(40, 80);
    int k_types = rng.range(1, 3);
    double c = 50.0 + rng.range(0, 550);

    Instance inst;
    for (int i = 0; i < n; ++i)
      inst.resources.push_back(mk_res("r" + std::to_string(i + 1), c + rng.range(0, 10)));
    inst.arrivals.mode = ArrivalMode::Stochastic;
    inst.arrivals.horizon = m;
    for (int z = 0; z < k_types; ++z)
      inst.arrivals.types.push_back("z" + std::to_string(z + 1));
    for (int j = 0; j < m; ++j) inst.arrivals.type_probs.push_back(prob_row(rng, k_types));
    int n_actions = rng.range(1, 3);
    for (int a = 0; a < n_actions; ++a) {
      Action act;
      act.id = "a" + std::to_string(a + 1);
      use(act, rng.range(0, n - 1), 1.0, 1.0, {ReleaseKind::Never, 0, 0.0});
      for (int z = 0; z < k_types; ++z)
        if (rng.coin(0.7))
          for (int r = 0; r < n; ++r)
            reward(act, z, r, RewardKind::Deterministic, 0.5 * rng.range(1, 4));
      if (act.rewards.empty()) reward(act, 0, 0, RewardKind::Deterministic, 1.0);
      inst.actions.push_back(act);
    }
    inst.actions.push_back(mk_trivial());
    inst.replenishment.mode = ReplenishmentMode::Adversarial;
    if (rng.coin(0.5)) {
      inst.replenishment.bound_M = 2.0;
      for (int i = 0; i < n; ++i)
        for (int j = 2; j <= m; ++j)
          if (rng.coin(0.3)) inst.replenishment.fixed.push_back({i, j, 2.0 * rng.real()});
    }
    inst.validate();

    LpModel model = build_lp(inst);
    LpSolution sol = solve_lp(model);
    double delta = default_rounding_delta(inst);
    PerfOptions popt;
    popt.trials = 10000;
    popt.seed = 500 + t;
    popt.threads = 4;
    PerfResult perf = expected_performance(
        inst, [&] { return make_attenuated_rounding(inst, model, sol, delta); }, popt);
    double floor_value = (1.0 - 3.0 * delta) * sol.value;
    worst_margin = std::min(worst_margin, perf.mean - floor_value);
    if (perf.mean < floor_value - 1e-9) ++failures;
  }
  add_check(out, "attenuated rounding clears the discounted bound", failures == 0,
            "failures=" + std::to_string(failures) + " worst margin=" + fmt(worst_margin));
  return out;
}

std::vector<CheckResult> suite_chernoff() {
  std::vector<CheckResult> out;

  {  // degenerate: nothing can ever realize
    std::vector<TwoPoint> vars(30, {0.6, 0.0});
    ChernoffResult r = chernoff_check(vars, 5.0, 0.5, 20000, 3);
    add_check(out, "zero-probability tail is empty", r.tail == 0.0, "tail=" + fmt(r.tail));
  }

  {  // unit coins: the tail has an exact binomial value
    std::vector<TwoPoint> vars(100, {1.0, 0.45});
    ChernoffResult r = chernoff_check(vars, 50.0, 1.0 / 9.0, 100000, 4);
    double closed_bound = std::exp(-50.0 / 243.0);
    add_check(out, "closed-form bound value", std::fabs(r.bound - closed_bound) < 1e-15,
              "bound=" + fmt(r.bound));

    // independent tail oracle: pmf recurrence in extended precision
    long double pmf = std::pow(0.55L, 100);
    long double tail = 0.0L;
    for (int k = 0; k <= 100; ++k) {
      if (k >= 50) tail += pmf;
      pmf *= (100.0L - k) / (k + 1.0L) * (0.45L / 0.55L);
    }
    double exact = static_cast<double>(tail);
    double viaf = binomial_upper_tail(100, 0.45, 50);
    add_check(out, "binomial tail matches the recurrence", std::fabs(viaf - exact) < 1e-12,
              "lgamma=" + fmt(viaf) + " recurrence=" + fmt(exact));
    add_check(out, "binomial example respects the bound", r.tail <= r.bound + 3.0 * r.se,
              "tail=" + fmt(r.tail) + " bound=" + fmt(r.bound));
    add_check(out, "sampler agrees with the exact tail",
              std::fabs(r.tail - exact) <= 5.0 * std::sqrt(exact * (1 - exact) / 100000.0),
              "tail=" + fmt(r.tail) + " exact=" + fmt(exact));
  }

  {  // fractional coins
    std::vector<TwoPoint> vars(200, {0.5, 0.4});
    ChernoffResult r = chernoff_check(vars, 48.0, 0.2, 100000, 5);
    add_check(out, "fractional-coin bound value",
              std::fabs(r.bound - std::exp(-0.64)) < 1e-15, "bound=" + fmt(r.bound));
    add_check(out, "fractional example respects the bound", r.tail <= r.bound + 3.0 * r.se,
              "tail=" + fmt(r.tail) + " bound=" + fmt(r.bound));
  }
  return out;
}

// One resource family heavy in late replenishment plus a two-resource drip
// family; in both, the per-request chance that the real inventory cannot
// cover a planned action must stay under 1/c_min.
std::vector<CheckResult> suite_fallback() {
  std::vector<CheckResult> out;
  const double cs[2] = {200.0, 1000.0};
  const double ratios[2] = {0.01, 0.05};

  for (double c : cs)
    for (double ratio : ratios) {
      double m_bound = ratio * c;
      {
        GeneratorParams p;
        p.family = "HardGS";
        p.c = c;
        p.gamma = ratio;
        Instance inst = generate(p);
        PerfOptions popt;
        popt.trials = 10000;
        popt.seed = 17;
        popt.threads = 4;
        PerfResult perf = expected_performance(
            inst, [] { return wrap_stochastic(make_greedy()); }, popt);
        bool ok = perf.fallback_rate <= 1.0 / c + 3.0 * perf.fallback_se + 1e-12;
        add_check(out,
                  "single-lump family c=" + fmt(c) + " M/c=" + fmt(ratio), ok,
                  "rate=" + fmt(perf.fallback_rate) + " cap=" + fmt(1.0 / c));
      }
      {
        int m = c <= 200 ? (ratio <= 0.01 ? 600 : 1400) : (ratio <= 0.01 ? 700 : 300);
        Instance inst;
        inst.resources.push_back(mk_res("r1", c));
        inst.resources.push_back(mk_res("r2", c));
        inst.arrivals.mode = ArrivalMode::Stochastic;
        inst.arrivals.horizon = m;
        inst.arrivals.types = {"z1"};
        for (int j = 0; j < m; ++j) inst.arrivals.type_probs.push_back({1.0});
        Action both;
        both.id = "b12";
        use(both, 0, 1.0, 1.0, {ReleaseKind::Never, 0, 0.0});
        use(both, 1, 1.0, 1.0, {ReleaseKind::Never, 0, 0.0});
        reward(both, 0, 0, RewardKind::Deterministic, 1.2);
        reward(both, 0, 1, RewardKind::Deterministic, 1.2);
        Action one;
        one.id = "m1";
        use(one, 0, 1.0, 1.0, {ReleaseKind::Never, 0, 0.0});
        reward(one, 0, 0, RewardKind::Deterministic, 1.0);
        inst.actions = {both, one, mk_trivial()};
        inst.replenishment.mode = ReplenishmentMode::Stochastic;
        inst.replenishment.bound_M = m_bound;
        for (int i = 0; i < 2; ++i)
          for (int j = 1; j <= m; ++j)
            inst.replenishment.entries.push_back({i, j, m_bound, m_bound / 2.0});
        inst.validate();

        PerfOptions popt;
        popt.trials = 10000;
        popt.seed = 19;
        popt.threads = 4;
        PerfResult perf = expected_performance(
            inst, [] { return wrap_stochastic(make_greedy()); }, popt);
        bool ok = perf.fallback_rate <= 1.0 / c + 3.0 * perf.fallback_se + 1e-12;
        add_check(out, "drip family c=" + fmt(c) + " M/c=" + fmt(ratio), ok,
                  "rate=" + fmt(perf.fallback_rate) + " cap=" + fmt(1.0 / c));
      }
    }
  return out;
}

std::vector<CheckResult> suite_hard_instance() {
  std::vector<CheckResult> out;
  for (double gamma : {0.5, 1.0})
    for (double c : {4.0, 8.0, 16.0}) {
      GeneratorParams p;
      p.family = "HardGS";
      p.c = c;
      p.gamma = gamma;
      Instance inst = generate(p);

      double opt = exact_opt(inst);
      double opt_target = (1.0 + 1.5 * gamma) * c;
      add_check(out, "clairvoyant value gamma=" + fmt(gamma) + " c=" + fmt(c),
                std::fabs(opt - opt_target) < 1e-9,
                "opt=" + fmt(opt) + " target=" + fmt(opt_target));

      double best = 0.0;
      for (int t = 0; t <= 20; ++t) {
        double x = c * t / 20.0;
        double v = exact_expected_objective(
            inst, make_policy_factory("fixed_split:x=" + fmt(x)));
        best = std::max(best, v);
      }
      double online_target = (1.0 + gamma) * c;
      add_check(out, "best split value gamma=" + fmt(gamma) + " c=" + fmt(c),
                std::fabs(best - online_target) < 1e-9,
                "best=" + fmt(best) + " target=" + fmt(online_target));

      double ratio = best / opt;
      double ratio_target = (2.0 + 2.0 * gamma) / (2.0 + 3.0 * gamma);
      add_check(out, "ratio gamma=" + fmt(gamma) + " c=" + fmt(c),
                std::fabs(ratio - ratio_target) < 1e-9,
                "ratio=" + fmt(ratio) + " target=" + fmt(ratio_target));
    }
  return out;
}

}  // namespace

std::vector<std::string> known_suites() {
  return {"sandwich", "coupling", "lemma41", "lemma42", "chernoff", "fallback",
          "hard_instance"};
}

std::vector<CheckResult> verify_suite(const std::string& suite) {
  if (suite == "sandwich") return suite_sandwich();
  if (suite == "coupling") return suite_coupling();
  if (suite == "lemma41") return suite_lemma41();
  if (suite == "lemma42") return suite_lemma42();
  if (suite == "chernoff") return suite_chernoff();
  if (suite == "fallback") return suite_fallback();
  if (suite == "hard_instance") return suite_hard_instance();
  std::string names;
  for (const auto& s : known_suites()) names += (names.empty() ? "" : ", ") + s;
  fail("unknown suite '" + suite + "' (known: " + names + ")");
}

std::vector<CheckResult> check_trend() {
  std::vector<CheckResult> out;
  std::vector<double> ratios;
  for (double c : {25.0, 100.0, 400.0, 1600.0}) {
    GeneratorParams p;
    p.family = "Adwords";
    p.c = c;
    p.seed = 7;
    Instance inst = generate(p);
    double lp = solve_lp(build_lp(inst)).value;
    PerfOptions popt;
    popt.trials = 1;  // the instance and both policies are deterministic
    popt.seed = 11;
    PerfResult perf = expected_performance(
        inst, [] { return wrap_adversarial(make_inventory_balancing()); }, popt);
    ratios.push_back(perf.mean / lp);
  }
  bool monotone = true;
  for (size_t i = 1; i < ratios.size(); ++i)
    if (ratios[i] < ratios[i - 1] - 1e-9) monotone = false;
  std::string shown;
  for (double r : ratios) shown += (shown.empty() ? "" : " ") + fmt(r);
  add_check(out, "ratio non-decreasing in starting inventory", monotone, shown);
  add_check(out, "large-inventory ratio at 1600", ratios.back() >= 0.55, shown);
  return out;
}

std::vector<CheckResult> check_appendix_fixtures() {
  std::vector<CheckResult> out;

  {  // two-request adversarial walk-through
    GeneratorParams p;
    p.family = "AppendixExample1";
    Instance inst = generate(p);
    BatchAdversarial wrapper(make_greedy());
    RunOptions opt;
    opt.seed = 1;
    run(inst, wrapper, opt);

    auto sorted = [](std::vector<std::string> v) {
      std::sort(v.begin(), v.end());
      return v;
    };
    const auto& hist = wrapper.action_set_history();
    std::vector<std::string> k1 = {"KA", "KAB", "KAB@B@1", "KB", "KB@B@1", "k0"};
    std::vector<std::string> k2 = {"KA",       "KA@A@2",      "KAB",
                                   "KAB@A@2",  "KAB@B@1",     "KAB@B@1@A@2",
                                   "KB",       "KB@B@1",      "k0"};
    bool ok1 = hist.size() >= 2 && sorted(hist[0]) == k1;
    bool ok2 = hist.size() >= 2 && sorted(hist[1]) == k2;
    add_check(out, "first-request action set", ok1,
              "got " + std::to_string(hist.empty() ? 0 : hist[0].size()) + " actions");
    add_check(out, "second-request action set", ok2,
              "got " + std::to_string(hist.size() < 2 ? 0 : hist[1].size()) + " actions");

    const Instance& virt = wrapper.virtual_instance();
    int b1 = virt.resource_index("B@1"), a2 = virt.resource_index("A@2");
    bool inv_ok = b1 >= 0 && a2 >= 0 &&
                  virt.resources[b1].initial_inventory == 10.0 &&
                  virt.resources[a2].initial_inventory == 11.0;
    add_check(out, "lump inventories", inv_ok, "expected 10 and 11");
  }

  {  // one-request stochastic fixture at the worked discount
    GeneratorParams p;
    p.family = "AppendixExample2";
    Instance inst = generate(p);
    BatchedInstance hb = build_batched_instance_stochastic(inst, 0.03);
    int a1 = hb.instance.resource_index("A@1"), b1 = hb.instance.resource_index("B@1");
    bool inv_ok = a1 >= 0 && b1 >= 0 &&
                  std::fabs(hb.instance.resources[a1].initial_inventory - 4.85) < 1e-12 &&
                  std::fabs(hb.instance.resources[b1].initial_inventory - 4.85) < 1e-12;
    add_check(out, "fluid lump inventories", inv_ok, "expected 4.85 twice");
    add_check(out, "expanded action count", hb.instance.num_actions() == 9,
              "got " + std::to_string(hb.instance.num_actions()));

    int implemented = 0, total = 0;
    for (double za : {0.0, 10.0})
      for (double zb : {0.0, 10.0}) {
        std::vector<std::vector<double>> forced = {{za}, {zb}};
        BatchStochastic wrapper(make_greedy(), 0.03);
        RunOptions opt;
        opt.seed = 2;
        opt.forced_replenishment = &forced;
        RunResult res = run(inst, wrapper, opt);
        ++total;
        if (!res.trace[0].fallback) {
          ++implemented;
          if (res.trace[0].implemented != "KAB") implemented = 100;  // poison
        }
      }
    add_check(out, "implementation probability one quarter",
              implemented == 1 && total == 4,
              "implemented in " + std::to_string(implemented) + " of 4 outcomes");
  }
  return out;
}

std::vector<CheckResult> check_identity_degeneration() {
  std::vector<CheckResult> out;
  Rng rng(23);
  int mismatch = 0;
  for (int t = 0; t < 25; ++t) {
    Instance inst = rnd_coupling_instance(rng, false);
    RunOptions opt;
    opt.seed = 300 + t;
    auto wrapped = wrap_adversarial(make_greedy());
    auto plain = make_greedy();
    RunResult a = run(inst, *wrapped, opt);
    RunResult b = run(inst, *plain, opt);
    if (a.to_json() != b.to_json()) ++mismatch;
  }
  add_check(out, "adversarial wrapper collapses without replenishment", mismatch == 0,
            "mismatches=" + std::to_string(mismatch) + " of 25");

  mismatch = 0;
  for (int t = 0; t < 25; ++t) {
    Instance inst = rnd_stochastic_instance(rng, false);
    RunOptions opt;
    opt.seed = 600 + t;
    auto wrapped = wrap_stochastic(make_greedy());
    auto plain = make_greedy();
    RunResult a = run(inst, *wrapped, opt);
    RunResult b = run(inst, *plain, opt);
    if (a.to_json() != b.to_json()) ++mismatch;
  }
  add_check(out, "fluid wrapper collapses without replenishment", mismatch == 0,
            "mismatches=" + std::to_string(mismatch) + " of 25");
  return out;
}

}  // namespace replsim
