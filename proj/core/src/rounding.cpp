#include "replsim/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace replsim {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("rounding: " + msg);
}

class AttenuatedRounding final : public Policy {
 public:
  AttenuatedRounding(const Instance& inst, const LpModel& model, const LpSolution& sol,
                     double delta) {
    if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0, 1)");
    if (sol.x.size() != model.objective.size()) fail("solution does not match the model");
    for (size_t v = 0; v < model.vars.size(); ++v) {
      const LpVar& var = model.vars[v];
      double x = std::max(0.0, sol.x[1 + v]);
      if (x == 0.0) continue;
      double p = inst.type_prob(var.request, var.type);
      if (p <= 0.0) fail("solution mass on a zero-probability type");
      table_[{var.request, var.type}].push_back({var.action, x / ((1.0 + delta) * p)});
    }
    for (auto& [key, list] : table_) {
      double total = 0.0;
      for (auto& [k, pr] : list) total += pr;
      if (total > 1.0 + 1e-9)
        fail("sampling probabilities at request " + std::to_string(key.first) +
             " exceed one; the point violates its distribution constraint");
    }
  }

  std::string name() const override { return "attenuated_rounding"; }

  int choose(const Instance& inst, const Ledger&, int request, int type,
             const std::vector<int>& feasible, const DrawKit& kit) override {
    auto it = table_.find({request, type});
    if (it == table_.end()) return inst.trivial_action;
    double u = kit.policy_uniform(request);
    double acc = 0.0;
    for (const auto& [k, pr] : it->second) {
      acc += pr;
      if (u < acc) {
        bool ok = std::find(feasible.begin(), feasible.end(), k) != feasible.end();
        return ok ? k : inst.trivial_action;  // skip when the draw is infeasible
      }
    }
    return inst.trivial_action;  // residual mass
  }

 private:
  std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> table_;
};

}  // namespace

double default_rounding_delta(const Instance& inst) {
  if (inst.c_min * inst.d <= 1.0)
    throw IncompatibleError("instance too small for the rounding discount formula");
  return std::sqrt(3.0 * std::log(inst.c_min * inst.d) / inst.c_min);
}

std::unique_ptr<Policy> make_attenuated_rounding(const Instance& inst, const LpModel& model,
                                                 const LpSolution& sol, double delta) {
  return std::make_unique<AttenuatedRounding>(inst, model, sol, delta);
}

ChernoffResult chernoff_check(const std::vector<TwoPoint>& vars, double gamma, double delta,
                              int samples, uint64_t seed) {
  if (!(delta > 0.0 && delta <= 1.0)) fail("delta must lie in (0, 1]");
  if (samples < 1) fail("at least one sample is required");
  double mean_sum = 0.0;
  for (const auto& v : vars) {
    if (!(v.value >= 0.0 && v.value <= 1.0)) fail("variable values must lie in [0, 1]");
    if (!(v.prob >= 0.0 && v.prob <= 1.0)) fail("variable probabilities must lie in [0, 1]");
    mean_sum += v.value * v.prob;
  }
  if (mean_sum > gamma / (1.0 + delta) + 1e-12)
    fail("sum of means exceeds gamma / (1 + delta)");

  ChernoffResult out;
  out.bound = std::exp(-delta * delta * gamma / 3.0);
  long long hits = 0;
  for (int s = 0; s < samples; ++s) {
    DrawKit kit(seed, static_cast<uint64_t>(s));
    double sum = 0.0;
    for (size_t i = 0; i < vars.size(); ++i) {
      double u = kit.uniform(Stream::Consumption, static_cast<int>(i + 1));
      if (u < vars[i].prob) sum += vars[i].value;
    }
    if (sum >= gamma) ++hits;
  }
  out.tail = static_cast<double>(hits) / samples;
  out.se = std::sqrt(out.tail * (1.0 - out.tail) / samples);
  return out;
}

double binomial_upper_tail(int n, double p, int k) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  double total = 0.0;
  double log_p = std::log(p), log_q = std::log1p(-p);
  for (int i = k; i <= n; ++i) {
    double lg = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) +
                i * log_p + (n - i) * log_q;
    total += std::exp(lg);
  }
  return std::min(total, 1.0);
}

}  // namespace replsim
