#pragma once

#include <memory>
#include <vector>

#include "replsim/engine.hpp"
#include "replsim/instance.hpp"
#include "replsim/lp.hpp"

namespace replsim {

// sqrt(3 log(c_min d) / c_min); throws IncompatibleError when c_min * d <= 1.
double default_rounding_delta(const Instance& inst);

// Randomized policy that serves request j of type z with action k with
// probability x*_{jkz} / ((1 + delta) p_{jz}), skipping to the no-op when the
// drawn action is infeasible or the draw lands in the residual mass.
// Construction fails if any (j, z) slice of the solution would need total
// sampling probability above one.
std::unique_ptr<Policy> make_attenuated_rounding(const Instance& inst, const LpModel& model,
                                                 const LpSolution& sol, double delta);

// X = value with the given probability, else 0; value in [0, 1].
struct TwoPoint {
  double value = 0.0;
  double prob = 0.0;
};

struct ChernoffResult {
  double bound = 0.0;  // exp(-delta^2 gamma / 3)
  double tail = 0.0;   // empirical P(sum >= gamma)
  double se = 0.0;     // binomial standard error of the tail estimate
};

// Upper-tail concentration check for a sum of independent two-point
// variables. Requires sum of means <= gamma / (1 + delta) and delta in (0, 1].
ChernoffResult chernoff_check(const std::vector<TwoPoint>& vars, double gamma, double delta,
                              int samples = 100000, uint64_t seed = 0);

// P(Binomial(n, p) >= k), summed in log space.
double binomial_upper_tail(int n, double p, int k);

}  // namespace replsim
