#pragma once

#include <string>
#include <vector>

#include "replsim/instance.hpp"

namespace replsim {

// Expected allocation program for one instance:
//   maximize    lambda
//   subject to  lambda - sum_{j,k,z} E[r_{ijkz}] x_{jkz}            <= 0   per original resource i
//               sum_{j<=l,k,z} a_{ijkz}(l) x_{jkz} - prefix supply  <= 0   per resource i, arrival l
//               sum_k x_{jkz}                                       <= p_{jz}  per (j, z) with p > 0
//               x >= 0, lambda >= 0
// a is the expected outstanding consumption at arrival l of a commit at j;
// prefix supply is c_i plus the mean replenishment through l (or an override
// schedule in place of the mean).

struct LpVar {
  int request = 0;  // j, 1-based
  int action = 0;   // k
  int type = 0;     // z
};

struct LpModel {
  // Column 0 is lambda; columns 1..vars.size() are the x variables.
  std::vector<LpVar> vars;
  std::vector<std::vector<double>> rows;  // dense coefficient rows
  std::vector<double> rhs;
  std::vector<double> objective;          // maximized
  int resource_rows = 0;   // then capacity rows, then probability rows
  int capacity_rows = 0;
  int probability_rows = 0;
};

struct LpSolution {
  double value = 0.0;
  std::vector<double> x;  // per column, lambda first
  int pivots = 0;
};

// replenishment_override: per-(resource, request) supply amounts replacing
// the instance's mean replenishment (same shape [num_resources][horizon]).
// var_cap bounds the number of x columns after pruning zero-probability
// (j, z) pairs and not-yet-activated (j, k) pairs.
LpModel build_lp(const Instance& inst,
                 const std::vector<std::vector<double>>* replenishment_override = nullptr,
                 int var_cap = 100000);

// Dense simplex over the slack basis, smallest-index entering and leaving
// rules, so the pivot sequence is a pure function of the model.
LpSolution solve_lp(const LpModel& model);

// Whether a full column vector (lambda first) satisfies every row and sign
// constraint within tol.
bool lp_feasible(const LpModel& model, const std::vector<double>& x, double tol);

}  // namespace replsim
