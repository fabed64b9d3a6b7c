#include "replsim/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace replsim {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("lp: " + msg);
}

constexpr double kFeasTol = 1e-9;
constexpr int kPivotCap = 1000000;

}  // namespace

LpModel build_lp(const Instance& inst,
                 const std::vector<std::vector<double>>* replenishment_override,
                 int var_cap) {
  const int m = inst.arrivals.horizon;
  const int n = inst.num_resources();
  if (replenishment_override != nullptr) {
    if (static_cast<int>(replenishment_override->size()) != n)
      fail("override schedule has the wrong number of resource rows");
    for (const auto& row : *replenishment_override)
      if (static_cast<int>(row.size()) != m)
        fail("override schedule has the wrong horizon");
  }

  LpModel model;
  // Variables: (j, k, z) with p_{jz} > 0 and k already activated at j, in
  // (j, k, z) order. Column 0 stays lambda.
  for (int j = 1; j <= m; ++j)
    for (int k = 0; k < inst.num_actions(); ++k) {
      if (inst.actions[k].activation > j) continue;
      for (int z = 0; z < inst.num_types(); ++z)
        if (inst.type_prob(j, z) > 0.0) model.vars.push_back({j, k, z});
    }
  if (static_cast<int>(model.vars.size()) > var_cap)
    fail("model needs " + std::to_string(model.vars.size()) +
         " variables, above the cap of " + std::to_string(var_cap));

  const int cols = 1 + static_cast<int>(model.vars.size());
  auto add_row = [&](double rhs) -> std::vector<double>& {
    model.rows.emplace_back(cols, 0.0);
    model.rhs.push_back(rhs);
    return model.rows.back();
  };

  for (int i = 0; i < n; ++i) {
    if (!inst.resources[i].origin.original()) continue;
    auto& row = add_row(0.0);
    row[0] = 1.0;
    for (size_t v = 0; v < model.vars.size(); ++v) {
      const LpVar& var = model.vars[v];
      row[1 + v] = -inst.expected_reward(i, var.request, var.action, var.type);
    }
    ++model.resource_rows;
  }

  for (int i = 0; i < n; ++i) {
    double supply = inst.resources[i].initial_inventory;
    for (int l = 1; l <= m; ++l) {
      supply += replenishment_override != nullptr ? (*replenishment_override)[i][l - 1]
                                                  : inst.mean_replenishment(i, l);
      auto& row = add_row(supply);
      for (size_t v = 0; v < model.vars.size(); ++v) {
        const LpVar& var = model.vars[v];
        if (var.request > l) continue;
        row[1 + v] = inst.expected_consumption(i, var.request, var.action, var.type, l);
      }
      ++model.capacity_rows;
    }
  }

  for (int j = 1; j <= m; ++j)
    for (int z = 0; z < inst.num_types(); ++z) {
      double p = inst.type_prob(j, z);
      if (p <= 0.0) continue;
      auto& row = add_row(p);
      for (size_t v = 0; v < model.vars.size(); ++v)
        if (model.vars[v].request == j && model.vars[v].type == z) row[1 + v] = 1.0;
      ++model.probability_rows;
    }

  model.objective.assign(cols, 0.0);
  model.objective[0] = 1.0;
  return model;
}

LpSolution solve_lp(const LpModel& model) {
  const int rows = static_cast<int>(model.rows.size());
  const int structural = static_cast<int>(model.objective.size());
  const int cols = structural + rows;  // one slack per row
  for (double b : model.rhs)
    if (b < 0.0) fail("negative right-hand side; the slack basis is not feasible");

  // Tableau: row 0 carries negated reduced costs, last column the rhs.
  std::vector<std::vector<double>> t(rows + 1, std::vector<double>(cols + 1, 0.0));
  for (int c = 0; c < structural; ++c) t[0][c] = -model.objective[c];
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < structural; ++c) t[r + 1][c] = model.rows[r][c];
    t[r + 1][structural + r] = 1.0;
    t[r + 1][cols] = model.rhs[r];
  }
  std::vector<int> basis(rows);
  for (int r = 0; r < rows; ++r) basis[r] = structural + r;

  LpSolution sol;
  while (true) {
    int enter = -1;
    for (int c = 0; c < cols; ++c)
      if (t[0][c] < -kFeasTol) { enter = c; break; }
    if (enter < 0) break;

    // Right-hand sides can drift a hair below zero across degenerate pivots;
    // clamping keeps those rows eligible instead of reading as unbounded.
    bool found = false;
    double best = 0.0;
    for (int r = 1; r <= rows; ++r) {
      if (t[r][enter] <= kFeasTol) continue;
      double ratio = std::max(t[r][cols], 0.0) / t[r][enter];
      if (!found || ratio < best) { best = ratio; found = true; }
    }
    if (!found) fail("objective is unbounded, which this family of models cannot produce");
    int leave = -1;
    for (int r = 1; r <= rows; ++r) {
      if (t[r][enter] <= kFeasTol) continue;
      double ratio = std::max(t[r][cols], 0.0) / t[r][enter];
      if (ratio > best + kFeasTol) continue;
      if (leave < 0 || basis[r - 1] < basis[leave - 1]) leave = r;
    }

    if (++sol.pivots > kPivotCap)
      fail("pivot cap exceeded after " + std::to_string(kPivotCap) + " iterations (" +
           std::to_string(rows) + " rows, " + std::to_string(cols) + " columns)");

    double piv = t[leave][enter];
    for (int c = 0; c <= cols; ++c) t[leave][c] /= piv;
    for (int r = 0; r <= rows; ++r) {
      if (r == leave) continue;
      double f = t[r][enter];
      if (f == 0.0) continue;
      for (int c = 0; c <= cols; ++c) t[r][c] -= f * t[leave][c];
    }
    basis[leave - 1] = enter;
  }

  sol.x.assign(structural, 0.0);
  for (int r = 0; r < rows; ++r)
    if (basis[r] < structural) sol.x[basis[r]] = t[r + 1][cols];
  sol.value = t[0][cols];
  return sol;
}

bool lp_feasible(const LpModel& model, const std::vector<double>& x, double tol) {
  if (x.size() != model.objective.size()) fail("feasibility check got a wrong-sized point");
  for (double v : x)
    if (v < -tol) return false;
  for (size_t r = 0; r < model.rows.size(); ++r) {
    double lhs = 0.0;
    for (size_t c = 0; c < x.size(); ++c) lhs += model.rows[r][c] * x[c];
    if (lhs > model.rhs[r] + tol * std::max(1.0, std::fabs(model.rhs[r]))) return false;
  }
  return true;
}

}  // namespace replsim
