#pragma once

#include <span>
#include <vector>

namespace sdca {

// Biased Euclidean projections onto the two top-k feasible sets used by the
// top-k hinge dual updates. Both solve
//
//   argmin_x ||x - b||^2 + rho * <1, x>^2   over the set
//
//   alpha set: { x : <1, x> <= r,  0 <= x_j <= <1, x> / k }
//   beta  set: { x : <1, x> <= r,  0 <= x_j <= r / k }
//
// rho = 0 recovers the plain projection. At k = 1 both sets equal the
// standard simplex of radius r. The alpha set's upper bound is coupled to
// the mass <1, x>, the beta set's bound is a constant box.
//
// Strategy: the budget-active case reduces to an equality-constrained box
// knapsack (no sorting), which in the dual updates is almost always the
// optimal regime; its multiplier is verified and on failure the routine
// falls back to an exact search over bound partitions (alpha) or a
// breakpoint scan for the fixed point of the biased threshold (beta).
std::vector<double> project_topk_alpha(std::span<const double> b, int k,
                                       double r, double rho = 0.0);

std::vector<double> project_topk_beta(std::span<const double> b, int k,
                                      double r, double rho = 0.0);

}  // namespace sdca
