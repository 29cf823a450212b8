#pragma once

#include <span>
#include <vector>

namespace sdca {

// Continuous quadratic knapsack:
//   minimize   (1/2) ||x - b||^2
//   subject to lo_j <= x_j <= hi_j  and  <1, x> = radius   (equality = true)
//                                   or   <1, x> <= radius  (equality = false)
// The solution is x_j = clamp(b_j - tau, lo_j, hi_j) for a scalar threshold
// tau found by variable fixing (no sorting). hi_j may be +infinity.
struct KnapsackProblem {
  std::vector<double> b;
  std::vector<double> lo;
  std::vector<double> hi;
  double radius = 0.0;
  bool equality = false;
};

std::vector<double> solve_knapsack(const KnapsackProblem& p);

// Uniform-bound convenience overload.
std::vector<double> solve_knapsack(std::span<const double> b, double lo,
                                   double hi, double radius, bool equality);

namespace internal {

// Equality projection with the threshold exposed; shared by the simplex and
// bipartite routines. Result: x_j = clamp(b_j - tau, lo, hi), sum(x) = radius.
struct ThresholdedProjection {
  std::vector<double> x;
  double tau = 0.0;
  bool tau_defined = false;  // false when every coordinate ended on a bound
};

ThresholdedProjection project_box_sum_eq(std::span<const double> b, double lo,
                                         double hi, double radius);

}  // namespace internal

}  // namespace sdca
