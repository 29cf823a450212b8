#pragma once

#include <span>
#include <utility>
#include <vector>

namespace sdca {

// Proximal map behind the top-k entropy dual update:
//
//   minimize  (alpha/2)(||x||^2 + s^2) - <b, x> + <x, log x>
//             + (1 - s) log(1 - s),      s = <1, x>,
//   over      { x : <1, x> <= 1, 0 <= x_j <= s / k }.
//
// The solution is x_j = min{ V(b_j - t) / alpha, s / k } with V the Lambert
// map of the exponent. U collects the coordinates clamped at s/k (always the
// largest b_j), M the rest. With U empty, t solves
//   V(alpha - t) + sum_j V(b_j - t) = alpha
// by a fourth-order Householder iteration inside a bisection safeguard;
// otherwise (s, t) solve a 2x2 nonlinear system by damped Newton with a
// monotone bisection fallback. At most k partitions are visited.
struct TopkEntropyDualResult {
  std::vector<double> x;
  double s = 0.0;  // <1, x>
  double t = 0.0;  // threshold
  int u_count = 0;
};

TopkEntropyDualResult prox_topk_entropy_dual(std::span<const double> b,
                                             double alpha, int k);

// Value (and maximizer) of the top-k entropy loss given the vector a of
// non-ground-truth score differences:
//
//   L = max { <a, x> - <x, log x> - (1 - s) log(1 - s) :
//             x in alpha set, radius 1 },   s = <1, x>.
//
// Closed form per partition, O(k m) total: x_j = min{ exp(a_j - t), s/k },
// and a partition is accepted when
//   max_{j in M} a_j <= log(s/k) + t <= min_{j in U} a_j.
// All internal quantities are kept in the log domain, so arbitrarily large
// score differences do not overflow.
struct TopkEntropyPrimalResult {
  double value = 0.0;
  std::vector<double> x;  // maximizer, also the loss gradient over a
  double s = 0.0;
  double t = 0.0;
  int u_count = 0;
};

TopkEntropyPrimalResult solve_topk_entropy_primal(std::span<const double> a,
                                                  int k);

// Proximal map of the multilabel entropy dual update: given b over the
// positive labels and bbar over the rest,
//
//   p_j    = V(alpha * b_j - t) / alpha,
//   pbar_j = V(alpha * bbar_j - t) / alpha,
//
// with t the root of  sum_j V(alpha b_j - t) + sum_j V(alpha bbar_j - t)
// = alpha, so the masses sum to one. Same safeguarded Householder root
// finder as above.
std::pair<std::vector<double>, std::vector<double>> prox_ml_entropy(
    std::span<const double> b, std::span<const double> bbar, double alpha,
    int k);

}  // namespace sdca
