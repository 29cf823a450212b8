#include "sdca/knapsack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sdca/errors.hpp"

namespace sdca {

namespace {

inline double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

// Variable-fixing solver for the equality-constrained problem. Each pass
// pins the candidate threshold from the free set, measures how much mass the
// bound violations add (dlo) and remove (dhi), and permanently fixes the
// side that certifiably stays on its bound at the optimum: if the clamped
// sum overshoots the budget the true threshold is larger, so coordinates
// already below their lower bound can never come back, and symmetrically
// for the upper side. At most n passes.
std::vector<double> solve_equality(const std::vector<double>& b,
                                   const std::vector<double>& lo,
                                   const std::vector<double>& hi,
                                   double radius) {
  const std::size_t n = b.size();
  std::vector<std::size_t> free_set(n);
  std::iota(free_set.begin(), free_set.end(), std::size_t{0});
  std::vector<double> x(n);
  double fixed_sum = 0.0;

  while (!free_set.empty()) {
    double sum_b = 0.0;
    for (std::size_t j : free_set) sum_b += b[j];
    const double tau =
        (sum_b - (radius - fixed_sum)) / static_cast<double>(free_set.size());

    double dlo = 0.0, dhi = 0.0;
    std::size_t nlo = 0, nhi = 0;
    for (std::size_t j : free_set) {
      const double v = b[j] - tau;
      if (v < lo[j]) {
        dlo += lo[j] - v;
        ++nlo;
      } else if (v > hi[j]) {
        dhi += v - hi[j];
        ++nhi;
      }
    }

    if ((nlo == 0 && nhi == 0) || dlo == dhi) {
      for (std::size_t j : free_set) x[j] = clamp(b[j] - tau, lo[j], hi[j]);
      return x;
    }

    if (dlo > dhi) {
      std::erase_if(free_set, [&](std::size_t j) {
        if (b[j] - tau < lo[j]) {
          x[j] = lo[j];
          fixed_sum += lo[j];
          return true;
        }
        return false;
      });
    } else {
      std::erase_if(free_set, [&](std::size_t j) {
        if (b[j] - tau > hi[j]) {
          x[j] = hi[j];
          fixed_sum += hi[j];
          return true;
        }
        return false;
      });
    }
  }

  // Everything landed on a bound; only valid if the bounds themselves meet
  // the budget (degenerate feasible boundary).
  double total = fixed_sum;
  const double scale = std::abs(radius) + std::abs(total) + 1.0;
  if (std::abs(total - radius) > 1e-9 * scale) {
    throw NumericError("solve_knapsack: variable fixing exhausted the free "
                       "set away from the budget");
  }
  return x;
}

void validate(const KnapsackProblem& p) {
  const std::size_t n = p.b.size();
  if (n == 0) throw std::invalid_argument("solve_knapsack: empty input");
  if (p.lo.size() != n || p.hi.size() != n) {
    throw std::invalid_argument("solve_knapsack: bound size mismatch");
  }
  if (!std::isfinite(p.radius)) {
    throw std::invalid_argument("solve_knapsack: radius must be finite");
  }
  double sum_lo = 0.0, sum_hi = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(p.b[j]) || !std::isfinite(p.lo[j]) ||
        std::isnan(p.hi[j])) {
      throw std::invalid_argument("solve_knapsack: non-finite input");
    }
    if (p.lo[j] > p.hi[j]) {
      throw std::invalid_argument("solve_knapsack: lo > hi at a coordinate");
    }
    sum_lo += p.lo[j];
    sum_hi += p.hi[j];
  }
  if (p.equality) {
    if (sum_lo > p.radius) {
      throw std::invalid_argument(
          "solve_knapsack: infeasible, sum of lower bounds exceeds the budget");
    }
    if (sum_hi < p.radius) {
      throw std::invalid_argument(
          "solve_knapsack: infeasible, sum of upper bounds is below the budget");
    }
  } else if (sum_lo > p.radius) {
    throw std::invalid_argument(
        "solve_knapsack: infeasible, sum of lower bounds exceeds the budget");
  }
}

}  // namespace

std::vector<double> solve_knapsack(const KnapsackProblem& p) {
  validate(p);
  const std::size_t n = p.b.size();

  if (!p.equality) {
    // Budget inactive <=> the plain box projection already fits.
    std::vector<double> x(n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = clamp(p.b[j], p.lo[j], p.hi[j]);
      total += x[j];
    }
    if (total <= p.radius) return x;
  }
  return solve_equality(p.b, p.lo, p.hi, p.radius);
}

std::vector<double> solve_knapsack(std::span<const double> b, double lo,
                                   double hi, double radius, bool equality) {
  KnapsackProblem p;
  p.b.assign(b.begin(), b.end());
  p.lo.assign(b.size(), lo);
  p.hi.assign(b.size(), hi);
  p.radius = radius;
  p.equality = equality;
  return solve_knapsack(p);
}

namespace internal {

ThresholdedProjection project_box_sum_eq(std::span<const double> b, double lo,
                                         double hi, double radius) {
  KnapsackProblem p;
  p.b.assign(b.begin(), b.end());
  p.lo.assign(b.size(), lo);
  p.hi.assign(b.size(), hi);
  p.radius = radius;
  p.equality = true;

  ThresholdedProjection out;
  out.x = solve_knapsack(p);

  // Recover tau from the interior coordinates; average for stability.
  double acc = 0.0;
  std::size_t cnt = 0;
  for (std::size_t j = 0; j < out.x.size(); ++j) {
    if (out.x[j] > lo && out.x[j] < hi) {
      acc += b[j] - out.x[j];
      ++cnt;
    }
  }
  if (cnt > 0) {
    out.tau = acc / static_cast<double>(cnt);
    out.tau_defined = true;
  }
  return out;
}

}  // namespace internal

}  // namespace sdca
