#include "sdca/bipartite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sdca/knapsack.hpp"

namespace sdca {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Threshold of the equality projection onto {x >= 0, sum(x) = r}.
double simplex_eq_threshold(std::span<const double> b, double r) {
  const auto pr = internal::project_box_sum_eq(b, 0.0, kInf, r);
  if (pr.tau_defined) return pr.tau;
  // All coordinates clamped to zero can only happen at r = 0; any threshold
  // dominating the block works.
  double mx = -kInf;
  for (double v : b) mx = std::max(mx, v);
  return mx;
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> project_bipartite(
    std::span<const double> b, std::span<const double> bbar, double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("project_bipartite: radius must be finite, >= 0");
  }
  for (double v : b) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("project_bipartite: non-finite input");
    }
  }
  for (double v : bbar) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("project_bipartite: non-finite input");
    }
  }
  const std::size_t m = b.size(), n = bbar.size();
  std::vector<double> p(m, 0.0), pbar(n, 0.0);
  if (r == 0.0 || m == 0 || n == 0) return {std::move(p), std::move(pbar)};

  // Step 1: budget-active certificate from two independent projections.
  const double t1 = simplex_eq_threshold(b, r);
  const double s1 = simplex_eq_threshold(bbar, r);
  if (t1 + s1 >= 0.0) {
    for (std::size_t j = 0; j < m; ++j) p[j] = std::max(0.0, b[j] - t1);
    for (std::size_t j = 0; j < n; ++j) pbar[j] = std::max(0.0, bbar[j] - s1);
    return {std::move(p), std::move(pbar)};
  }

  // Budget inactive: equalize the two block masses by variable fixing.
  std::vector<std::size_t> ix(m), iy(n);
  std::iota(ix.begin(), ix.end(), std::size_t{0});
  std::iota(iy.begin(), iy.end(), std::size_t{0});

  double t = 0.0;
  const std::size_t max_rounds = m + n + 2;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    double sum_x = 0.0, sum_y = 0.0;
    for (std::size_t j : ix) sum_x += b[j];
    for (std::size_t j : iy) sum_y += bbar[j];
    t = (sum_x - sum_y) / static_cast<double>(ix.size() + iy.size());

    // Clamping deficits: mass the nonnegativity bound removes at t.
    double dx = 0.0, dy = 0.0;
    std::size_t nx = 0, ny = 0;
    for (std::size_t j : ix) {
      const double v = b[j] - t;
      if (v <= 0.0) {
        dx += v;
        ++nx;
      }
    }
    for (std::size_t j : iy) {
      const double v = bbar[j] + t;
      if (v <= 0.0) {
        dy += v;
        ++ny;
      }
    }

    if ((nx == 0 && ny == 0) || dx == dy) break;
    if (dx < dy) {
      // x block loses more mass; its violators stay at zero as t grows.
      std::erase_if(ix, [&](std::size_t j) { return b[j] - t <= 0.0; });
      if (ix.empty()) break;
    } else {
      std::erase_if(iy, [&](std::size_t j) { return bbar[j] + t <= 0.0; });
      if (iy.empty()) break;
    }
  }

  for (std::size_t j = 0; j < m; ++j) p[j] = std::max(0.0, b[j] - t);
  for (std::size_t j = 0; j < n; ++j) pbar[j] = std::max(0.0, bbar[j] + t);
  return {std::move(p), std::move(pbar)};
}

}  // namespace sdca
