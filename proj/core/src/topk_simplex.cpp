#include "sdca/topk_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sdca/knapsack.hpp"

namespace sdca {

namespace {

void validate_common(std::span<const double> b, int k, double r, double rho) {
  if (b.empty()) throw std::invalid_argument("topk projection: empty input");
  if (k < 1) throw std::invalid_argument("topk projection: k must be >= 1");
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("topk projection: radius must be finite, >= 0");
  }
  if (!(rho >= 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("topk projection: rho must be finite, >= 0");
  }
  for (double v : b) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("topk projection: non-finite input");
    }
  }
}

double objective(std::span<const double> b, const std::vector<double>& x,
                 double rho) {
  double q = 0.0, s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - b[j];
    q += d * d;
    s += x[j];
  }
  return 0.5 * q + 0.5 * rho * s * s;
}

// Exhaustive candidate search for the alpha set. Partitions are prefixes of
// the coordinates sorted by b: U (at the coupled bound s/k, the u largest),
// then M (free), then zeros. For each partition the stationarity conditions
// are linear in (s, t) and solved in closed form, for both the inactive and
// the active budget; infeasible candidates are discarded and the feasible
// one with the smallest objective is exact.
std::vector<double> alpha_enumerate(std::span<const double> b, int k, double r,
                                    double rho) {
  const int m = static_cast<int>(b.size());
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return b[i] > b[j]; });

  std::vector<double> prefix(m + 1, 0.0);
  for (int i = 0; i < m; ++i) prefix[i + 1] = prefix[i] + b[order[i]];

  double b_inf = 0.0;
  for (double v : b) b_inf = std::max(b_inf, std::abs(v));
  const double tol = 1e-9 * std::max({1.0, b_inf, r});

  std::vector<double> best(m, 0.0);  // zero vector is always feasible
  double best_obj = objective(b, best, rho);
  std::vector<double> x(m);

  const auto consider = [&](int u, int mlen, double s, double t) {
    if (!std::isfinite(s) || !std::isfinite(t)) return;
    if (s < -tol || s > r + tol) return;
    const double cap = s / k;
    std::fill(x.begin(), x.end(), 0.0);
    for (int i = 0; i < u; ++i) x[order[i]] = cap;
    for (int i = u; i < u + mlen; ++i) {
      const double v = b[order[i]] - t;
      if (v < -tol || v > cap + tol) return;
      x[order[i]] = std::min(std::max(v, 0.0), cap);
    }
    const double obj = objective(b, x, rho);
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  };

  for (int u = 0; u <= std::min(k, m); ++u) {
    const double s_u = prefix[u];
    const double a_u = s_u / k;
    if (u == k) {
      // Degenerate partition: all mass sits on the k bound coordinates.
      const double s_in = k * a_u / (1.0 + rho * k);
      consider(u, 0, s_in, 0.0);
      consider(u, 0, r, 0.0);
      continue;
    }
    const double rho_u = static_cast<double>(u) / k;
    for (int mlen = 1; mlen <= m - u; ++mlen) {
      const double s_m = prefix[u + mlen] - prefix[u];
      // Budget inactive: theta = 0 couples s and t linearly.
      const double denom =
          (1.0 - rho_u) * (1.0 - rho_u) + mlen * (rho + rho_u / k);
      const double s_in = (s_m * (1.0 - rho_u) + mlen * a_u) / denom;
      const double t_in = (s_in * (rho + rho_u / k) - a_u) / (1.0 - rho_u);
      consider(u, mlen, s_in, t_in);
      // Budget active: s = r.
      const double t_ac = (s_m - r * (1.0 - rho_u)) / mlen;
      consider(u, mlen, r, t_ac);
    }
  }
  return best;
}

}  // namespace

std::vector<double> project_topk_alpha(std::span<const double> b, int k,
                                       double r, double rho) {
  validate_common(b, k, r, rho);
  const int m = static_cast<int>(b.size());
  if (k > m) {
    throw std::invalid_argument("project_topk_alpha: k must be <= dimension");
  }
  if (r == 0.0) return std::vector<double>(b.size(), 0.0);

  // Fast path: assume the budget is active. The coupled bound becomes the
  // constant box r/k and the bias term is constant on the budget face, so an
  // equality knapsack solves it; accept if the budget multiplier
  //   theta = t + (S_U - |U| t - |U| r/k)/k - rho r
  // is nonnegative.
  if (k < m) {
    const auto eq = internal::project_box_sum_eq(b, 0.0, r / k, r);
    if (eq.tau_defined) {
      double s_u = 0.0;
      int u = 0;
      const double cap = r / k;
      for (int j = 0; j < m; ++j) {
        if (eq.x[j] == cap) {
          s_u += b[j];
          ++u;
        }
      }
      const double theta =
          eq.tau + (s_u - u * eq.tau - u * cap) / k - rho * r;
      double b_inf = 0.0;
      for (double v : b) b_inf = std::max(b_inf, std::abs(v));
      if (theta >= -1e-11 * std::max({1.0, b_inf, r})) return eq.x;
    }
  }
  return alpha_enumerate(b, k, r, rho);
}

std::vector<double> project_topk_beta(std::span<const double> b, int k,
                                      double r, double rho) {
  validate_common(b, k, r, rho);
  const int m = static_cast<int>(b.size());
  if (r == 0.0) return std::vector<double>(b.size(), 0.0);
  const double cap = r / k;

  // Budget-inactive solution: x = clamp(b - tau, 0, cap) with the biased
  // threshold fixed point tau = rho * sum(x). phi(tau) = sum clamp(b - tau)
  // is piecewise linear, so walk its breakpoints; tau - rho * phi(tau) is
  // strictly increasing and crosses zero in exactly one segment.
  std::vector<double> x(m);
  double s_in = 0.0;
  if (rho == 0.0) {
    for (int j = 0; j < m; ++j) {
      x[j] = std::min(std::max(b[j], 0.0), cap);
      s_in += x[j];
    }
  } else {
    struct Event {
      double tau;
      bool saturate_to_free;
      int j;
    };
    std::vector<Event> ev;
    ev.reserve(2 * m);
    for (int j = 0; j < m; ++j) {
      ev.push_back({b[j] - cap, true, j});
      ev.push_back({b[j], false, j});
    }
    std::sort(ev.begin(), ev.end(),
              [](const Event& a, const Event& b) { return a.tau < b.tau; });

    int num_sat = m, num_free = 0;
    double sum_free = 0.0;
    double seg_lo = -std::numeric_limits<double>::infinity();
    double tau = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t e = 0; e <= ev.size(); ++e) {
      const double seg_hi =
          (e < ev.size()) ? ev[e].tau
                          : std::numeric_limits<double>::infinity();
      const double cand = rho * (num_sat * cap + sum_free) /
                          (1.0 + rho * static_cast<double>(num_free));
      if (cand >= seg_lo && cand <= seg_hi) {
        tau = cand;
        break;
      }
      if (e < ev.size()) {
        if (ev[e].saturate_to_free) {
          --num_sat;
          ++num_free;
          sum_free += b[ev[e].j];
        } else {
          --num_free;
          sum_free -= b[ev[e].j];
        }
        seg_lo = seg_hi;
      }
    }
    if (std::isnan(tau)) {
      // The fixed point exists by monotonicity; reaching here means pure
      // floating noise at a breakpoint. Use the last segment's candidate.
      tau = rho * (num_sat * cap + sum_free) /
            (1.0 + rho * static_cast<double>(num_free));
    }
    for (int j = 0; j < m; ++j) {
      x[j] = std::min(std::max(b[j] - tau, 0.0), cap);
      s_in += x[j];
    }
  }
  if (s_in <= r * (1.0 + 1e-12)) return x;

  // Budget active: the bias is constant on the face sum(x) = r.
  return internal::project_box_sum_eq(b, 0.0, cap, r).x;
}

}  // namespace sdca
