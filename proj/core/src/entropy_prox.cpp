#include "sdca/entropy_prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sdca/errors.hpp"
#include "sdca/lambert.hpp"

namespace sdca {

namespace {

void check_finite(std::span<const double> v, const char* who) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(who) + ": non-finite input");
    }
  }
}

// Root of g(t) = sum_j V(c_j - t) - target = 0. g is strictly decreasing
// with range (0 - target, +inf), so the root exists and is unique for
// target > 0. Fourth-order Householder steps inside a bisection safeguard;
// the bracket comes from bounding each term by the largest:
//   t_lo = max c - Vinv(target)      (top term alone reaches the target)
//   t_hi = max c - Vinv(target / n)  (every term is below target / n)
double solve_v_sum_root(std::span<const double> c, double target) {
  const std::size_t n = c.size();
  double cmax = -std::numeric_limits<double>::infinity();
  for (double v : c) cmax = std::max(cmax, v);

  double lo = cmax - lambert_v_inverse(target);
  double hi = cmax - lambert_v_inverse(target / static_cast<double>(n));
  // Downstream feasibility works in x = V / alpha units, so the residual
  // tolerance must track the target itself; an absolute tolerance would let
  // the mass identity degrade by tol / alpha for small alpha.
  const double tol = 1e-13 * target;

  double t = 0.5 * (lo + hi);
  double g = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    g = -target;
    double g1 = 0.0, g2 = 0.0, g3 = 0.0;
    for (double cj : c) {
      const double v = lambert_v(cj - t);
      const double w = 1.0 + v;
      const double vp = v / w;
      g += v;
      g1 -= vp;
      g2 += vp / (w * w);
      g3 -= vp * (1.0 - 2.0 * v) / (w * w * w * w);
    }
    if (std::abs(g) <= tol) return t;
    if (g > 0.0) {
      lo = std::max(lo, t);
    } else {
      hi = std::min(hi, t);
    }
    if (hi - lo <= std::numeric_limits<double>::epsilon() *
                       (std::abs(lo) + std::abs(hi))) {
      break;  // bracket at the floating-point floor; g is as small as it gets
    }

    const double u = g / g1;
    const double a2 = 0.5 * g2 / g1;
    const double a3 = g3 / (6.0 * g1);
    double next = t - u * (1.0 + u * (a2 + u * (2.0 * a2 * a2 - a3)));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  if (std::abs(g) > 1e-8 * target) {
    throw NumericError("entropy prox: Lambert sum root finder stalled");
  }
  return t;
}

struct PairSolve {
  double s = 0.0, t = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  bool ok = false;
};

// Damped Newton on the partitioned optimality system
//   F1 = alpha (1 - rho) s - sum_{j in M} V(b_j - t)
//   F2 = (1 - rho) t + Vinv(alpha (1 - s)) - rho Vinv(alpha s / k) + A - alpha
// with a monotone bisection fallback on G(t) = F2(s(t), t), where s(t) is
// eliminated through F1. The Jacobian determinant is strictly positive on
// 0 < s < 1, so the undamped step is always defined.
PairSolve solve_partition_system(const std::vector<double>& bm, double alpha,
                                 int k, int u, double a_cap, double s0,
                                 double t0) {
  const double rho = static_cast<double>(u) / k;
  const double slim = 1e-14;
  double s = std::min(std::max(s0, slim), 1.0 - slim);
  double t = t0;

  const auto eval = [&](double ss, double tt, double& f1, double& f2) {
    double sum_v = 0.0;
    for (double bj : bm) sum_v += lambert_v(bj - tt);
    f1 = alpha * (1.0 - rho) * ss - sum_v;
    f2 = (1.0 - rho) * tt + lambert_v_inverse(alpha * (1.0 - ss)) -
         rho * lambert_v_inverse(alpha * ss / k) + a_cap - alpha;
  };

  const double scale = std::max({1.0, alpha, std::abs(a_cap)});
  double f1, f2;
  eval(s, t, f1, f2);
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    const double fn = std::max(std::abs(f1), std::abs(f2));
    if (fn <= 1e-12 * scale * (1.0 + std::abs(t))) {
      converged = true;
      break;
    }
    double j12 = 0.0;
    for (double bj : bm) {
      const double v = lambert_v(bj - t);
      j12 += v / (1.0 + v);
    }
    const double j11 = alpha * (1.0 - rho);
    const double j21 = -alpha - 1.0 / (1.0 - s) - rho * alpha / k - rho / s;
    const double j22 = 1.0 - rho;
    const double det = j11 * j22 - j12 * j21;
    const double ds = (-f1 * j22 + f2 * j12) / det;
    const double dt = (-f2 * j11 + f1 * j21) / det;

    double eta = 1.0;
    bool stepped = false;
    for (int bt = 0; bt < 60; ++bt) {
      const double sn = s + eta * ds;
      const double tn = t + eta * dt;
      if (sn > slim && sn < 1.0 - slim) {
        double g1, g2;
        eval(sn, tn, g1, g2);
        if (std::max(std::abs(g1), std::abs(g2)) <= (1.0 - 1e-4 * eta) * fn) {
          s = sn;
          t = tn;
          f1 = g1;
          f2 = g2;
          stepped = true;
          break;
        }
      }
      eta *= 0.5;
    }
    if (!stepped) break;
  }

  if (!converged) {
    // Bisection on the monotone reduced residual. s(t) < 1 requires
    // t above the edge where the M block alone carries unit mass.
    const double edge = solve_v_sum_root(bm, alpha * (1.0 - rho));
    double lo = edge + 1e-12 * (1.0 + std::abs(edge));
    const auto g_of = [&](double tt, double& ss) {
      double sum_v = 0.0;
      for (double bj : bm) sum_v += lambert_v(bj - tt);
      // Far above the data the free block underflows; keep the mass strictly
      // positive so the inverse map stays defined during the bracket hunt.
      ss = std::clamp(sum_v / (alpha * (1.0 - rho)), 1e-300, 1.0 - 1e-15);
      return (1.0 - rho) * tt + lambert_v_inverse(alpha * (1.0 - ss)) -
             rho * lambert_v_inverse(alpha * ss / k) + a_cap - alpha;
    };
    double ss;
    double hi = lo + 1.0;
    int guard = 0;
    while (g_of(hi, ss) < 0.0 && guard++ < 200) hi += (hi - lo);
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      const double g = g_of(mid, ss);
      if (g < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
      if (hi - lo <= 1e-15 * (1.0 + std::abs(hi))) break;
    }
    t = 0.5 * (lo + hi);
    (void)g_of(t, s);
    eval(s, t, f1, f2);
  }

  PairSolve out;
  out.s = s;
  out.t = t;
  out.residual = std::max(std::abs(f1), std::abs(f2));
  out.ok = out.residual <= 1e-8 * scale * (1.0 + std::abs(t));
  return out;
}

}  // namespace

TopkEntropyDualResult prox_topk_entropy_dual(std::span<const double> b,
                                             double alpha, int k) {
  const int m = static_cast<int>(b.size());
  if (m == 0) throw std::invalid_argument("prox_topk_entropy_dual: empty input");
  if (k < 1 || k > m) {
    throw std::invalid_argument("prox_topk_entropy_dual: k must be in [1, m]");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("prox_topk_entropy_dual: alpha must be > 0");
  }
  check_finite(b, "prox_topk_entropy_dual");

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return b[i] > b[j]; });

  TopkEntropyDualResult res;
  res.x.assign(m, 0.0);

  // U empty: single root in t, s recovered from the ground-truth term.
  {
    std::vector<double> c(b.begin(), b.end());
    c.push_back(alpha);
    const double t = solve_v_sum_root(c, alpha);
    // The cap test and the returned pair must use the same mass, and the
    // mass the caller sees is the accumulated one, so test against that.
    double mass = 0.0;
    for (int j = 0; j < m; ++j) {
      res.x[j] = lambert_v(b[j] - t) / alpha;
      mass += res.x[j];
    }
    // The cap comparison must happen in mass units: a slack measured in the
    // Lambert exponent inflates by V'/alpha on the way to the coordinates,
    // which for small alpha would pass solutions that sit visibly above the
    // cap.  Half the downstream feasibility budget keeps the result strictly
    // inside however the two roundings fall.
    // k == 1 is the degenerate case: each coordinate is bounded by the whole
    // mass, so the cap can never bind and the free solution always stands.
    if (k == 1 || res.x[order[0]] <= mass / k + 5e-10) {
      res.s = mass;
      res.t = t;
      res.u_count = 0;
      return res;
    }
    // Warm start the partitioned solves from here.
    res.s = 1.0 - lambert_v(alpha - t) / alpha;
    res.t = t;
  }

  double s_warm = std::min(res.s, 1.0 - 1e-12);
  double t_warm = res.t;
  for (int u = 1; u <= k - 1; ++u) {
    std::vector<double> bm;
    bm.reserve(m - u);
    for (int i = u; i < m; ++i) bm.push_back(b[order[i]]);
    double a_cap = 0.0;
    for (int i = 0; i < u; ++i) a_cap += b[order[i]];
    a_cap /= k;

    const PairSolve ps =
        solve_partition_system(bm, alpha, k, u, a_cap, s_warm, t_warm);
    if (!ps.ok) continue;
    s_warm = ps.s;
    t_warm = ps.t;

    // Eliminate s through the free-block mass at the final t: with
    // s = sum_M V / (alpha (1 - u/k)), the capped value s/k and the
    // accumulated total agree to machine precision however large the
    // remaining Newton residual is, so the result can never leave the
    // conjugate domain by more than roundoff.
    const double rho = static_cast<double>(u) / k;
    double sum_free = 0.0;
    for (int i = u; i < m; ++i) sum_free += lambert_v(b[order[i]] - ps.t);
    const double s_elim =
        std::min(sum_free / (alpha * (1.0 - rho)), 1.0);
    const double cap_arg = lambert_v_inverse(std::max(
        alpha * s_elim / k, std::numeric_limits<double>::min()));
    const double min_u = b[order[u - 1]] - ps.t;
    const double cap = s_elim / k;
    // The capped side is a pure optimality condition (entries held at the
    // cap that would rather sit above it), so a tolerance in the exponent is
    // fine there.  The free side decides feasibility, which downstream is
    // measured on the coordinates, so bound it in mass units directly.
    const double tol = 1e-9 * (1.0 + std::abs(cap_arg));
    const double free_top = lambert_v(b[order[u]] - ps.t) / alpha;
    if (min_u >= cap_arg - tol && free_top <= cap + 5e-10) {
      double mass = 0.0;
      for (int i = 0; i < u; ++i) {
        res.x[order[i]] = cap;
        mass += cap;
      }
      for (int i = u; i < m; ++i) {
        res.x[order[i]] = lambert_v(b[order[i]] - ps.t) / alpha;
        mass += res.x[order[i]];
      }
      res.s = mass;
      res.t = ps.t;
      res.u_count = u;
      return res;
    }
  }

  // k == m with all coordinates on the coupled bound: one-dimensional
  // strictly convex problem in the mass s.
  if (k == m) {
    double sum_b = 0.0;
    for (double v : b) sum_b += v;
    const double md = static_cast<double>(m);
    const auto fp = [&](double s) {
      return alpha * s * (1.0 + 1.0 / md) - sum_b / md + std::log(s / md) -
             std::log1p(-s);
    };
    double lo = 1e-300, hi = 1.0 - 1e-16;
    double s = 0.5;
    for (int iter = 0; iter < 200; ++iter) {
      const double g = fp(s);
      if (g > 0.0) {
        hi = s;
      } else {
        lo = s;
      }
      const double curv = alpha * (1.0 + 1.0 / md) + 1.0 / s + 1.0 / (1.0 - s);
      double next = s - g / curv;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - s) <= 1e-16 * (1.0 + s)) {
        s = next;
        break;
      }
      s = next;
    }
    const double cap = s / md;
    double bmin = b[0];
    for (double v : b) bmin = std::min(bmin, v);
    res.x.assign(m, cap);
    res.s = s;
    res.t = bmin - lambert_v_inverse(alpha * cap);
    res.u_count = k;
    return res;
  }

  throw NumericError("prox_topk_entropy_dual: no consistent bound partition");
}

TopkEntropyPrimalResult solve_topk_entropy_primal(std::span<const double> a,
                                                  int k) {
  const int m = static_cast<int>(a.size());
  if (m == 0) {
    throw std::invalid_argument("solve_topk_entropy_primal: empty input");
  }
  if (k < 1 || k > m) {
    throw std::invalid_argument("solve_topk_entropy_primal: k must be in [1, m]");
  }
  check_finite(a, "solve_topk_entropy_primal");

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a[i] > a[j]; });

  TopkEntropyPrimalResult res;
  res.x.assign(m, 0.0);

  int best_u = -1;
  double best_viol = std::numeric_limits<double>::infinity();
  for (int u = 0; u <= k - 1; ++u) {
    const double rho = static_cast<double>(u) / k;
    // log-sum-exp over the free block, shifted by its max.
    const double amax = a[order[u]];
    double acc = 0.0;
    for (int i = u; i < m; ++i) acc += std::exp(a[order[i]] - amax);
    const double log_z = amax + std::log(acc);

    double a_cap = 0.0;
    for (int i = 0; i < u; ++i) a_cap += a[order[i]];
    a_cap /= k;

    const double log_q = (1.0 - rho) * std::log1p(-rho) -
                         rho * std::log(static_cast<double>(k)) -
                         (1.0 - rho) * log_z - a_cap;
    // log(1 + Q), stable on both sides of log Q = 0.
    const double log_1q = (log_q > 0.0)
                              ? log_q + std::log1p(std::exp(-log_q))
                              : std::log1p(std::exp(log_q));
    const double t = log_z + log_1q - std::log1p(-rho);
    const double thr = log_z - std::log(static_cast<double>(k)) -
                       std::log1p(-rho);  // = log(s/k) + t

    const double tol = 1e-9 * (1.0 + std::abs(thr));
    const double viol =
        std::max(0.0, a[order[u]] - thr) +
        ((u > 0) ? std::max(0.0, thr - a[order[u - 1]]) : 0.0);
    if (viol < best_viol) {
      best_viol = viol;
      best_u = u;
    }
    if (viol > tol) continue;

    const double s = std::exp(-log_1q);
    const double one_minus_s = std::exp(log_q - log_1q);
    const double log_1ms = log_q - log_1q;
    res.value = (a_cap + (1.0 - rho) * t - rho * (-log_1q - std::log(double(k)))) * s -
                one_minus_s * log_1ms;
    res.s = s;
    res.t = t;
    res.u_count = u;
    const double cap = s / k;
    for (int i = 0; i < u; ++i) res.x[order[i]] = cap;
    for (int i = u; i < m; ++i) res.x[order[i]] = std::exp(a[order[i]] - t);
    return res;
  }

  // Theory guarantees acceptance above; absorb boundary-tie noise by taking
  // the least-violating partition.
  if (best_u >= 0 && best_viol < 1e-6) {
    const int u = best_u;
    const double rho = static_cast<double>(u) / k;
    const double amax = a[order[u]];
    double acc = 0.0;
    for (int i = u; i < m; ++i) acc += std::exp(a[order[i]] - amax);
    const double log_z = amax + std::log(acc);
    double a_cap = 0.0;
    for (int i = 0; i < u; ++i) a_cap += a[order[i]];
    a_cap /= k;
    const double log_q = (1.0 - rho) * std::log1p(-rho) -
                         rho * std::log(static_cast<double>(k)) -
                         (1.0 - rho) * log_z - a_cap;
    const double log_1q = (log_q > 0.0)
                              ? log_q + std::log1p(std::exp(-log_q))
                              : std::log1p(std::exp(log_q));
    const double t = log_z + log_1q - std::log1p(-rho);
    const double s = std::exp(-log_1q);
    const double one_minus_s = std::exp(log_q - log_1q);
    const double log_1ms = log_q - log_1q;
    res.value = (a_cap + (1.0 - rho) * t - rho * (-log_1q - std::log(double(k)))) * s -
                one_minus_s * log_1ms;
    res.s = s;
    res.t = t;
    res.u_count = u;
    const double cap = s / k;
    for (int i = 0; i < u; ++i) res.x[order[i]] = cap;
    for (int i = u; i < m; ++i) res.x[order[i]] = std::exp(a[order[i]] - t);
    return res;
  }
  throw NumericError("solve_topk_entropy_primal: no consistent partition");
}

std::pair<std::vector<double>, std::vector<double>> prox_ml_entropy(
    std::span<const double> b, std::span<const double> bbar, double alpha,
    int k) {
  if (b.empty() || bbar.empty()) {
    throw std::invalid_argument("prox_ml_entropy: both blocks must be nonempty");
  }
  if (k != static_cast<int>(b.size())) {
    throw std::invalid_argument("prox_ml_entropy: k must equal |Y|");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("prox_ml_entropy: alpha must be > 0");
  }
  check_finite(b, "prox_ml_entropy");
  check_finite(bbar, "prox_ml_entropy");

  std::vector<double> c;
  c.reserve(b.size() + bbar.size());
  for (double v : b) c.push_back(alpha * v);
  for (double v : bbar) c.push_back(alpha * v);
  const double t = solve_v_sum_root(c, alpha);

  std::vector<double> p(b.size()), pbar(bbar.size());
  for (std::size_t j = 0; j < b.size(); ++j) {
    p[j] = lambert_v(alpha * b[j] - t) / alpha;
  }
  for (std::size_t j = 0; j < bbar.size(); ++j) {
    pbar[j] = lambert_v(alpha * bbar[j] - t) / alpha;
  }
  return {std::move(p), std::move(pbar)};
}

}  // namespace sdca
