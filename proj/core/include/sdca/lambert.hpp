#pragma once

#include <cmath>
#include <stdexcept>

namespace sdca {

// lambert_v(t) solves x + log x = t for x > 0, i.e. x = W(e^t) with W the
// principal Lambert function. This is the workhorse of every entropic
// proximal map in this library, so it has a hard residual contract:
// |V(t) + log V(t) - t| <= 1e-12 for t in [-700, 700].
//
// The iteration runs on w = log x, where the residual g(w) = w + e^w - t is
// well conditioned over the whole double range. Initial guesses come from
// the two asymptotic regimes, x ~ e^t as t -> -inf and x ~ t - log t as
// t -> +inf, switching at t = 1; both asymptotics are mild near the switch
// and a fifth-order Householder step contracts the error fast enough that
// two fixed steps reach the contract, with one guarded extra step for
// stragglers. Below t ~ -746, e^t underflows and 0 is returned; callers
// treat V ~ 0 as an inactive coordinate.
inline double lambert_v(double t) {
  if (!std::isfinite(t)) {
    throw std::domain_error("lambert_v: input must be finite");
  }
  double w = (t <= 1.0) ? t : std::log(t - std::log(t));

  // Fifth-order Householder (Schroeder series) step on g(w) = w + e^w - t.
  // All higher derivatives of g equal e^w, which keeps the step cheap.
  const auto step = [&](double e, double g) {
    const double gp = 1.0 + e;
    const double u = g / gp;
    const double a2 = 0.5 * e / gp;
    const double a3 = e / (6.0 * gp);
    const double a4 = e / (24.0 * gp);
    const double c2 = a2;
    const double c3 = 2.0 * a2 * a2 - a3;
    const double c4 = 5.0 * a2 * a2 * a2 - 5.0 * a2 * a3 + a4;
    w -= u * (1.0 + u * (c2 + u * (c3 + u * c4)));
  };

  double e = std::exp(w);
  step(e, w + e - t);
  e = std::exp(w);
  step(e, w + e - t);
  e = std::exp(w);
  if (std::abs(w + e - t) > 1e-12) {
    step(e, w + e - t);
  }
  return std::exp(w);
}

// d/dt of lambert_v: V'(t) = V / (1 + V), in (0, 1). Underflow of V gives 0.
inline double lambert_v_prime(double t) {
  const double v = lambert_v(t);
  return v / (1.0 + v);
}

// Inverse map: t such that lambert_v(t) = v, i.e. t = v + log v. v must be
// strictly positive.
inline double lambert_v_inverse(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::domain_error("lambert_v_inverse: input must be finite and > 0");
  }
  return v + std::log(v);
}

}  // namespace sdca
