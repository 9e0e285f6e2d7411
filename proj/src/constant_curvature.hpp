#pragma once

// Closed forms for the Hessian of 1/2 dist^2 on spaces of constant sectional
// curvature K. With Y the unit radial field pointing away from p and d the
// distance, Nabla X_p = f(d) I + (1 - f(d)) Y (x) Y, where f(d) = s cot s for
// K > 0 and s coth s for K < 0 (s = sqrt|K| d).

#include "karcher/types.hpp"

#include <cmath>

namespace karcher::detail {

struct RadialProfile {
  double f = 1.0;
  double one_minus_f_over_d = 0.0;  // (1 - f) / d
  double fprime = 0.0;              // df/dd
};

inline RadialProfile radial_profile(double K, double d) {
  RadialProfile r;
  const double u = K * d * d;
  if (K == 0.0 || d == 0.0) return r;
  if (std::abs(u) < 0.05) {
    // x cot x = 1 - u/3 - u^2/45 - 2u^3/945 - u^4/4725 - 2u^5/93555 - 1382u^6/638512875
    constexpr double c1 = 1.0 / 3.0, c2 = 1.0 / 45.0, c3 = 2.0 / 945.0, c4 = 1.0 / 4725.0,
                     c5 = 2.0 / 93555.0, c6 = 1382.0 / 638512875.0;
    const double g = c1 + u * (c2 + u * (c3 + u * (c4 + u * (c5 + u * c6))));
    const double gu = c2 + u * (2 * c3 + u * (3 * c4 + u * (4 * c5 + u * 5 * c6)));
    r.f = 1.0 - u * g;
    r.one_minus_f_over_d = K * d * g;
    // d/du (1 - u g) = -(g + u g')
    r.fprime = -(g + u * gu) * 2.0 * K * d;
    return r;
  }
  if (K > 0.0) {
    const double k = std::sqrt(K), s = k * d;
    const double sn = std::sin(s), cs = std::cos(s);
    r.f = s * cs / sn;
    r.fprime = k * (cs / sn - s / (sn * sn));
  } else {
    const double k = std::sqrt(-K), s = k * d;
    const double sn = std::sinh(s), cs = std::cosh(s);
    r.f = s * cs / sn;
    r.fprime = k * (cs / sn - s / (sn * sn));
  }
  r.one_minus_f_over_d = (1.0 - r.f) / d;
  return r;
}

/// H(V) = f V + (1 - f) <V,Y> Y.
template <class Inner>
Vec radial_hessian(const RadialProfile& rp, double d, const Vec& Y, const Vec& V, Inner&& inner) {
  if (d == 0.0) return V;
  return rp.f * V + (1.0 - rp.f) * inner(V, Y) * Y;
}

/// (Nabla_V H)(W), using Nabla_V Y = (f/d) V_perp.
template <class Inner>
Vec radial_hessian_derivative(const RadialProfile& rp, double d, const Vec& Y, const Vec& V, const Vec& W,
                              Inner&& inner) {
  if (d == 0.0) return Vec::Zero(V.size());
  const double vy = inner(V, Y), wy = inner(W, Y);
  const Vec v_perp = V - vy * Y;
  const Vec w_perp = W - wy * Y;
  const double c = rp.one_minus_f_over_d * rp.f;
  return rp.fprime * vy * w_perp + c * (inner(W, v_perp) * Y + wy * v_perp);
}

}  // namespace karcher::detail
