#include "karcher/manifold.hpp"

#include "constant_curvature.hpp"

#include <cmath>

namespace karcher {

namespace {

ManifoldBounds hyperbolic_bounds(double kappa) {
  ManifoldBounds b;
  b.C0 = kappa;
  b.C1 = 0.0;
  return b;
}

double sinhc(double x) { return std::abs(x) < 1e-4 ? 1.0 + x * x / 6.0 : std::sinh(x) / x; }

}  // namespace

Hyperbolic::Hyperbolic(int m, double kappa)
    : Manifold(hyperbolic_bounds(kappa)), m_(m), kappa_(kappa), R_(1.0 / std::sqrt(kappa)) {
  require(m >= 1, "Hyperbolic: dimension must be >= 1");
  require(kappa > 0.0, "Hyperbolic: kappa must be positive");
}

double Hyperbolic::minkowski(const Vec& a, const Vec& b) { return -a(0) * b(0) + a.tail(a.size() - 1).dot(b.tail(b.size() - 1)); }

double Hyperbolic::inner(const Vec&, const Vec& v, const Vec& w) const { return minkowski(v, w); }

Vec Hyperbolic::project_tangent(const Vec& x, const Vec& v) const {
  return v + (minkowski(v, x) / (R_ * R_)) * x;
}

Mat Hyperbolic::tangent_basis(const Vec& x) const {
  Mat B(m_ + 1, m_);
  for (int k = 0; k < m_; ++k) {
    Vec e = Vec::Zero(m_ + 1);
    e(k + 1) = 1.0;
    Vec b = project_tangent(x, e);
    for (int j = 0; j < k; ++j) b -= minkowski(b, B.col(j)) * B.col(j);
    B.col(k) = b / std::sqrt(minkowski(b, b));
  }
  return B;
}

Vec Hyperbolic::geodesic_accel(const Vec& x, const Vec& xdot) const { return (minkowski(xdot, xdot) / (R_ * R_)) * x; }

Vec Hyperbolic::transport_rate(const Vec& x, const Vec& xdot, const Vec& e) const {
  return (minkowski(e, xdot) / (R_ * R_)) * x;
}

Vec Hyperbolic::curvature_operator(const Vec&, const Vec& J, const Vec& T) const {
  return -kappa_ * (minkowski(T, T) * J - minkowski(J, T) * T);
}

void Hyperbolic::check_point(const Point& p) const {
  Manifold::check_point(p);
  const double n2 = p.coords.squaredNorm();
  require(std::abs(minkowski(p.coords, p.coords) + R_ * R_) <= 1e-12 * std::max(1.0, n2) && p.coords(0) > 0.0,
          "hyperbolic: point is not on the upper hyperboloid sheet");
}

void Hyperbolic::check_tangent(const TangentVector& v) const {
  check_point(v.base);
  require(v.components.size() == ambient_dim(), "hyperbolic: tangent vector has wrong dimension");
  const double scale = std::max(1.0, v.base.coords.norm() * v.components.norm());
  require(std::abs(minkowski(v.base.coords, v.components)) <= 1e-10 * scale,
          "hyperbolic: vector is not tangent at its base");
}

Point Hyperbolic::lift(const Vec& spatial) const {
  Vec x(m_ + 1);
  x(0) = std::sqrt(R_ * R_ + spatial.squaredNorm());
  x.tail(m_) = spatial;
  return Point{x};
}

Point Hyperbolic::exp(const Point& p, const TangentVector& v) const {
  require(same_base(p, v.base), "exp: base-point mismatch");
  check_tangent(v);
  const double len = std::sqrt(std::max(0.0, minkowski(v.components, v.components)));
  const double th = len / R_;
  const Vec y = std::cosh(th) * p.coords + sinhc(th) * v.components;
  // Re-lift from the spatial part to stay on the sheet.
  return lift(y.tail(m_));
}

TangentVector Hyperbolic::log(const Point& p, const Point& q) const {
  check_point(p);
  check_point(q);
  const double c = -minkowski(p.coords, q.coords) / (R_ * R_);
  Vec w = q.coords - c * p.coords;
  w = project_tangent(p.coords, w);
  const double wn = std::sqrt(std::max(0.0, minkowski(w, w)));
  if (wn == 0.0) return zero_tangent(p);
  const double d = R_ * std::asinh(wn / R_);
  return {p, d * w / wn};
}

double Hyperbolic::dist(const Point& p, const Point& q) const {
  check_point(p);
  check_point(q);
  const double c = -minkowski(p.coords, q.coords) / (R_ * R_);
  const Vec w = q.coords - c * p.coords;
  return R_ * std::asinh(std::sqrt(std::max(0.0, minkowski(w, w))) / R_);
}

Point Hyperbolic::geodesic_point(const Geodesic& g, double t) const {
  const double th = t / R_;
  const Vec y = std::cosh(th) * g.start.coords + R_ * std::sinh(th) * g.initial_velocity.components;
  return lift(y.tail(m_));
}

TangentVector Hyperbolic::geodesic_velocity(const Geodesic& g, double t) const {
  const double th = t / R_;
  const Vec v = std::sinh(th) / R_ * g.start.coords + std::cosh(th) * g.initial_velocity.components;
  const Point at = geodesic_point(g, t);
  return {at, project_tangent(at.coords, v)};
}

TangentVector Hyperbolic::parallel_transport(const Geodesic& g, double t0, double t1,
                                             const TangentVector& v) const {
  check_tangent(v);
  const Point from = geodesic_point(g, t0);
  require(same_base(from, v.base, 1e-8), "parallel_transport: vector is not based at gamma(t0)");
  if (g.initial_velocity.components.norm() == 0.0) return v;
  const Vec d0 = geodesic_velocity(g, t0).components;
  const TangentVector at1 = geodesic_velocity(g, t1);
  const double a = minkowski(v.components, d0);
  return {at1.base, project_tangent(at1.base.coords, v.components - a * d0 + a * at1.components)};
}

TangentVector Hyperbolic::hess_half_dist_sq(const Point& p, const Point& q, const TangentVector& V) const {
  require(same_base(q, V.base), "hess_half_dist_sq: V must be based at q");
  check_tangent(V);
  const TangentVector to_p = log(q, p);
  const double d = std::sqrt(std::max(0.0, minkowski(to_p.components, to_p.components)));
  const Vec Y = d > 0.0 ? Vec(-to_p.components / d) : Vec::Zero(ambient_dim());
  const auto rp = detail::radial_profile(-kappa_, d);
  return {q, detail::radial_hessian(rp, d, Y, V.components, &Hyperbolic::minkowski)};
}

TangentVector Hyperbolic::second_deriv_X(const Point& p, const Point& q, const TangentVector& V,
                                         const TangentVector& W) const {
  require(same_base(q, V.base) && same_base(q, W.base), "second_deriv_X: V and W must be based at q");
  const TangentVector to_p = log(q, p);
  const double d = std::sqrt(std::max(0.0, minkowski(to_p.components, to_p.components)));
  const Vec Y = d > 0.0 ? Vec(-to_p.components / d) : Vec::Zero(ambient_dim());
  const auto rp = detail::radial_profile(-kappa_, d);
  return {q, detail::radial_hessian_derivative(rp, d, Y, V.components, W.components, &Hyperbolic::minkowski)};
}

}  // namespace karcher
