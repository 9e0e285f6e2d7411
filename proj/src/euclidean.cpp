#include "karcher/manifold.hpp"

namespace karcher {

Euclidean::Euclidean(int m) : Manifold(ManifoldBounds{}), m_(m) { require(m >= 1, "Euclidean: dimension must be >= 1"); }

double Euclidean::inner(const Vec&, const Vec& v, const Vec& w) const { return v.dot(w); }

Mat Euclidean::tangent_basis(const Vec&) const { return Mat::Identity(m_, m_); }

Vec Euclidean::geodesic_accel(const Vec&, const Vec& xdot) const { return Vec::Zero(xdot.size()); }

Vec Euclidean::transport_rate(const Vec&, const Vec&, const Vec& e) const { return Vec::Zero(e.size()); }

Vec Euclidean::curvature_operator(const Vec&, const Vec& J, const Vec&) const { return Vec::Zero(J.size()); }

Point Euclidean::exp(const Point& p, const TangentVector& v) const {
  require(same_base(p, v.base), "exp: base-point mismatch");
  check_tangent(v);
  return Point{p.coords + v.components};
}

TangentVector Euclidean::log(const Point& p, const Point& q) const {
  check_point(p);
  check_point(q);
  return {p, q.coords - p.coords};
}

Point Euclidean::geodesic_point(const Geodesic& g, double t) const {
  return Point{g.start.coords + t * g.initial_velocity.components};
}

TangentVector Euclidean::geodesic_velocity(const Geodesic& g, double t) const {
  return {geodesic_point(g, t), g.initial_velocity.components};
}

TangentVector Euclidean::parallel_transport(const Geodesic& g, double t0, double t1, const TangentVector& v) const {
  require(same_base(geodesic_point(g, t0), v.base, 1e-8), "parallel_transport: vector is not based at gamma(t0)");
  return {geodesic_point(g, t1), v.components};
}

TangentVector Euclidean::hess_half_dist_sq(const Point&, const Point& q, const TangentVector& V) const {
  require(same_base(q, V.base), "hess_half_dist_sq: V must be based at q");
  return V;
}

TangentVector Euclidean::second_deriv_X(const Point&, const Point& q, const TangentVector& V,
                                        const TangentVector& W) const {
  require(same_base(q, V.base) && same_base(q, W.base), "second_deriv_X: V and W must be based at q");
  return zero_tangent(q);
}

}  // namespace karcher
