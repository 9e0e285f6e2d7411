#include "karcher/manifold.hpp"

#include "constant_curvature.hpp"

#include <cmath>
#include <numbers>

namespace karcher {

namespace {

ManifoldBounds sphere_bounds(double r) {
  ManifoldBounds b;
  b.C0 = 1.0 / (r * r);
  b.C1 = 0.0;
  b.injectivity_radius = std::numbers::pi * r;
  b.convexity_radius = 0.5 * std::numbers::pi * r;
  return b;
}

// sin(x)/x
double sinc(double x) { return std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

}  // namespace

Sphere::Sphere(int m, double radius) : Manifold(sphere_bounds(radius)), m_(m), r_(radius) {
  require(m >= 1, "Sphere: dimension must be >= 1");
  require(radius > 0.0, "Sphere: radius must be positive");
}

double Sphere::inner(const Vec&, const Vec& v, const Vec& w) const { return v.dot(w); }

Mat Sphere::tangent_basis(const Vec& x) const {
  Mat col = x / x.norm();
  Eigen::HouseholderQR<Mat> qr(col);
  Mat Q = qr.householderQ();
  return Q.rightCols(m_);
}

Vec Sphere::geodesic_accel(const Vec& x, const Vec& xdot) const { return -(xdot.squaredNorm() / (r_ * r_)) * x; }

Vec Sphere::transport_rate(const Vec& x, const Vec& xdot, const Vec& e) const {
  return -(e.dot(xdot) / (r_ * r_)) * x;
}

Vec Sphere::curvature_operator(const Vec&, const Vec& J, const Vec& T) const {
  const double K = 1.0 / (r_ * r_);
  return K * (T.dot(T) * J - J.dot(T) * T);
}

void Sphere::check_point(const Point& p) const {
  Manifold::check_point(p);
  require(std::abs(p.coords.norm() - r_) <= 1e-12 * std::max(1.0, r_), "sphere: point is not on the sphere");
}

void Sphere::check_tangent(const TangentVector& v) const {
  check_point(v.base);
  require(v.components.size() == ambient_dim(), "sphere: tangent vector has wrong dimension");
  const double scale = std::max(1.0, v.base.coords.norm() * v.components.norm());
  require(std::abs(v.base.coords.dot(v.components)) <= 1e-10 * scale, "sphere: vector is not tangent at its base");
}

Point Sphere::project(const Vec& x) const {
  require(x.norm() > 0.0, "sphere: cannot project the zero vector");
  return Point{r_ * x / x.norm()};
}

Point Sphere::exp(const Point& p, const TangentVector& v) const {
  require(same_base(p, v.base), "exp: base-point mismatch");
  check_tangent(v);
  const double len = v.components.norm();
  require(len <= bounds().injectivity_radius * (1.0 + 1e-12), "sphere: exp vector exceeds injectivity radius");
  const double theta = len / r_;
  Vec y = std::cos(theta) * p.coords + sinc(theta) * v.components;
  return Point{r_ * y / y.norm()};
}

TangentVector Sphere::log(const Point& p, const Point& q) const {
  check_point(p);
  check_point(q);
  const double c = p.coords.dot(q.coords) / (r_ * r_);
  const Vec w = q.coords - c * p.coords;
  const double wn = w.norm();
  const double theta = std::atan2(wn / r_, c);
  if (theta > std::numbers::pi - 1e-8) throw DomainError("sphere: log of an antipodal point (cut locus)");
  if (wn == 0.0) return zero_tangent(p);
  // Remove the residual normal component introduced by rounding.
  Vec dir = w / wn;
  dir -= (dir.dot(p.coords) / (r_ * r_)) * p.coords;
  return {p, r_ * theta * dir / dir.norm()};
}

double Sphere::dist(const Point& p, const Point& q) const {
  check_point(p);
  check_point(q);
  const double c = p.coords.dot(q.coords) / (r_ * r_);
  const double wn = (q.coords - c * p.coords).norm();
  return r_ * std::atan2(wn / r_, c);
}

Point Sphere::geodesic_point(const Geodesic& g, double t) const {
  const double th = t / r_;
  Vec y = std::cos(th) * g.start.coords + r_ * std::sin(th) * g.initial_velocity.components;
  return Point{r_ * y / y.norm()};
}

TangentVector Sphere::geodesic_velocity(const Geodesic& g, double t) const {
  const double th = t / r_;
  const Vec v = -std::sin(th) / r_ * g.start.coords + std::cos(th) * g.initial_velocity.components;
  return {geodesic_point(g, t), v};
}

TangentVector Sphere::parallel_transport(const Geodesic& g, double t0, double t1, const TangentVector& v) const {
  check_tangent(v);
  const Point from = geodesic_point(g, t0);
  require(same_base(from, v.base, 1e-8), "parallel_transport: vector is not based at gamma(t0)");
  if (g.length == 0.0 && g.initial_velocity.components.norm() == 0.0) return v;
  const Vec d0 = geodesic_velocity(g, t0).components;
  const TangentVector at1 = geodesic_velocity(g, t1);
  const double a = v.components.dot(d0);
  return {at1.base, v.components - a * d0 + a * at1.components};
}

TangentVector Sphere::hess_half_dist_sq(const Point& p, const Point& q, const TangentVector& V) const {
  require(same_base(q, V.base), "hess_half_dist_sq: V must be based at q");
  check_tangent(V);
  const TangentVector to_p = log(q, p);
  const double d = to_p.components.norm();
  require(d < std::numbers::pi * r_, "hess_half_dist_sq: distance beyond conjugate point");
  const Vec Y = d > 0.0 ? Vec(-to_p.components / d) : Vec::Zero(ambient_dim());
  const auto rp = detail::radial_profile(1.0 / (r_ * r_), d);
  auto ip = [](const Vec& a, const Vec& b) { return a.dot(b); };
  return {q, detail::radial_hessian(rp, d, Y, V.components, ip)};
}

TangentVector Sphere::second_deriv_X(const Point& p, const Point& q, const TangentVector& V,
                                     const TangentVector& W) const {
  require(same_base(q, V.base) && same_base(q, W.base), "second_deriv_X: V and W must be based at q");
  const TangentVector to_p = log(q, p);
  const double d = to_p.components.norm();
  const Vec Y = d > 0.0 ? Vec(-to_p.components / d) : Vec::Zero(ambient_dim());
  const auto rp = detail::radial_profile(1.0 / (r_ * r_), d);
  auto ip = [](const Vec& a, const Vec& b) { return a.dot(b); };
  return {q, detail::radial_hessian_derivative(rp, d, Y, V.components, W.components, ip)};
}

}  // namespace karcher
