#include "karcher/manifold.hpp"

#include "karcher/jacobi.hpp"

#include <cmath>

namespace karcher {

void ManifoldBounds::validate() const {
  require(C0 >= 0.0 && C1 >= 0.0, "ManifoldBounds: curvature bounds must be nonnegative");
  require(injectivity_radius > 0.0 && convexity_radius > 0.0, "ManifoldBounds: radii must be positive");
  require(convexity_radius <= injectivity_radius, "ManifoldBounds: convexity_radius exceeds injectivity_radius");
}

Manifold::Manifold(ManifoldBounds bounds, GeodesicNumerics numerics)
    : bounds_(bounds), numerics_(numerics) {
  bounds_.validate();
}

void Manifold::check_point(const Point& p) const {
  require(p.coords.size() == ambient_dim(), kind() + ": point has wrong dimension");
  require(p.coords.allFinite(), kind() + ": point has non-finite coordinates");
}

void Manifold::check_tangent(const TangentVector& v) const {
  check_point(v.base);
  require(v.components.size() == ambient_dim(), kind() + ": tangent vector has wrong dimension");
}

double Manifold::metric(const Point& p, const TangentVector& v, const TangentVector& w) const {
  require(same_base(p, v.base) && same_base(p, w.base), "metric: base-point mismatch");
  check_tangent(v);
  check_tangent(w);
  return inner(p.coords, v.components, w.components);
}

double Manifold::norm(const TangentVector& v) const {
  return std::sqrt(std::max(0.0, inner(v.base.coords, v.components, v.components)));
}

Point Manifold::exp(const Point& p, const TangentVector& v) const { return exp_ode(*this, p, v); }

TangentVector Manifold::log(const Point& p, const Point& q) const { return log_shooting(*this, p, q); }

double Manifold::dist(const Point& p, const Point& q) const { return norm(log(p, q)); }

Geodesic Manifold::geodesic_between(const Point& p, const Point& q) const {
  TangentVector v = log(p, q);
  const double len = norm(v);
  Geodesic g;
  g.start = p;
  g.length = len;
  g.initial_velocity = len > 0.0 ? TangentVector{p, v.components / len} : zero_tangent(p);
  return g;
}

Point Manifold::geodesic_point(const Geodesic& g, double t) const {
  return integrate_geodesic(*this, g.start, g.initial_velocity, t).end;
}

TangentVector Manifold::geodesic_velocity(const Geodesic& g, double t) const {
  return integrate_geodesic(*this, g.start, g.initial_velocity, t).velocity;
}

TangentVector Manifold::parallel_transport(const Geodesic& g, double t0, double t1, const TangentVector& v) const {
  return transport_ode(*this, g, t0, t1, v);
}

TangentVector Manifold::hess_half_dist_sq(const Point& p, const Point& q, const TangentVector& V) const {
  return hess_half_dist_sq_jacobi(*this, p, q, V);
}

TangentVector Manifold::second_deriv_X(const Point& p, const Point& q, const TangentVector& V,
                                       const TangentVector& W) const {
  return second_deriv_X_fd(*this, p, q, V, W, numerics_.second_deriv_step);
}

// ---------------------------------------------------------------------------

GeodesicFlow integrate_geodesic(const Manifold& M, const Point& p, const TangentVector& v, double t) {
  M.check_tangent(v);
  require(same_base(p, v.base), "integrate_geodesic: base-point mismatch");
  const int a = M.ambient_dim();
  Vec y(2 * a + 1);
  y << p.coords, v.components, 0.0;
  auto rhs = [&](double, const Vec& s, Vec& ds) {
    const Vec x = s.head(a), xd = s.segment(a, a);
    ds.head(a) = xd;
    ds.segment(a, a) = M.geodesic_accel(x, xd);
    ds(2 * a) = std::sqrt(std::max(0.0, M.inner(x, xd, xd)));
  };
  const Vec out = integrate(rhs, y, 0.0, t, M.numerics().ode);
  GeodesicFlow flow;
  flow.end = Point{out.head(a)};
  flow.velocity = TangentVector{flow.end, out.segment(a, a)};
  flow.length = std::abs(out(2 * a));
  return flow;
}

Point exp_ode(const Manifold& M, const Point& p, const TangentVector& v) {
  require(M.norm(v) <= M.bounds().injectivity_radius, M.kind() + ": exp vector exceeds injectivity radius");
  return integrate_geodesic(M, p, v, 1.0).end;
}

TangentVector log_shooting(const Manifold& M, const Point& p, const Point& q, std::optional<Vec> initial_guess) {
  M.check_point(p);
  M.check_point(q);
  const auto& num = M.numerics();
  // Unknowns are coordinates in a g-orthonormal basis of T_p, so embedded models stay tangent.
  const Mat B = M.tangent_basis(p.coords);
  const Mat Bt = B.transpose();
  const Mat pinv = (Bt * B).ldlt().solve(Bt);
  const int m = static_cast<int>(B.cols());
  Vec c = pinv * initial_guess.value_or(q.coords - p.coords);
  auto endpoint = [&](const Vec& w) { return integrate_geodesic(M, p, TangentVector{p, B * w}, 1.0).end.coords; };
  for (int it = 0; it < num.shooting_max_iters; ++it) {
    const Vec residual = endpoint(c) - q.coords;
    if (residual.lpNorm<Eigen::Infinity>() < num.shooting_tol) return {p, B * c};
    const double step = num.shooting_fd_step * std::max(1.0, c.norm());
    Mat jac(residual.size(), m);
    for (int k = 0; k < m; ++k) {
      Vec e = Vec::Zero(m);
      e(k) = step;
      jac.col(k) = (endpoint(c + e) - endpoint(c - e)) / (2.0 * step);
    }
    const Eigen::ColPivHouseholderQR<Mat> qr(jac);
    if (qr.rank() < m) throw NumericalError(M.kind() + ": log shooting Jacobian is singular (conjugate point)");
    c -= qr.solve(residual);
    if (!c.allFinite()) break;
  }
  throw NumericalError(M.kind() + ": log shooting did not converge");
}

TangentVector transport_ode(const Manifold& M, const Geodesic& g, double t0, double t1, const TangentVector& v) {
  M.check_tangent(v);
  const GeodesicFlow at0 = integrate_geodesic(M, g.start, g.initial_velocity, t0);
  require(same_base(at0.end, v.base, 1e-8), "parallel_transport: vector is not based at gamma(t0)");
  const int a = M.ambient_dim();
  Vec y(3 * a);
  y << at0.end.coords, at0.velocity.components, v.components;
  auto rhs = [&](double, const Vec& s, Vec& ds) {
    const Vec x = s.head(a), xd = s.segment(a, a), e = s.tail(a);
    ds.head(a) = xd;
    ds.segment(a, a) = M.geodesic_accel(x, xd);
    ds.tail(a) = M.transport_rate(x, xd, e);
  };
  const Vec out = integrate(rhs, y, t0, t1, M.numerics().ode);
  return {Point{out.head(a)}, out.tail(a)};
}

TangentVector hess_half_dist_sq_jacobi(const Manifold& M, const Point& p, const Point& q, const TangentVector& V) {
  require(same_base(q, V.base), "hess_half_dist_sq: V must be based at q");
  const JacobiBVP bvp = make_bvp(M, p, q, V);
  const double tau = bvp.tau();
  if (tau < 1e-14) return V;
  const JacobiSolution sol = solve_bvp(M, bvp);
  return {q, tau * sol.jdot_at_tau.components};
}

TangentVector covariant_derivative_fd(const Manifold& M, const TangentVector& V, const TangentVector& W,
                                      const FieldAlong& field, double step) {
  const Point& q = V.base;
  const double speed = M.norm(V);
  if (speed == 0.0) return M.zero_tangent(q);
  Geodesic delta;
  delta.start = q;
  delta.initial_velocity = TangentVector{q, V.components / speed};
  delta.length = 2.0 * step;

  auto sample = [&](double t) {
    const Point at = M.geodesic_point(delta, t);
    const TangentVector w_t = M.parallel_transport(delta, 0.0, t, W);
    const TangentVector f = field(at, TangentVector{at, w_t.components});
    return M.parallel_transport(delta, t, 0.0, TangentVector{at, f.components}).components;
  };
  auto central = [&](double h) -> Vec { return (sample(h) - sample(-h)) / (2.0 * h); };
  const Vec coarse = central(step);
  const Vec fine = central(0.5 * step);
  return {q, speed * (4.0 * fine - coarse) / 3.0};
}

TangentVector second_deriv_X_fd(const Manifold& M, const Point& p, const Point& q, const TangentVector& V,
                                const TangentVector& W, double step) {
  require(same_base(q, V.base) && same_base(q, W.base), "second_deriv_X: V and W must be based at q");
  return covariant_derivative_fd(
      M, V, W, [&](const Point& at, const TangentVector& w) { return M.hess_half_dist_sq(p, at, w); }, step);
}

}  // namespace karcher
