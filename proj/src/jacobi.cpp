#include "karcher/jacobi.hpp"

#include <cmath>
#include <numbers>

namespace karcher {

namespace {

// State layout: x (a) | xdot (a) | frame (a*m, column-major) | Phi (m*m) | Phi' (m*m)
struct JacobiFlow {
  const Manifold& M;
  int a;
  int m;

  int size() const { return 2 * a + a * m + 2 * m * m; }

  Vec initial(const Geodesic& g) const {
    Vec y = Vec::Zero(size());
    y.head(a) = g.start.coords;
    y.segment(a, a) = g.initial_velocity.components;
    const Mat E = M.tangent_basis(g.start.coords);
    y.segment(2 * a, a * m) = Eigen::Map<const Vec>(E.data(), a * m);
    Mat I = Mat::Identity(m, m);
    y.tail(m * m) = Eigen::Map<const Vec>(I.data(), m * m);
    return y;
  }

  Vec x(const Vec& y) const { return y.head(a); }
  Vec xdot(const Vec& y) const { return y.segment(a, a); }
  Mat frame(const Vec& y) const { return Eigen::Map<const Mat>(y.data() + 2 * a, a, m); }
  Mat phi(const Vec& y) const { return Eigen::Map<const Mat>(y.data() + 2 * a + a * m, m, m); }
  Mat phi_dot(const Vec& y) const { return Eigen::Map<const Mat>(y.data() + 2 * a + a * m + m * m, m, m); }

  void operator()(double, const Vec& y, Vec& dy) const {
    const Vec px = x(y), v = xdot(y);
    const Mat E = frame(y);
    dy.head(a) = v;
    dy.segment(a, a) = M.geodesic_accel(px, v);
    Mat dE(a, m);
    Mat K(m, m);
    for (int l = 0; l < m; ++l) {
      dE.col(l) = M.transport_rate(px, v, E.col(l));
      const Vec r = M.curvature_operator(px, E.col(l), v);
      for (int k = 0; k < m; ++k) K(k, l) = M.inner(px, E.col(k), r);
    }
    dy.segment(2 * a, a * m) = Eigen::Map<const Vec>(dE.data(), a * m);
    const Mat dphi = phi_dot(y);
    const Mat ddphi = -K * phi(y);
    dy.segment(2 * a + a * m, m * m) = Eigen::Map<const Vec>(dphi.data(), m * m);
    dy.tail(m * m) = Eigen::Map<const Vec>(ddphi.data(), m * m);
  }
};

void check_bvp(const Manifold& M, const JacobiBVP& bvp) {
  const double tau = bvp.tau();
  require(tau > 0.0, "jacobi: geodesic has zero length");
  const double C0 = M.bounds().C0;
  if (C0 > 0.0 && tau * std::sqrt(C0) >= std::numbers::pi) {
    throw DomainError("jacobi: geodesic reaches a conjugate point (tau sqrt(C0) >= pi)");
  }
  M.check_tangent(bvp.end_value);
}

// Frame coefficients a'(0) = Phi(tau)^{-1} [frame coordinates of V].
Vec shooting_coefficients(const JacobiFlow& flow, const Vec& y_tau, const TangentVector& V) {
  const Mat E = flow.frame(y_tau);
  const Vec xt = flow.x(y_tau);
  Vec c(flow.m);
  for (int k = 0; k < flow.m; ++k) c(k) = flow.M.inner(xt, E.col(k), V.components);
  Eigen::FullPivLU<Mat> lu(flow.phi(y_tau));
  if (!lu.isInvertible()) throw NumericalError("jacobi: shooting matrix is singular (conjugate point)");
  return lu.solve(c);
}

}  // namespace

JacobiBVP make_bvp(const Manifold& M, const Point& p, const Point& q, const TangentVector& V) {
  require(same_base(q, V.base), "make_bvp: end value must be based at q");
  return JacobiBVP{M.geodesic_between(p, q), V};
}

JacobiSolution solve_bvp(const Manifold& M, const JacobiBVP& bvp) {
  check_bvp(M, bvp);
  const JacobiFlow flow{M, M.ambient_dim(), M.dim()};
  const Vec y_tau = integrate(std::cref(flow), flow.initial(bvp.geodesic), 0.0, bvp.tau(), M.numerics().ode);
  const Vec w = shooting_coefficients(flow, y_tau, bvp.end_value);
  const Point q{flow.x(y_tau)};
  const Vec jdot_tau = flow.frame(y_tau) * (flow.phi_dot(y_tau) * w);
  const Vec jdot_0 = M.tangent_basis(bvp.geodesic.start.coords) * w;
  // Report at the nominal endpoint so results compose with the caller's points.
  return JacobiSolution{TangentVector{bvp.end_value.base, jdot_tau}, TangentVector{bvp.geodesic.start, jdot_0}};
}

std::vector<TangentVector> sample_jacobi_field(const Manifold& M, const JacobiBVP& bvp,
                                               const std::vector<double>& times) {
  check_bvp(M, bvp);
  const JacobiFlow flow{M, M.ambient_dim(), M.dim()};
  std::vector<double> grid{0.0};
  grid.insert(grid.end(), times.begin(), times.end());
  grid.push_back(bvp.tau());
  const auto states = integrate_at(std::cref(flow), flow.initial(bvp.geodesic), grid, M.numerics().ode);
  const Vec w = shooting_coefficients(flow, states.back(), bvp.end_value);
  std::vector<TangentVector> out;
  out.reserve(times.size());
  for (std::size_t k = 1; k + 1 < states.size(); ++k) {
    const Vec& y = states[k];
    out.emplace_back(Point{flow.x(y)}, flow.frame(y) * (flow.phi(y) * w));
  }
  return out;
}

FrameField frame_field(const Manifold& M, const Geodesic& g, const std::vector<double>& times) {
  const JacobiFlow flow{M, M.ambient_dim(), M.dim()};
  std::vector<double> grid{0.0};
  grid.insert(grid.end(), times.begin(), times.end());
  const auto states = integrate_at(std::cref(flow), flow.initial(g), grid, M.numerics().ode);
  FrameField field;
  for (std::size_t k = 1; k < states.size(); ++k) {
    field.times.push_back(grid[k]);
    field.points.emplace_back(flow.x(states[k]));
    field.frames.push_back(flow.frame(states[k]));
  }
  return field;
}

BoundaryDerivativeReport boundary_derivative_estimate_check(const Manifold& M, const JacobiBVP& bvp) {
  const double tau = bvp.tau();
  const double C0 = M.bounds().C0;
  if (C0 > 0.0 && tau >= std::numbers::pi / (2.0 * std::sqrt(C0))) {
    throw DomainError("boundary_derivative_estimate_check: requires tau < pi / (2 sqrt(C0))");
  }
  const JacobiSolution sol = solve_bvp(M, bvp);
  BoundaryDerivativeReport rep;
  rep.tau = tau;
  const Vec diff = tau * sol.jdot_at_tau.components - bvp.end_value.components;
  const Vec& q = bvp.end_value.base.coords;
  rep.deviation = std::sqrt(std::max(0.0, M.inner(q, diff, diff)));
  const double vnorm = M.norm(bvp.end_value);
  if (C0 > 0.0 && vnorm > 0.0) {
    rep.ratio = rep.deviation / (C0 * tau * tau * vnorm);
    rep.within_bound = rep.ratio <= 1.0;
  } else {
    rep.ratio = 0.0;
    rep.within_bound = rep.deviation <= 1e-9 * std::max(1.0, vnorm);
  }
  return rep;
}

TangentVector second_variation(const Manifold& M, const JacobiBVP& bvp, double step) {
  check_bvp(M, bvp);
  const Point p = bvp.geodesic.start;
  const TangentVector& V = bvp.end_value;
  auto field = [&](const Point& at, const TangentVector& w) -> TangentVector {
    const JacobiBVP moved = make_bvp(M, p, at, w);
    const JacobiSolution sol = solve_bvp(M, moved);
    return {at, moved.tau() * sol.jdot_at_tau.components};
  };
  return covariant_derivative_fd(M, V, V, field, step);
}

OdeBoundReport ode_bound_check(const MatrixOfTime& A, const VectorOfTime& B, double tau, int samples) {
  require(tau > 0.0 && samples >= 2, "ode_bound_check: need tau > 0 and at least two samples");
  const int m = static_cast<int>(B(0.0).size());
  std::vector<double> grid(samples + 1);
  for (int k = 0; k <= samples; ++k) grid[k] = tau * k / samples;

  OdeBoundReport rep;
  for (double t : grid) {
    rep.max_a_tau2 = std::max(rep.max_a_tau2, A(t).operatorNorm() * tau * tau);
    rep.max_b = std::max(rep.max_b, B(t).norm());
  }
  require(rep.max_a_tau2 <= 1.0 + 1e-12, "ode_bound_check: requires ||A(t)|| tau^2 <= 1");

  // U (m) | U' (m) | Phi (m*m) | Phi' (m*m); U particular with U(0) = U'(0) = 0.
  auto rhs = [&](double t, const Vec& y, Vec& dy) {
    const Mat At = A(t);
    dy.head(m) = y.segment(m, m);
    dy.segment(m, m) = At * y.head(m) + B(t);
    const Eigen::Map<const Mat> phi(y.data() + 2 * m, m, m);
    const Eigen::Map<const Mat> phid(y.data() + 2 * m + m * m, m, m);
    const Mat ddphi = At * phi;
    dy.segment(2 * m, m * m) = Eigen::Map<const Vec>(phid.data(), m * m);
    dy.tail(m * m) = Eigen::Map<const Vec>(ddphi.data(), m * m);
  };
  Vec y0 = Vec::Zero(2 * m + 2 * m * m);
  const Mat I = Mat::Identity(m, m);
  y0.tail(m * m) = Eigen::Map<const Vec>(I.data(), m * m);
  OdeOptions opts;
  opts.abs_tol = opts.rel_tol = 1e-11;
  const auto states = integrate_at(rhs, y0, grid, opts);

  const Vec& yt = states.back();
  const Eigen::Map<const Mat> phi_tau(yt.data() + 2 * m, m, m);
  Eigen::FullPivLU<Mat> lu(phi_tau);
  if (!lu.isInvertible()) throw NumericalError("ode_bound_check: boundary value problem is singular");
  const Vec c = -lu.solve(Vec(yt.head(m)));
  for (const Vec& y : states) {
    const Eigen::Map<const Mat> phid(y.data() + 2 * m + m * m, m, m);
    rep.max_udot = std::max(rep.max_udot, (y.segment(m, m) + phid * c).norm());
  }
  rep.bound = 3.0 * rep.max_b * tau;
  rep.holds = rep.max_udot <= rep.bound;
  return rep;
}

}  // namespace karcher
